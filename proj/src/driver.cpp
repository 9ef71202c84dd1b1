#include "omp2hmpp/driver.hpp"

#include "omp2hmpp/cfront.hpp"
#include "omp2hmpp/diagnostic.hpp"
#include "omp2hmpp/emit.hpp"
#include "omp2hmpp/explore.hpp"
#include "omp2hmpp/report.hpp"
#include "omp2hmpp/transform.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace omp2hmpp {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw UsageError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream f(p, std::ios::binary);
    if (!f) throw UsageError("cannot write " + p.string());
    f << text;
}

void report_compile_error(const CompileError& e, const fs::path& input, std::ostream& err)
{
    for (auto d : e.diagnostics()) {
        if (d.file.empty()) d.file = input.string();
        err << d.str() << "\n";
    }
}

struct Rendered {
    std::vector<RenderedVariant> variants;
    bool pragma_free = false;
};

// All plans of the input, honouring --block and --cap.
Rendered render(const RunConfig& cfg, const SourceUnit& unit, std::ostream& err)
{
    Rendered r;
    auto choices = block_choices(unit);
    if (choices.empty()) {
        r.pragma_free = true;
        return r;
    }
    if (!cfg.blocks.empty()) {
        std::map<int, int> line_of; // stmt id -> pragma line
        for (const auto& b : find_omp_blocks(unit)) line_of[b.stmt_id] = b.line;
        std::set<int> wanted(cfg.blocks.begin(), cfg.blocks.end());
        for (int l : wanted) {
            bool found = std::any_of(choices.begin(), choices.end(),
                                     [&](const BlockChoice& c) { return c.check && line_of[c.block] == l; });
            if (!found) throw UsageError("--block " + std::to_string(l) + ": no check block has its pragma on that line");
        }
        for (auto& c : choices) {
            if (c.check && !wanted.count(line_of[c.block])) {
                c.check = false; // left as OpenMP
                err << "note: " << unit.file << ":" << line_of[c.block] << ": block not selected, kept as OpenMP\n";
            }
        }
    }
    for (const auto& v : plans_for_unit(choices, cfg.cap)) r.variants.push_back(emit_variant(unit, v));
    return r;
}

std::vector<VariantJob> write_rendered(const RunConfig& cfg, const Rendered& r, const std::string& source,
                                       const fs::path& dir, std::ostream& err)
{
    fs::create_directories(dir);
    auto stem = cfg.input.stem().string();
    std::vector<VariantJob> jobs;
    if (r.pragma_free) {
        err << "warning: " << cfg.input.string() << ": no check or fixed blocks; copied unchanged\n";
        auto name = cfg.input.filename().string();
        write_file(dir / name, source);
        std::ofstream(dir / "manifest.txt") << "Original(OpenMP)\t0, 0, 0\t" << name << "\n";
        jobs.push_back({"Original(OpenMP)", "0, 0, 0", dir / name});
        return jobs;
    }
    write_variants(dir, stem, r.variants);
    for (const auto& e : read_manifest(dir / "manifest.txt")) jobs.push_back({e.name, e.signature, dir / e.file});
    return jobs;
}

// Report stage shared by explore and report.
int analyse(const RunConfig& cfg, const std::vector<Measurement>& ms, std::ostream& out)
{
    write_file(cfg.out_dir / "results.csv", write_csv(ms, cfg.baseline));
    emit_plot_data(cfg.out_dir, ms, cfg.baseline, cfg.ops);
    auto summary = summarize(ms, cfg.baseline, cfg.ops);
    write_file(cfg.out_dir / "summary.txt", summary);
    out << summary;
    return kExitOk;
}

template <class F> int guarded(const RunConfig& cfg, std::ostream& err, F&& body)
{
    try {
        return body();
    } catch (const CompileError& e) {
        report_compile_error(e, cfg.input, err);
        return kExitCompile;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

} // namespace

int cmd_transform(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(cfg, err, [&] {
        auto source = read_file(cfg.input);
        auto unit = parse_translation_unit(source, cfg.input.string());
        auto r = render(cfg, unit, err);
        auto jobs = write_rendered(cfg, r, source, cfg.out_dir, err);
        for (const auto& j : jobs) out << j.signature << "\t" << j.file.filename().string() << "\n";
        return kExitOk;
    });
}

int cmd_explore(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(cfg, err, [&] {
        if (cfg.repetitions < 1) throw UsageError("--reps must be >= 1");
        fs::create_directories(cfg.out_dir);

        if (cfg.replay && cfg.input.empty()) {
            // recorded measurements only: straight to the report stage
            auto ms = parse_csv(read_file(*cfg.replay));
            if (ms.empty()) throw UsageError(cfg.replay->string() + ": no measurements");
            return analyse(cfg, ms, out);
        }

        auto source = read_file(cfg.input);
        auto unit = parse_translation_unit(source, cfg.input.string());
        auto r = render(cfg, unit, err);
        if (r.pragma_free) throw UsageError(cfg.input.string() + ": nothing to explore (no check or fixed blocks)");
        auto jobs = write_rendered(cfg, r, source, cfg.out_dir / "variants", err);

        std::unique_ptr<Executor> ex;
        if (cfg.replay) {
            std::map<std::string, std::vector<Sample>> rec;
            for (const auto& m : parse_csv(read_file(*cfg.replay)))
                if (!m.failure) rec[m.signature].push_back({m.time_ms, m.energy_J});
            ex = std::make_unique<ReplayExecutor>(std::move(rec));
        } else {
            ExecutorSpec spec;
            if (cfg.executor) spec = load_executor_spec(*cfg.executor);
            if (spec.mode == ExecutorSpec::Mode::Simulated)
                ex = std::make_unique<SimulatedExecutor>(spec.cost);
            else
                ex = std::make_unique<ShellExecutor>(spec, cfg.out_dir / "build");
        }
        auto ms = run_exploration(jobs, *ex, cfg.repetitions, cfg.out_dir / "logs");
        int failures = 0;
        for (const auto& m : ms) {
            if (!m.failure) continue;
            ++failures;
            err << "error: " << m.name << " [" << m.signature << "]: " << *m.failure << "\n";
        }
        if (failures == static_cast<int>(ms.size())) {
            write_file(cfg.out_dir / "results.csv", write_csv(ms, cfg.baseline));
            err << "error: every variant failed\n";
            return static_cast<int>(kExitExecution);
        }
        analyse(cfg, ms, out);
        return failures ? static_cast<int>(kExitExecution) : static_cast<int>(kExitOk);
    });
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(cfg, err, [&] {
        auto ms = parse_csv(read_file(cfg.input));
        if (ms.empty()) throw UsageError(cfg.input.string() + ": no measurements");
        fs::create_directories(cfg.out_dir);
        emit_plot_data(cfg.out_dir, ms, cfg.baseline, cfg.ops);
        auto summary = summarize(ms, cfg.baseline, cfg.ops);
        write_file(cfg.out_dir / "summary.txt", summary);
        out << summary;
        return kExitOk;
    });
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    switch (cfg.command) {
    case RunConfig::Command::Transform: return cmd_transform(cfg, out, err);
    case RunConfig::Command::Explore: return cmd_explore(cfg, out, err);
    case RunConfig::Command::Report: return cmd_report(cfg, out, err);
    }
    return kExitUsage;
}

} // namespace omp2hmpp
