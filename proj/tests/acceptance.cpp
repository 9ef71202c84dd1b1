// One line per acceptance criterion; exit status is the number of failures.

#include "omp2hmpp/cfront.hpp"
#include "omp2hmpp/driver.hpp"
#include "omp2hmpp/emit.hpp"
#include "omp2hmpp/explore.hpp"
#include "omp2hmpp/report.hpp"
#include "omp2hmpp/transform.hpp"
#include "omp2hmpp/variants.hpp"

#include "test_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace omp2hmpp;
namespace fs = std::filesystem;

namespace {

struct Failed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what)
{
    if (!ok) throw Failed(what);
}

int failures = 0;

void criterion(int n, const std::function<std::string()>& body)
{
    auto t0 = std::chrono::steady_clock::now();
    std::string detail, verdict = "PASS";
    try {
        detail = body();
    } catch (const std::exception& e) {
        verdict = "FAIL";
        detail = e.what();
        ++failures;
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", s);
    std::cout << "criterion " << n << ": " << verdict << " (" << buf << " s) " << detail << std::endl;
}

double elapsed_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// whitespace runs collapsed, blank lines dropped
std::string normalized(const std::string& text)
{
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
        std::istringstream words(line);
        std::string w, joined;
        while (words >> w) joined += (joined.empty() ? "" : " ") + w;
        if (!joined.empty()) out += joined + "\n";
    }
    return out;
}

SourceUnit load(const std::string& name) { return parse_translation_unit(read_data(name), name); }

std::string uniform(const std::string& file, Signature s)
{
    auto u = load(file);
    return emit_variant(u, uniform_variant(u, decode_signature(s))).source;
}

int count_lines_with(const std::string& text, const std::string& needle)
{
    int n = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.find("#pragma hmpp") != std::string::npos && line.find(needle) != std::string::npos) ++n;
    return n;
}

std::string golden_transformations()
{
    auto t0 = std::chrono::steady_clock::now();
    auto same = [](const std::string& got, const std::string& golden, const std::string& what) {
        require(normalized(got) == normalized(read_data(golden)), what + " differs from " + golden);
        // and the canonical spelling survives a reparse
        require(print_unit(parse_translation_unit(got, "out")) == print_unit(parse_translation_unit(read_data(golden), "g")),
                what + " does not reparse to the golden");
    };
    same(uniform("table1.c", {0, 0, 1}), "golden/table1_codelet.c", "Table 1 codelet");
    same(uniform("table3.c", {0, 0, 1}), "golden/table3_codelet.c", "Table 3 reduction");
    auto t5 = uniform("table5.c", {11, 3, 0});
    same(t5, "golden/table5_optimized.c", "Table 5 optimized");
    auto [t9, rep] = inline_calls(load("table9.c"));
    same(print_unit(t9), "golden/table9_inline.c", "Table 9 inlining");

    require(count_lines_with(t5, "advancedload") == 1, "Table 5: expected one advancedload");
    require(t5.find("advancedload") < t5.find("for (index = 0"), "Table 5: advancedload not before the loop");
    require(count_lines_with(t5, "callsite") == 2 && count_lines_with(t5, "noupdate=true") == 2,
            "Table 5: both callsites need noupdate");
    auto rel = t5.rfind("release");
    auto last_store = t5.rfind("delegatedstore");
    auto loop_end = t5.find("displayRegion(myTable);");
    require(last_store != std::string::npos && last_store < loop_end && rel > loop_end,
            "Table 5: final delegatedstore and release missing");
    double s = elapsed_since(t0);
    require(s < 1.0, "took " + std::to_string(s) + " s");
    return "Tables 1, 3, 5, 9 match goldens";
}

std::string erasure_equivalence()
{
    auto t0 = std::chrono::steady_clock::now();
    int compiled = 0;
    auto check_file = [&](const std::string& file, bool cxx) {
        auto ref = run_host_program(read_data(file), cxx);
        require(ref.has_value(), file + ": original does not build");
        auto u = load(file);
        for (const auto& v : emit_all(u)) {
            auto text = print_unit(strip_pragmas(parse_translation_unit(v.source, v.suffix)));
            auto out = run_host_program(text, cxx);
            require(out.has_value(), file + " [" + v.signature + "]: stripped variant does not build");
            require(*out == *ref, file + " [" + v.signature + "]: output differs");
            ++compiled;
        }
    };
    check_file("table1.c", false);
    check_file("table6.c", false);
    check_file("jacobi.c", false);
    // inlining program: the original needs C++ for its reference parameter
    auto src = read_data("table9.c");
    auto ref = run_host_program(src, true);
    auto [inl, rep] = inline_calls(load("table9.c"));
    auto out = run_host_program(print_unit(strip_pragmas(inl)), false);
    require(ref && out && *ref == *out, "table9.c: inlined program output differs");
    ++compiled;
    check_file("inline_kernel.c", true);
    double s = elapsed_since(t0);
    require(s < 30.0, "took " + std::to_string(s) + " s");
    return std::to_string(compiled) + " stripped programs match their originals";
}

std::string enumeration_and_codec()
{
    auto vs = enumerate_variants(0, false);
    int base = 0;
    std::set<Signature> sigs;
    for (const auto& v : vs) {
        if (v.flags.baseline) ++base;
        sigs.insert(encode_signature(v.flags));
    }
    require(base == 1 && vs.size() == 22 && sigs.size() == 22, "expected 21 signatures plus baseline, got " +
                                                                    std::to_string(vs.size()));
    int feasible = 0;
    for (unsigned bits = 0; bits < 128; ++bits) {
        FlagSet f{bool(bits & 1), bool(bits & 2), bool(bits & 4), bool(bits & 8),
                  bool(bits & 16), bool(bits & 32), bool(bits & 64)};
        if (flag_violation(f)) continue;
        ++feasible;
        require(decode_signature(encode_signature(f)) == f, "round trip failed for " + encode_signature(f).str());
    }
    auto is = [](Signature s, FlagSet want) { return decode_signature(s) == want; };
    FlagSet f910{}, f1010{}, f1130{}, f000{};
    f910.advancedload = f910.noupdate = f910.delegatedstore = true;
    f1010.advancedload = f1010.release = f1010.delegatedstore = true;
    f1130.advancedload = f1130.release = f1130.noupdate = f1130.delegatedstore = f1130.group = true;
    f000.baseline = true;
    require(is({9, 1, 0}, f910) && is({10, 1, 0}, f1010) && is({11, 3, 0}, f1130) && is({0, 0, 0}, f000),
            "reference signatures decode wrongly");
    return "22 configurations, " + std::to_string(feasible) + " feasible flag sets round-trip";
}

std::string transfer_minimality()
{
    CostModelParams p;
    auto opt = simulate_source(uniform("table5.c", {11, 3, 0}), p);
    auto naive = simulate_source(uniform("table5.c", {0, 0, 1}), p);
    auto& o = opt.transfers;
    auto& n = naive.transfers;
    require(o.h2d_arrays == 2, "optimized h2d arrays " + std::to_string(o.h2d_arrays));
    require(o.d2h_arrays >= 1 && o.d2h_arrays <= 2, "optimized d2h arrays " + std::to_string(o.d2h_arrays));
    require(n.h2d_arrays >= 198 && n.d2h_arrays >= 198, "naive transfers " + std::to_string(n.h2d_arrays) + "/" +
                                                            std::to_string(n.d2h_arrays));
    require(opt.time_s < naive.time_s && opt.energy_J < naive.energy_J, "optimized variant not cheaper");
    std::ostringstream s;
    s << "grouped h2d " << o.h2d_arrays << " d2h " << o.d2h_arrays << "; naive h2d " << n.h2d_arrays << " d2h "
      << n.d2h_arrays;
    return s.str();
}

std::string report_fidelity()
{
    auto ms = parse_csv(read_data("table8.csv"));
    require(ms.size() == 5, "expected five measurements");
    auto csv = write_csv(ms);
    require(csv.substr(0, csv.find('\n')) == "Version/Measure,Signature,Time Expended(ms.),Energy Consumption(J.)",
            "header mismatch");
    auto front = pareto_frontier(tradeoff_points(ms));
    require(front.size() == 1 && front[0].time_ms == 9611 && front[0].energy_J == 3401.55, "frontier mismatch");
    const auto& base = find_baseline(ms);
    auto sp = speedup(base, ms[1]);
    auto er = base.energy_J / ms[1].energy_J;
    require(std::abs(sp - 6.19) <= 0.01, "speedup " + std::to_string(sp));
    require(std::abs(er - 5.12) <= 0.01, "energy ratio " + std::to_string(er));
    char buf[96];
    std::snprintf(buf, sizeof buf, "frontier {(9611 ms, 3401.55 J)}, speedup %.4f, energy ratio %.4f", sp, er);
    return buf;
}

std::string unit_exactness()
{
    require(wh_to_joules(1) == 3600.0, "wh_to_joules(1) != 3600");
    std::mt19937 rng(20260101);
    std::uniform_int_distribution<int> len(1, 50);
    std::uniform_real_distribution<double> val(-1e6, 1e6);
    for (int round = 0; round < 1000; ++round) {
        std::vector<double> xs(len(rng));
        for (auto& x : xs) x = val(rng);
        double m = median(xs);
        require(m >= *std::min_element(xs.begin(), xs.end()) && m <= *std::max_element(xs.begin(), xs.end()),
                "median outside sample bounds");
        auto shuffled = xs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        require(median(shuffled) == m, "median depends on sample order");
    }
    return "wh_to_joules(1) = 3600; median bounded and order-free over 1000 samples";
}

std::vector<TradeoffPoint> brute_force_frontier(const std::vector<TradeoffPoint>& pts)
{
    std::vector<TradeoffPoint> out;
    for (const auto& p : pts) {
        bool dominated = false;
        for (const auto& q : pts)
            if (q.time_ms <= p.time_ms && q.energy_J <= p.energy_J &&
                (q.time_ms < p.time_ms || q.energy_J < p.energy_J))
                dominated = true;
        if (!dominated) out.push_back(p);
    }
    return out;
}

std::string pareto_oracle()
{
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> size(0, 200);
    std::uniform_int_distribution<int> coarse(0, 30); // small range forces ties
    std::uniform_real_distribution<double> fine(0, 1e4);
    for (int set = 0; set < 100; ++set) {
        std::vector<TradeoffPoint> pts(size(rng));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            pts[i].name = "p" + std::to_string(i);
            bool tie = set % 2 == 0;
            pts[i].time_ms = tie ? coarse(rng) : fine(rng);
            pts[i].energy_J = tie ? coarse(rng) : fine(rng);
        }
        auto key = [](const std::vector<TradeoffPoint>& v) {
            std::set<std::string> s;
            for (const auto& p : v) s.insert(p.name);
            return s;
        };
        require(key(pareto_frontier(pts)) == key(brute_force_frontier(pts)),
                "set " + std::to_string(set) + " disagrees with the oracle");
    }
    return "100 random sets agree with the O(n^2) oracle";
}

std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> t;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        t[fs::relative(e.path(), root).string()] = ss.str();
    }
    return t;
}

std::string determinism()
{
    auto root = fs::temp_directory_path() / ("omp2hmpp_accept" + std::to_string(::getpid()));
    fs::remove_all(root);
    std::vector<std::map<std::string, std::string>> trees;
    for (const char* run : {"a", "b"}) {
        RunConfig cfg;
        cfg.command = RunConfig::Command::Explore;
        cfg.input = data_path("jacobi.c");
        cfg.out_dir = root / run;
        cfg.executor = fs::path(OMP2HMPP_CONFIG_DIR) / "simulated.conf";
        cfg.repetitions = 3;
        std::ostringstream out, err;
        int rc = run_command(cfg, out, err);
        if (rc != 0) {
            fs::remove_all(root);
            throw Failed("explore exited " + std::to_string(rc) + ": " + err.str());
        }
        trees.push_back(tree(cfg.out_dir));
    }
    fs::remove_all(root);
    require(trees[0] == trees[1], "output trees differ");
    return std::to_string(trees[0].size()) + " files byte-identical across two runs";
}

} // namespace

int main()
{
    criterion(1, golden_transformations);
    criterion(2, erasure_equivalence);
    criterion(3, enumeration_and_codec);
    criterion(4, transfer_minimality);
    criterion(5, report_fidelity);
    criterion(6, unit_exactness);
    criterion(7, pareto_oracle);
    criterion(8, determinism);
    return failures;
}
