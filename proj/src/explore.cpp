#include "omp2hmpp/explore.hpp"

#include "omp2hmpp/cfront.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <sys/wait.h>
#include <unistd.h>

namespace omp2hmpp {

double median(std::vector<double> samples)
{
    if (samples.empty()) throw std::invalid_argument("median of no samples");
    std::sort(samples.begin(), samples.end());
    std::size_t n = samples.size();
    if (n % 2) return samples[n / 2];
    return (samples[n / 2 - 1] + samples[n / 2]) / 2.0;
}

double wh_to_joules(double wh)
{
    if (!(wh >= 0)) throw std::invalid_argument("negative energy reading");
    return wh * 3600.0;
}

void CostModelParams::validate() const
{
    const std::pair<const char*, double> fields[] = {
        {"h2d_bandwidth", h2d_bandwidth},       {"d2h_bandwidth", d2h_bandwidth},
        {"kernel_launch_overhead", kernel_launch_overhead},
        {"gpu_throughput", gpu_throughput},     {"cpu_throughput", cpu_throughput},
        {"power_cpu_active", power_cpu_active}, {"power_cpu_idle", power_cpu_idle},
        {"power_gpu_active", power_gpu_active}, {"power_memory", power_memory}};
    for (const auto& [name, v] : fields)
        if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument(std::string("cost model: ") + name + " must be > 0");
}

namespace {

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double number(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double d = 0;
    try {
        d = std::stod(v, &used);
    } catch (...) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw std::invalid_argument("config: '" + key + "' is not a number: " + v);
    return d;
}

const char* const kCostKeys[] = {"h2d_bandwidth",  "d2h_bandwidth",    "kernel_launch_overhead",
                                 "gpu_throughput", "cpu_throughput",   "power_cpu_active",
                                 "power_cpu_idle", "power_gpu_active", "power_memory"};

std::string substitute(std::string tpl, const std::string& key, const std::string& value)
{
    for (auto pos = tpl.find(key); pos != std::string::npos; pos = tpl.find(key, pos + value.size()))
        tpl.replace(pos, key.size(), value);
    return tpl;
}

std::string quote(const std::string& s)
{
    std::string r = "'";
    for (char c : s) {
        if (c == '\'')
            r += "'\\''";
        else
            r += c;
    }
    return r + "'";
}

struct ProcResult {
    int status = 0;
    bool timed_out = false;
};

// `sh -c cmd` with output appended to `log`; killed after `timeout_s`.
ProcResult run_shell(const std::string& cmd, const std::filesystem::path& log, double timeout_s)
{
    std::string full = "exec >>" + quote(log.string()) + " 2>&1; " + cmd;
    pid_t pid = ::fork();
    if (pid < 0) throw ExecutionFailure("fork failed");
    if (pid == 0) {
        ::setpgid(0, 0);
        ::execl("/bin/sh", "sh", "-c", full.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    int status = 0;
    while (true) {
        pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (std::chrono::steady_clock::now() > deadline) {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            return {status, true};
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return {status, false};
}

} // namespace

std::map<std::string, std::string> read_key_values(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot read config file " + file.string());
    std::map<std::string, std::string> kv;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(file.string() + ":" + std::to_string(n) + ": expected 'key = value'");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

CostModelParams cost_model_from(const std::map<std::string, std::string>& kv)
{
    CostModelParams p;
    double* slots[] = {&p.h2d_bandwidth,    &p.d2h_bandwidth,  &p.kernel_launch_overhead,
                       &p.gpu_throughput,   &p.cpu_throughput, &p.power_cpu_active,
                       &p.power_cpu_idle,   &p.power_gpu_active, &p.power_memory};
    for (std::size_t i = 0; i < std::size(kCostKeys); ++i)
        if (auto it = kv.find(kCostKeys[i]); it != kv.end()) *slots[i] = number(it->first, it->second);
    p.validate();
    return p;
}

ExecutorSpec load_executor_spec(const std::filesystem::path& file)
{
    auto kv = read_key_values(file);
    static const std::set<std::string> shell_keys = {"mode", "build", "run", "timeout", "energy_command", "energy_file"};
    for (const auto& [k, v] : kv) {
        bool cost = std::find(std::begin(kCostKeys), std::end(kCostKeys), k) != std::end(kCostKeys);
        if (!cost && !shell_keys.count(k)) throw std::runtime_error(file.string() + ": unknown key '" + k + "'");
    }
    ExecutorSpec spec;
    std::string mode = kv.count("mode") ? kv["mode"] : "simulated";
    if (mode == "simulated") {
        spec.mode = ExecutorSpec::Mode::Simulated;
        spec.cost = cost_model_from(kv);
        return spec;
    }
    if (mode != "shell") throw std::runtime_error(file.string() + ": mode must be 'shell' or 'simulated'");
    spec.mode = ExecutorSpec::Mode::Shell;
    spec.build_command = kv["build"];
    if (kv.count("run")) spec.run_command = kv["run"];
    if (kv.count("timeout")) spec.timeout_s = number("timeout", kv["timeout"]);
    spec.energy_command = kv["energy_command"];
    spec.energy_file = kv["energy_file"];
    if (spec.build_command.find("{file}") == std::string::npos)
        throw std::runtime_error(file.string() + ": build command must contain {file}");
    if (!(spec.timeout_s > 0)) throw std::runtime_error(file.string() + ": timeout must be > 0");
    return spec;
}

// ---- executors

SimulatedExecutor::SimulatedExecutor(CostModelParams p) : params_(p) { params_.validate(); }

Sample SimulatedExecutor::run(const VariantJob& job, int repetition, std::ostream& log)
{
    auto key = job.file.string();
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::ifstream in(job.file);
    if (!in) throw ExecutionFailure("cannot read " + key);
    std::stringstream ss;
    ss << in.rdbuf();
    SimResult r;
    try {
        r = simulate_variant(parse_translation_unit(ss.str(), job.file.filename().string()), params_);
    } catch (const SoundnessError& e) {
        throw ExecutionFailure(std::string("unsound transfer plan: ") + e.what());
    } catch (const std::exception& e) {
        throw ExecutionFailure(e.what());
    }
    const auto& t = r.transfers;
    log << "simulated rep " << repetition << ": time_s=" << r.time_s << " energy_J=" << r.energy_J << "\n"
        << "  load_s=" << r.load_s << " store_s=" << r.store_s << " launch_s=" << r.launch_s << " gpu_s=" << r.gpu_s
        << " cpu_s=" << r.cpu_s << "\n"
        << "  h2d arrays=" << t.h2d_arrays << " scalars=" << t.h2d_scalars << " bytes=" << t.h2d_bytes
        << "; d2h arrays=" << t.d2h_arrays << " scalars=" << t.d2h_scalars << " bytes=" << t.d2h_bytes
        << "; launches=" << t.launches << "\n";
    Sample s{r.time_s * 1000.0, r.energy_J};
    cache_[key] = s;
    return s;
}

ShellExecutor::ShellExecutor(ExecutorSpec spec, std::filesystem::path work_dir)
    : spec_(std::move(spec)), work_(std::move(work_dir))
{
    std::filesystem::create_directories(work_);
}

double ShellExecutor::read_energy_wh() const
{
    std::string text;
    if (!spec_.energy_file.empty()) {
        std::ifstream in(spec_.energy_file);
        if (!in) throw ExecutionFailure("energy source unavailable: cannot read " + spec_.energy_file);
        std::getline(in, text);
    } else if (!spec_.energy_command.empty()) {
        FILE* p = ::popen(spec_.energy_command.c_str(), "r");
        if (!p) throw ExecutionFailure("energy source unavailable: cannot start energy command");
        char buf[256];
        while (std::fgets(buf, sizeof buf, p)) text += buf;
        if (::pclose(p) != 0) throw ExecutionFailure("energy source unavailable: energy command failed");
    } else {
        throw ExecutionFailure("energy source unavailable: no energy_command or energy_file configured");
    }
    try {
        return std::stod(trim(text));
    } catch (...) {
        throw ExecutionFailure("energy source unavailable: unreadable reading '" + trim(text) + "'");
    }
}

Sample ShellExecutor::run(const VariantJob& job, int repetition, std::ostream& log)
{
    auto stem = job.file.stem().string();
    auto exe = work_ / stem;
    auto cmd_log = work_ / (stem + ".out");
    auto fill = [&](const std::string& tpl) {
        return substitute(substitute(tpl, "{file}", quote(job.file.string())), "{exe}", quote(exe.string()));
    };
    if (!built_.count(stem)) {
        auto b = run_shell(fill(spec_.build_command), cmd_log, spec_.timeout_s);
        if (b.timed_out) throw ExecutionFailure("build timeout");
        if (!WIFEXITED(b.status) || WEXITSTATUS(b.status) != 0) throw ExecutionFailure("build failure (see " + cmd_log.string() + ")");
        built_[stem] = exe;
    }
    double before = read_energy_wh();
    auto t0 = std::chrono::steady_clock::now();
    auto r = run_shell(fill(spec_.run_command), cmd_log, spec_.timeout_s);
    auto t1 = std::chrono::steady_clock::now();
    if (r.timed_out) throw ExecutionFailure("run timeout");
    if (!WIFEXITED(r.status)) throw ExecutionFailure("run terminated by a signal");
    double after = read_energy_wh();
    Sample s{std::chrono::duration<double, std::milli>(t1 - t0).count(), wh_to_joules(std::max(0.0, after - before))};
    log << "shell rep " << repetition << ": exit=" << WEXITSTATUS(r.status) << " time_ms=" << s.time_ms
        << " energy_J=" << s.energy_J << "\n";
    return s;
}

ReplayExecutor::ReplayExecutor(std::map<std::string, std::vector<Sample>> recorded) : recorded_(std::move(recorded)) {}

Sample ReplayExecutor::run(const VariantJob& job, int repetition, std::ostream& log)
{
    auto it = recorded_.find(job.signature);
    if (it == recorded_.end() || it->second.empty())
        throw ExecutionFailure("no recorded samples for signature " + job.signature);
    const auto& s = it->second[static_cast<std::size_t>(repetition) % it->second.size()];
    log << "replayed rep " << repetition << ": time_ms=" << s.time_ms << " energy_J=" << s.energy_J << "\n";
    return s;
}

std::vector<Measurement> run_exploration(const std::vector<VariantJob>& jobs, Executor& executor, int repetitions,
                                         const std::optional<std::filesystem::path>& log_dir)
{
    if (repetitions < 1) throw std::invalid_argument("repetitions must be >= 1");
    if (log_dir) std::filesystem::create_directories(*log_dir);
    std::vector<Measurement> out;
    for (const auto& job : jobs) {
        Measurement m;
        m.name = job.name;
        m.signature = job.signature;
        std::ostringstream log;
        log << job.name << " [" << job.signature << "] " << job.file.filename().string() << "\n";
        try {
            for (int r = 0; r < repetitions; ++r) m.samples.push_back(executor.run(job, r, log));
            std::vector<double> t, e;
            for (const auto& s : m.samples) {
                t.push_back(s.time_ms);
                e.push_back(s.energy_J);
            }
            m.time_ms = median(t);
            m.energy_J = median(e);
        } catch (const ExecutionFailure& f) {
            m.failure = f.what();
            m.time_ms = m.energy_J = 0;
            log << "failed: " << f.what() << "\n";
        }
        if (log_dir) {
            std::ofstream lf(*log_dir / (job.file.stem().string() + ".log"));
            lf << log.str();
        }
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace omp2hmpp
