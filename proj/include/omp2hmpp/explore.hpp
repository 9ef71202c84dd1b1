#pragma once

// Running variants: a deterministic cost-model simulator that replays the
// HMPP directives of an emitted file, a shell executor for real builds, and
// the sweep that repeats runs and keeps medians.

#include "omp2hmpp/ast.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace omp2hmpp {

double median(std::vector<double> samples);

/// Watt-hours to joules (3600 J per Wh).
double wh_to_joules(double wh);

struct CostModelParams {
    double h2d_bandwidth = 6e9;   // bytes/s
    double d2h_bandwidth = 6e9;   // bytes/s
    double kernel_launch_overhead = 1e-5; // s
    double gpu_throughput = 5e11; // ops/s
    double cpu_throughput = 4e10; // ops/s
    double power_cpu_active = 95;
    double power_cpu_idle = 20;
    double power_gpu_active = 225;
    double power_memory = 30;

    /// Throws std::invalid_argument unless every field is > 0.
    void validate() const;
};

/// `key = value` lines, `#` comments. Unknown keys are an error; missing
/// keys keep their defaults.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& file);
CostModelParams cost_model_from(const std::map<std::string, std::string>& kv);

struct ExecutorSpec {
    enum class Mode { Shell, Simulated } mode = Mode::Simulated;
    // shell mode; `{file}` is the variant source, `{exe}` a per-variant binary
    std::string build_command;
    std::string run_command = "{exe}";
    double timeout_s = 600;
    std::string energy_command; // prints cumulative Wh
    std::string energy_file;    // holds cumulative Wh
    CostModelParams cost;
};

/// Loads an executor config file; validates templates and timeout.
ExecutorSpec load_executor_spec(const std::filesystem::path& file);

struct TransferCounts {
    int h2d_arrays = 0;
    int d2h_arrays = 0;
    int h2d_scalars = 0;
    int d2h_scalars = 0;
    double h2d_bytes = 0;
    double d2h_bytes = 0;
    int launches = 0;

    bool operator==(const TransferCounts&) const = default;
};

struct SimResult {
    double time_s = 0;
    double energy_J = 0;
    // components of time_s before async overlap
    double load_s = 0;
    double store_s = 0;
    double launch_s = 0;
    double gpu_s = 0;
    double cpu_s = 0;
    double cpu_ops = 0;
    double gpu_ops = 0;
    TransferCounts transfers;
};

/// Thrown for plans that would read stale data (host or device side).
struct SoundnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Replays `main` of an emitted variant: loops containing directives or
/// codelet calls are iterated, other code is costed in closed form.
SimResult simulate_variant(const SourceUnit& variant, const CostModelParams& params);
SimResult simulate_source(const std::string& text, const CostModelParams& params);

struct Sample {
    double time_ms = 0;
    double energy_J = 0;

    bool operator==(const Sample&) const = default;
};

struct Measurement {
    std::string name;
    std::string signature; // "a, b, c" (blocks joined with " | ")
    double time_ms = 0;
    double energy_J = 0;
    std::vector<Sample> samples;
    std::optional<std::string> failure;

    bool operator==(const Measurement&) const = default;
};

struct VariantJob {
    std::string name;
    std::string signature;
    std::filesystem::path file;
};

struct ExecutionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Executor {
  public:
    virtual ~Executor() = default;
    /// One run; throws ExecutionFailure. `log` receives run details.
    virtual Sample run(const VariantJob& job, int repetition, std::ostream& log) = 0;
};

class SimulatedExecutor : public Executor {
  public:
    explicit SimulatedExecutor(CostModelParams p);
    Sample run(const VariantJob& job, int repetition, std::ostream& log) override;

  private:
    CostModelParams params_;
    std::map<std::string, Sample> cache_;
};

class ShellExecutor : public Executor {
  public:
    ShellExecutor(ExecutorSpec spec, std::filesystem::path work_dir);
    Sample run(const VariantJob& job, int repetition, std::ostream& log) override;

  private:
    double read_energy_wh() const;

    ExecutorSpec spec_;
    std::filesystem::path work_;
    std::map<std::string, std::filesystem::path> built_;
};

/// Hands back recorded samples keyed by signature (Table-8 style names are
/// not unique), cycling when asked for more repetitions.
class ReplayExecutor : public Executor {
  public:
    explicit ReplayExecutor(std::map<std::string, std::vector<Sample>> recorded);
    Sample run(const VariantJob& job, int repetition, std::ostream& log) override;

  private:
    std::map<std::string, std::vector<Sample>> recorded_;
};

/// Runs every job `repetitions` times, sequentially. Failures become failed
/// Measurements. With `log_dir`, writes `<file stem>.log` per job.
std::vector<Measurement> run_exploration(const std::vector<VariantJob>& jobs, Executor& executor, int repetitions,
                                         const std::optional<std::filesystem::path>& log_dir = std::nullopt);

} // namespace omp2hmpp
