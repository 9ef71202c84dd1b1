#pragma once

// Post-processing of measurements: the Table-8 CSV, speedups, GOPS/W and the
// time/energy Pareto frontier, plus plot-ready column files.

#include "omp2hmpp/explore.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace omp2hmpp {

inline constexpr const char* kCsvHeader = "Version/Measure,Signature,Time Expended(ms.),Energy Consumption(J.)";

/// Shortest decimal that reads back to the same double; `.` separator.
std::string format_number(double v);

/// Header plus one row per measurement: baseline first, then ascending time,
/// failed runs last with empty cells and a trailing reason.
std::string write_csv(std::vector<Measurement> measurements, const std::string& baseline_signature = "");

/// Inverse of write_csv; each row gets one sample. Throws std::runtime_error
/// on a missing/mismatched header or malformed row.
std::vector<Measurement> parse_csv(const std::string& text);

/// The baseline measurement: signature `requested` if given, otherwise the
/// all-zero signature. Throws when no successful one is in `ms`.
const Measurement& find_baseline(const std::vector<Measurement>& ms, const std::string& requested = "");

double speedup(const Measurement& baseline, const Measurement& variant);

/// op_count / (1e9 * energy_J).
double gops_per_watt(double op_count, const Measurement& m);

struct TradeoffPoint {
    std::string name;
    std::string signature;
    double time_ms = 0;
    double energy_J = 0;
    bool dominated = false;

    bool operator==(const TradeoffPoint&) const = default;
};

/// Points not dominated (another point <= on both axes, < on one), in input
/// order. Identical points do not dominate each other.
std::vector<TradeoffPoint> pareto_frontier(const std::vector<TradeoffPoint>& points);

/// Successful measurements as points, `dominated` filled in.
std::vector<TradeoffPoint> tradeoff_points(const std::vector<Measurement>& ms);

struct EfficiencyRow {
    std::string name;
    std::string signature;
    double speedup = 0;
    std::optional<double> gops_per_watt;
    double energy_ratio = 0; // baseline energy / variant energy
};

std::vector<EfficiencyRow> efficiency_rows(const std::vector<Measurement>& ms, const Measurement& baseline,
                                           std::optional<double> op_count = std::nullopt);

/// Writes speedup.dat, tradeoff.dat and gops.dat into `dir`.
std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir, const std::vector<Measurement>& ms,
                                                  const std::string& baseline_signature = "",
                                                  std::optional<double> op_count = std::nullopt);

/// Human-readable lines: frontier signatures, speedups, failures.
std::string summarize(const std::vector<Measurement>& ms, const std::string& baseline_signature = "",
                      std::optional<double> op_count = std::nullopt);

} // namespace omp2hmpp
