#include "omp2hmpp/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace omp2hmpp {

std::string format_number(double v)
{
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value in report");
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("number formatting failed");
    std::string s(buf, end);
    if (s == "-0") s = "0";
    return s;
}

namespace {

bool all_zero_signature(const std::string& sig)
{
    bool digit = false;
    for (char c : sig) {
        if (c >= '1' && c <= '9') return false;
        if (c == '0') digit = true;
    }
    return digit;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string r = "\"";
    for (char c : s) {
        if (c == '"') r += '"';
        r += c;
    }
    return r + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, int lineno)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw std::runtime_error("csv line " + std::to_string(lineno) + ": unterminated quote");
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, int lineno)
{
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw std::runtime_error("csv line " + std::to_string(lineno) + ": bad number '" + s + "'");
    return v;
}

// dat files are whitespace separated; names and signatures lose their spaces
std::string token(std::string s)
{
    s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
    std::replace(s.begin(), s.end(), '\t', '_');
    return s.empty() ? "-" : s;
}

std::vector<Measurement> successful(const std::vector<Measurement>& ms)
{
    std::vector<Measurement> out;
    for (const auto& m : ms)
        if (!m.failure) out.push_back(m);
    return out;
}

} // namespace

std::string write_csv(std::vector<Measurement> ms, const std::string& baseline_signature)
{
    if (ms.empty()) throw std::invalid_argument("write_csv: no measurements");
    auto is_base = [&](const Measurement& m) {
        return baseline_signature.empty() ? all_zero_signature(m.signature) : m.signature == baseline_signature;
    };
    auto rank = [&](const Measurement& m) { return m.failure ? 2 : is_base(m) ? 0 : 1; };
    std::stable_sort(ms.begin(), ms.end(), [&](const Measurement& a, const Measurement& b) {
        if (rank(a) != rank(b)) return rank(a) < rank(b);
        if (rank(a) == 1) return a.time_ms < b.time_ms;
        return false;
    });
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& m : ms) {
        out += csv_field(m.name) + "," + "\"" + m.signature + "\",";
        if (m.failure)
            out += ",," + csv_field(*m.failure);
        else
            out += format_number(m.time_ms) + "," + format_number(m.energy_J);
        out += "\n";
    }
    return out;
}

std::vector<Measurement> parse_csv(const std::string& text)
{
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw std::runtime_error("csv: header must be '" + std::string(kCsvHeader) + "'");
    std::vector<Measurement> out;
    int n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = split_csv_line(line, n);
        if (f.size() != 4 && f.size() != 5)
            throw std::runtime_error("csv line " + std::to_string(n) + ": expected 4 or 5 fields");
        Measurement m;
        m.name = f[0];
        m.signature = f[1];
        if (f.size() == 5) {
            if (!f[2].empty() || !f[3].empty())
                throw std::runtime_error("csv line " + std::to_string(n) + ": failed row carries values");
            m.failure = f[4];
        } else {
            m.time_ms = parse_number(f[2], n);
            m.energy_J = parse_number(f[3], n);
            m.samples.push_back({m.time_ms, m.energy_J});
        }
        out.push_back(std::move(m));
    }
    return out;
}

const Measurement& find_baseline(const std::vector<Measurement>& ms, const std::string& requested)
{
    for (const auto& m : ms) {
        if (m.failure) continue;
        if (requested.empty() ? all_zero_signature(m.signature) : m.signature == requested) return m;
    }
    throw std::runtime_error("no successful baseline measurement with signature '" +
                             (requested.empty() ? std::string("0, 0, 0") : requested) + "'");
}

double speedup(const Measurement& baseline, const Measurement& variant)
{
    if (!(variant.time_ms > 0)) throw std::invalid_argument("speedup: variant time must be > 0");
    return baseline.time_ms / variant.time_ms;
}

double gops_per_watt(double op_count, const Measurement& m)
{
    if (!(op_count > 0) || !(m.time_ms > 0) || !(m.energy_J > 0))
        throw std::invalid_argument("gops_per_watt: operation count, time and energy must be > 0");
    double seconds = m.time_ms / 1000.0;
    double gops = op_count / seconds / 1e9;
    double watts = m.energy_J / seconds;
    return gops / watts;
}

std::vector<TradeoffPoint> pareto_frontier(const std::vector<TradeoffPoint>& points)
{
    std::vector<TradeoffPoint> out;
    // sweep in (time, energy) order; a point survives when its energy beats
    // every strictly better-or-equal predecessor
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (points[a].time_ms != points[b].time_ms) return points[a].time_ms < points[b].time_ms;
        return points[a].energy_J < points[b].energy_J;
    });
    std::vector<bool> keep(points.size(), false);
    double best_energy = INFINITY;
    for (std::size_t k = 0; k < order.size();) {
        // group of equal time
        std::size_t e = k;
        while (e < order.size() && points[order[e]].time_ms == points[order[k]].time_ms) ++e;
        double group_min = points[order[k]].energy_J;
        for (std::size_t j = k; j < e; ++j) {
            double en = points[order[j]].energy_J;
            keep[order[j]] = en == group_min && en < best_energy;
        }
        best_energy = std::min(best_energy, group_min);
        k = e;
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!keep[i]) continue;
        auto p = points[i];
        p.dominated = false;
        out.push_back(p);
    }
    return out;
}

std::vector<TradeoffPoint> tradeoff_points(const std::vector<Measurement>& ms)
{
    std::vector<TradeoffPoint> pts;
    for (const auto& m : successful(ms)) pts.push_back({m.name, m.signature, m.time_ms, m.energy_J, false});
    auto front = pareto_frontier(pts);
    for (auto& p : pts) p.dominated = std::find(front.begin(), front.end(), p) == front.end();
    return pts;
}

std::vector<EfficiencyRow> efficiency_rows(const std::vector<Measurement>& ms, const Measurement& baseline,
                                           std::optional<double> op_count)
{
    std::vector<EfficiencyRow> rows;
    for (const auto& m : successful(ms)) {
        EfficiencyRow r;
        r.name = m.name;
        r.signature = m.signature;
        r.speedup = speedup(baseline, m);
        r.energy_ratio = m.energy_J > 0 ? baseline.energy_J / m.energy_J : INFINITY;
        if (op_count) r.gops_per_watt = gops_per_watt(*op_count, m);
        rows.push_back(r);
    }
    return rows;
}

std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& dir, const std::vector<Measurement>& ms,
                                                  const std::string& baseline_signature, std::optional<double> op_count)
{
    if (ms.empty()) throw std::invalid_argument("emit_plot_data: no measurements");
    const Measurement& base = find_baseline(ms, baseline_signature);
    auto rows = efficiency_rows(ms, base, op_count);
    auto pts = tradeoff_points(ms);
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto open = [&](const std::string& name) {
        written.push_back(dir / name);
        std::ofstream f(written.back());
        if (!f) throw std::runtime_error("cannot write " + written.back().string());
        return f;
    };
    {
        auto f = open("speedup.dat");
        f << "# index name signature speedup (baseline " << token(base.signature) << ")\n";
        for (std::size_t i = 0; i < rows.size(); ++i)
            f << i << " " << token(rows[i].name) << " " << token(rows[i].signature) << " "
              << format_number(rows[i].speedup) << "\n";
    }
    {
        auto f = open("tradeoff.dat");
        f << "# index name signature time_ms energy_J frontier\n";
        for (std::size_t i = 0; i < pts.size(); ++i)
            f << i << " " << token(pts[i].name) << " " << token(pts[i].signature) << " " << format_number(pts[i].time_ms)
              << " " << format_number(pts[i].energy_J) << " " << (pts[i].dominated ? 0 : 1) << "\n";
    }
    {
        auto f = open("gops.dat");
        if (!op_count) {
            f << "# index name signature gops_per_watt (no operation count given)\n";
        } else {
            f << "# index name signature gops_per_watt (ops " << format_number(*op_count) << ")\n";
            for (std::size_t i = 0; i < rows.size(); ++i)
                f << i << " " << token(rows[i].name) << " " << token(rows[i].signature) << " "
                  << format_number(*rows[i].gops_per_watt) << "\n";
        }
    }
    return written;
}

std::string summarize(const std::vector<Measurement>& ms, const std::string& baseline_signature,
                      std::optional<double> op_count)
{
    const Measurement& base = find_baseline(ms, baseline_signature);
    std::ostringstream out;
    auto front = pareto_frontier(tradeoff_points(ms));
    out << "pareto:";
    for (std::size_t i = 0; i < front.size(); ++i)
        out << (i ? "; " : " ") << front[i].signature << " (" << format_number(front[i].time_ms) << " ms, "
            << format_number(front[i].energy_J) << " J)";
    out << "\n";
    auto rows = efficiency_rows(ms, base, op_count);
    char buf[64];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.2f", r.speedup);
        out << "speedup " << buf;
        std::snprintf(buf, sizeof buf, "%.2f", r.energy_ratio);
        out << " energy_ratio " << buf;
        if (r.gops_per_watt) {
            std::snprintf(buf, sizeof buf, "%.4g", *r.gops_per_watt);
            out << " gops_per_watt " << buf;
        }
        out << "  " << r.signature << "  " << r.name << "\n";
    }
    for (const auto& m : ms)
        if (m.failure) out << "failed " << m.signature << "  " << m.name << ": " << *m.failure << "\n";
    return out.str();
}

} // namespace omp2hmpp
