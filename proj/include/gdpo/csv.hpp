#pragma once

#include <charconv>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "gdpo/enumeration.hpp"
#include "gdpo/simulator.hpp"

namespace gdpo {

/// Shortest round-trip decimal form; the same bits always print the same
/// bytes, which the determinism guarantees lean on.
inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

/// Metrics CSV: step,method,seed,mean_r1..mean_rn,mean_total,
/// groups_filtered,distinct_signatures,entropy
inline void write_metrics_header(std::ostream& out, int reward_dims) {
    out << "step,method,seed";
    for (int k = 1; k <= reward_dims; ++k) out << ",mean_r" << k;
    out << ",mean_total,groups_filtered,distinct_signatures,entropy\n";
}

inline void write_metrics_rows(std::ostream& out, const MetricsLog& log) {
    for (const auto& m : log.steps) {
        out << m.step << ',' << log.method << ',' << log.seed;
        for (double r : m.mean_reward) out << ',' << format_double(r);
        out << ',' << format_double(m.mean_total) << ',' << format_double(m.groups_filtered)
            << ',' << m.distinct_signatures << ',' << format_double(m.entropy) << '\n';
    }
}

/// Summary CSV: step,method,median_total,iqr_lo,iqr_hi
inline void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "step,method,median_total,iqr_lo,iqr_hi\n";
    for (const auto& r : rows)
        out << r.step << ',' << r.method << ',' << format_double(r.median_total) << ','
            << format_double(r.iqr_lo) << ',' << format_double(r.iqr_hi) << '\n';
}

/// Sweep CSV: G,n,method,levels,count — refused cells leave count empty.
inline void write_sweep(std::ostream& out, const SweepResult& result) {
    out << "G,n,method,levels,count\n";
    for (const auto& cell : result.rows) {
        out << cell.rollouts << ',' << cell.rewards << ',' << method_name(cell.method) << ','
            << cell.levels_repr << ',';
        if (cell.count) out << *cell.count;
        out << '\n';
    }
}

}  // namespace gdpo
