#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "gdpo/errors.hpp"

namespace gdpo {

enum class StdMode { sample, population };

/// Neumaier-compensated sum. Summation-order differences stay below the
/// tolerances the estimators promise, so parallel chunked reductions that
/// feed partial sums through this accumulator remain safe.
class CompensatedSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
    CompensatedSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

inline double mean(std::span<const double> values) {
    if (values.empty()) throw InvalidInputError("mean: empty input");
    return compensated_sum(values) / static_cast<double>(values.size());
}

/// Two-pass standard deviation. Sample mode divides squared deviations by
/// (N-1); population mode by N. A single sample has zero spread by
/// convention, matching the zero-std policy of the estimators.
inline double std_dev(std::span<const double> values, StdMode mode) {
    const std::size_t n = values.size();
    if (n == 0) throw InvalidInputError("std_dev: empty input");
    if (n == 1) return 0.0;
    const double m = mean(values);
    CompensatedSum sq;
    for (double v : values) {
        const double d = v - m;
        sq.add(d * d);
    }
    const double divisor =
        mode == StdMode::sample ? static_cast<double>(n - 1) : static_cast<double>(n);
    return std::sqrt(sq.value() / divisor);
}

inline bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(),
                       [](double v) { return std::isfinite(v); });
}

struct MeanStd {
    double mean;
    double std;
};

/// Mean and std computed on a sorted copy of the input. Sorting pins the
/// accumulation order, so the result depends only on the multiset of
/// values — permuting rollouts leaves every statistic bit-identical.
inline MeanStd order_independent_mean_std(std::span<const double> values, StdMode mode) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return MeanStd{mean(sorted), std_dev(sorted, mode)};
}

inline double order_independent_mean(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return mean(sorted);
}

/// Linear-interpolation quantile (the numpy default). `p` in [0, 1].
inline double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw InvalidInputError("quantile: empty input");
    if (p < 0.0 || p > 1.0) throw InvalidInputError("quantile: p outside [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

inline double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

}  // namespace gdpo
