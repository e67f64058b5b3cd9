#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "gdpo/errors.hpp"

namespace gdpo {

/// Canonical key for an advantage vector: entries rounded to a fixed number
/// of decimal digits and stored as scaled integers, sorted ascending when
/// rollout order is ignored. Two vectors share a signature iff their rounded
/// (sorted) entries are identical.
struct AdvantageSignature {
    std::vector<std::int64_t> scaled;
    int round_digits = 6;

    bool operator==(const AdvantageSignature&) const = default;
    auto operator<=>(const AdvantageSignature&) const = default;

    std::vector<double> to_values() const {
        const double scale = std::pow(10.0, round_digits);
        std::vector<double> out;
        out.reserve(scaled.size());
        for (auto v : scaled) out.push_back(static_cast<double>(v) / scale);
        return out;
    }
};

inline AdvantageSignature make_signature(std::span<const double> advantages, int round_digits = 6,
                                         bool order_insensitive = true) {
    if (round_digits < 0 || round_digits > 12)
        throw InvalidInputError("make_signature: round_digits out of range [0,12]");
    const double scale = std::pow(10.0, round_digits);
    AdvantageSignature sig;
    sig.round_digits = round_digits;
    sig.scaled.reserve(advantages.size());
    for (double v : advantages) {
        if (!std::isfinite(v)) throw InvalidInputError("make_signature: non-finite advantage");
        const double scaled = v * scale;
        if (std::abs(scaled) > 9.0e15)
            throw InvalidInputError("make_signature: advantage too large for signature rounding");
        sig.scaled.push_back(std::llround(scaled));
    }
    if (order_insensitive) std::sort(sig.scaled.begin(), sig.scaled.end());
    return sig;
}

/// Row-wise signature over per-rollout tuples (used by the per-reward-tuple
/// variant): each row is rounded, rows are sorted lexicographically when
/// order-insensitive, then flattened.
inline AdvantageSignature make_row_signature(const std::vector<std::vector<double>>& rows,
                                             int round_digits = 6,
                                             bool order_insensitive = true) {
    std::vector<std::vector<std::int64_t>> scaled_rows;
    scaled_rows.reserve(rows.size());
    for (const auto& row : rows) {
        auto sig = make_signature(row, round_digits, /*order_insensitive=*/false);
        scaled_rows.push_back(std::move(sig.scaled));
    }
    if (order_insensitive) std::sort(scaled_rows.begin(), scaled_rows.end());
    AdvantageSignature out;
    out.round_digits = round_digits;
    for (const auto& row : scaled_rows)
        out.scaled.insert(out.scaled.end(), row.begin(), row.end());
    return out;
}

}  // namespace gdpo
