#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "figchaos/types.hpp"

namespace figchaos
{

/// Average mutual information I(T) in bits for T = 0..max_lag, estimated
/// from an equal-width 2-D histogram of (s(n), s(n+T)) pairs.
struct MiCurve {
    std::vector<std::size_t> lags;
    std::vector<double> bits;
    std::size_t bins = 0;
};

namespace detail
{

/// Bin index from the scale-free ratio (x - lo) / (hi - lo); the ratio form
/// keeps binning invariant under exact power-of-two rescaling of the data.
inline std::size_t bin_of(double x, double lo, double hi, std::size_t bins)
{
    const double r = (x - lo) / (hi - lo);
    auto b = static_cast<std::size_t>(r * static_cast<double>(bins));
    return std::min(b, bins - 1);
}

inline double mi_at_lag(std::span<const double> xs, std::size_t lag, double lo,
                        double hi, std::size_t bins)
{
    const std::size_t n = xs.size() - lag;
    std::vector<std::uint32_t> joint(bins * bins, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = bin_of(xs[i], lo, hi, bins);
        const std::size_t b = bin_of(xs[i + lag], lo, hi, bins);
        ++joint[a * bins + b];
    }
    // Marginals from the joint's own row/column sums, so the plug-in
    // estimate is non-negative by construction.
    std::vector<double> row(bins, 0.0), col(bins, 0.0);
    for (std::size_t a = 0; a < bins; ++a) {
        for (std::size_t b = 0; b < bins; ++b) {
            const double c = joint[a * bins + b];
            row[a] += c;
            col[b] += c;
        }
    }
    const auto total = static_cast<double>(n);
    double bits = 0.0;
    for (std::size_t a = 0; a < bins; ++a) {
        for (std::size_t b = 0; b < bins; ++b) {
            const double c = joint[a * bins + b];
            if (c > 0.0) {
                bits += (c / total) * std::log2(c * total / (row[a] * col[b]));
            }
        }
    }
    return bits;
}

} // namespace detail

inline MiCurve mi_curve(std::span<const double> series, std::size_t max_lag,
                        std::size_t bins = 64)
{
    require(bins >= 2, "need at least two histogram bins");
    require(series.size() > max_lag + 1, "series length must exceed max_lag + 1");
    const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) {
        throw DegenerateSeriesError("constant series has zero-width bins");
    }
    MiCurve curve;
    curve.bins = bins;
    curve.lags.resize(max_lag + 1);
    curve.bits.resize(max_lag + 1);
    for (std::size_t lag = 0; lag <= max_lag; ++lag) {
        curve.lags[lag] = lag;
        curve.bits[lag] = detail::mi_at_lag(series, lag, lo, hi, bins);
    }
    return curve;
}

inline MiCurve mi_curve(const TimeSeries &series, std::size_t max_lag,
                        std::size_t bins = 64)
{
    return mi_curve(std::span<const double>(series.values), max_lag, bins);
}

struct FirstMinimum {
    std::size_t lag = 0;
    bool clear = true;  // false: no interior minimum, lag is the global min
};

/// Smallest T >= 1 with I(T-1) > I(T) <= I(T+1); falls back to the global
/// minimum (flagged) when the curve has no interior dip.
inline FirstMinimum first_minimum(const MiCurve &curve)
{
    require(curve.bits.size() >= 3, "need at least three lags");
    for (std::size_t t = 1; t + 1 < curve.bits.size(); ++t) {
        if (curve.bits[t - 1] > curve.bits[t] &&
            curve.bits[t] <= curve.bits[t + 1]) {
            return {curve.lags[t], true};
        }
    }
    std::size_t best = 1;
    for (std::size_t t = 2; t < curve.bits.size(); ++t) {
        if (curve.bits[t] < curve.bits[best]) {
            best = t;
        }
    }
    return {curve.lags[best], false};
}

} // namespace figchaos
