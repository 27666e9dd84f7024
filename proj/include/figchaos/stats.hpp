#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "figchaos/types.hpp"

namespace figchaos
{

inline double mean(std::span<const double> xs)
{
    require(!xs.empty(), "mean of empty range");
    double s = 0.0;
    for (double x : xs) {
        s += x;
    }
    return s / static_cast<double>(xs.size());
}

/// Unbiased sample variance (n - 1 denominator).
inline double sample_variance(std::span<const double> xs)
{
    require(xs.size() >= 2, "variance needs at least two samples");
    const double m = mean(xs);
    double s = 0.0;
    for (double x : xs) {
        s += (x - m) * (x - m);
    }
    return s / static_cast<double>(xs.size() - 1);
}

inline double sample_stddev(std::span<const double> xs)
{
    return std::sqrt(sample_variance(xs));
}

/// Linearly interpolated percentile, p in [0, 100]. Sorts a copy.
inline double percentile(std::vector<double> xs, double p)
{
    require(!xs.empty(), "percentile of empty range");
    require(p >= 0.0 && p <= 100.0, "percentile out of [0, 100]");
    std::sort(xs.begin(), xs.end());
    const double pos = p / 100.0 * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= xs.size()) {
        return xs.back();
    }
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] + frac * (xs[lo + 1] - xs[lo]);
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t points = 0;
};

/// Ordinary least squares y = a + b x.
inline LineFit ols_fit(std::span<const double> x, std::span<const double> y)
{
    require(x.size() == y.size(), "ols_fit size mismatch");
    require(x.size() >= 2, "ols_fit needs at least two points");
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) {
        throw std::invalid_argument("ols_fit: degenerate fit, zero x variance");
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.points = x.size();
    // syy == 0 means a perfectly horizontal line; the fit is exact.
    fit.r_squared = (syy == 0.0) ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

} // namespace figchaos
