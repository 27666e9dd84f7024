#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "figchaos/embedding.hpp"
#include "figchaos/neighbors.hpp"
#include "figchaos/rng.hpp"
#include "figchaos/stats.hpp"
#include "figchaos/types.hpp"

namespace figchaos
{

/// Grassberger-Procaccia correlation sum over a radius grid.
struct CorrelationCurve {
    std::vector<double> radii;
    std::vector<double> sums;      // C(eps) in [0, 1]
    std::uint64_t pair_norm = 0;   // admissible unordered pairs
    std::size_t theiler = 0;
};

/// C(eps) = (pairs with |i-j| > w and distance <= eps) / (admissible pairs).
/// Self-pairs are excluded from the normalization; the boundary is inclusive.
inline CorrelationCurve correlation_sum(const NeighborIndex &index,
                                        std::span<const double> radii,
                                        std::size_t theiler)
{
    if (radii.empty()) {
        throw std::invalid_argument("empty radius grid");
    }
    const std::size_t n = index.points().size();
    require(n >= 2, "need at least two points");

    std::uint64_t admissible = 0;
    for (std::size_t i = 0; i + theiler + 1 < n; ++i) {
        admissible += static_cast<std::uint64_t>(n - i - theiler - 1);
    }
    if (admissible == 0) {
        throw std::invalid_argument("Theiler window excludes every pair");
    }

    const auto counts = index.count_pairs_multi(radii, theiler);
    CorrelationCurve curve;
    curve.radii.assign(radii.begin(), radii.end());
    curve.theiler = theiler;
    curve.pair_norm = admissible;
    curve.sums.resize(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) {
        curve.sums[k] = static_cast<double>(counts[k]) /
                        static_cast<double>(admissible);
    }
    return curve;
}

inline CorrelationCurve correlation_sum(const DelayVectors &vectors,
                                        std::span<const double> radii,
                                        std::size_t theiler)
{
    const NeighborIndex index(vectors);
    return correlation_sum(index, radii, theiler);
}

/// Log-spaced radius grid between the 1st and 99th percentile of pairwise
/// distances, estimated from 1000 seeded random pairs.
inline std::vector<double> log_radius_grid(const DelayVectors &vectors,
                                           std::size_t n_radii = 32,
                                           std::size_t theiler = 0,
                                           std::uint64_t seed = 0x9d2c5680)
{
    require(n_radii >= 2, "need at least two radii");
    const std::size_t n = vectors.size();
    require(n >= 2, "need at least two points");
    std::mt19937_64 engine(seed);
    std::vector<double> dist;
    dist.reserve(1000);
    std::size_t attempts = 0;
    while (dist.size() < 1000 && attempts < 100000) {
        ++attempts;
        const auto i = static_cast<std::size_t>(engine() % n);
        const auto j = static_cast<std::size_t>(engine() % n);
        if (detail::excluded(i, j, theiler)) {
            continue;
        }
        const double d2 = detail::sq_dist(vectors.point(i), vectors.point(j));
        if (d2 > 0.0) {
            dist.push_back(std::sqrt(d2));
        }
    }
    if (dist.size() < 2) {
        throw DegenerateSeriesError("point cloud has no distinct pair distances");
    }
    double lo = percentile(dist, 1.0);
    const double hi = percentile(dist, 99.0);
    if (lo <= 0.0) {
        lo = hi * 1e-6;
    }
    std::vector<double> radii(n_radii);
    const double step = std::log(hi / lo) / static_cast<double>(n_radii - 1);
    for (std::size_t k = 0; k < n_radii; ++k) {
        radii[k] = lo * std::exp(step * static_cast<double>(k));
    }
    radii.back() = hi;
    return radii;
}

struct DimensionEstimate {
    double value = 0.0;
    double fit_lo = 0.0, fit_hi = 0.0;  // radius window actually fitted
    double r_squared = 0.0;
    std::size_t fit_points = 0;
    bool stable_window = false;  // a local-slope-stable window was found
    bool converged = false;      // set by dimension_scan across dimensions
};

struct FitPolicy {
    double slope_band = 0.10;     // local slopes within +-10% of window median
    std::size_t min_points = 5;
    // Stable windows must sit below this correlation-sum level: near C = 1
    // the curve always flattens (every pair is already counted), and that
    // saturation shelf would otherwise pass the slope-stability check.
    double max_sum = 0.25;
};

/// Least-squares slope of ln C vs ln eps over the widest contiguous window
/// whose local slopes stay within the policy band around their median.
/// Falls back to fitting every usable point when no stable window exists.
inline DimensionEstimate correlation_dimension(const CorrelationCurve &curve,
                                               const FitPolicy &policy = {})
{
    std::vector<double> lx, ly;
    std::size_t below_cap = 0;  // sums are cumulative, so this is a prefix
    for (std::size_t k = 0; k < curve.radii.size(); ++k) {
        if (curve.sums[k] > 0.0) {
            lx.push_back(std::log(curve.radii[k]));
            ly.push_back(std::log(curve.sums[k]));
            if (curve.sums[k] <= policy.max_sum) {
                below_cap = lx.size();
            }
        }
    }
    if (lx.size() < 3) {
        throw InsufficientScalingRegionError(
            "fewer than 3 radii with positive correlation sum");
    }

    const std::size_t n = lx.size();
    std::vector<double> slope(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        slope[k] = (ly[k + 1] - ly[k]) / (lx[k + 1] - lx[k]);
    }

    // Widest [a, b] (point indices, inclusive) below the saturation cap
    // whose slopes sit inside the band; ties resolve toward small radii
    // where the power law lives.
    std::size_t best_a = 0, best_b = 0;
    bool found = false;
    const std::size_t min_pts = std::max<std::size_t>(policy.min_points, 2);
    for (std::size_t a = 0; a + min_pts - 1 < below_cap; ++a) {
        for (std::size_t b = below_cap - 1; b >= a + min_pts - 1; --b) {
            std::vector<double> w(slope.begin() + static_cast<std::ptrdiff_t>(a),
                                  slope.begin() + static_cast<std::ptrdiff_t>(b));
            std::sort(w.begin(), w.end());
            const double med = w[w.size() / 2];
            const double tol = policy.slope_band * std::abs(med);
            bool ok = true;
            for (double s : w) {
                if (std::abs(s - med) > tol) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                if (!found || (b - a) > (best_b - best_a)) {
                    best_a = a;
                    best_b = b;
                    found = true;
                }
                break;  // widest window for this start index
            }
        }
    }

    DimensionEstimate est;
    est.stable_window = found;
    if (!found) {
        best_a = 0;
        best_b = n - 1;
    }
    const auto fit = ols_fit(
        std::span<const double>(lx).subspan(best_a, best_b - best_a + 1),
        std::span<const double>(ly).subspan(best_a, best_b - best_a + 1));
    est.value = fit.slope;
    est.r_squared = fit.r_squared;
    est.fit_points = fit.points;
    est.fit_lo = std::exp(lx[best_a]);
    est.fit_hi = std::exp(lx[best_b]);
    return est;
}

/// Grid of correlation-dimension estimates over (delay, dimension) cells.
/// Failed cells carry an error message and the scan continues.
struct DimensionScan {
    std::vector<std::size_t> delays;
    std::vector<std::size_t> dimensions;
    // Row-major: cell(i, j) = estimate at (delays[i], dimensions[j]).
    std::vector<std::optional<DimensionEstimate>> estimates;
    std::vector<std::string> errors;
    std::vector<bool> plateau;  // per delay: estimates settle as m grows
    double plateau_tol = 0.2;

    const std::optional<DimensionEstimate> &cell(std::size_t i,
                                                 std::size_t j) const
    {
        return estimates[i * dimensions.size() + j];
    }
};

struct ScanOptions {
    std::size_t n_radii = 32;
    std::size_t theiler = 0;
    double plateau_tol = 0.2;
    FitPolicy fit;
};

inline DimensionScan dimension_scan(std::span<const double> series,
                                    std::span<const std::size_t> delays,
                                    std::span<const std::size_t> dimensions,
                                    const ScanOptions &options = {})
{
    require(!delays.empty() && !dimensions.empty(), "empty scan grid");
    DimensionScan scan;
    scan.delays.assign(delays.begin(), delays.end());
    scan.dimensions.assign(dimensions.begin(), dimensions.end());
    scan.estimates.resize(delays.size() * dimensions.size());
    scan.errors.resize(delays.size() * dimensions.size());
    scan.plateau_tol = options.plateau_tol;

    for (std::size_t i = 0; i < delays.size(); ++i) {
        for (std::size_t j = 0; j < dimensions.size(); ++j) {
            const std::size_t cell = i * dimensions.size() + j;
            try {
                const auto vectors =
                    embed(series, {delays[i], dimensions[j]});
                const NeighborIndex index(vectors);
                const auto radii = log_radius_grid(vectors, options.n_radii,
                                                   options.theiler);
                const auto curve =
                    correlation_sum(index, radii, options.theiler);
                scan.estimates[cell] =
                    correlation_dimension(curve, options.fit);
            } catch (const std::exception &e) {
                scan.errors[cell] = e.what();
            }
        }
    }

    // A delay row counts as plateaued when the last two successive
    // differences across m stay below plateau_tol. Cells whose fit fell
    // back to the whole curve (no stable scaling window) carry no evidence
    // of convergence, so they break the plateau like errors do.
    scan.plateau.resize(delays.size());
    for (std::size_t i = 0; i < delays.size(); ++i) {
        std::vector<double> values;
        for (std::size_t j = 0; j < dimensions.size(); ++j) {
            const auto &est = scan.cell(i, j);
            if (!est || !est->stable_window) {
                values.clear();  // gaps break the plateau
                continue;
            }
            values.push_back(est->value);
        }
        bool settled = values.size() >= 3;
        if (settled) {
            const std::size_t k = values.size();
            settled = std::abs(values[k - 1] - values[k - 2]) <
                          options.plateau_tol &&
                      std::abs(values[k - 2] - values[k - 3]) <
                          options.plateau_tol;
        }
        scan.plateau[i] = settled;
        if (settled) {
            for (std::size_t j = 0; j < dimensions.size(); ++j) {
                auto &est = scan.estimates[i * dimensions.size() + j];
                if (est) {
                    est->converged = true;
                }
            }
        }
    }
    return scan;
}

} // namespace figchaos
