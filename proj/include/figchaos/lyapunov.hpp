#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "figchaos/embedding.hpp"
#include "figchaos/figarch.hpp"
#include "figchaos/neighbors.hpp"
#include "figchaos/rng.hpp"
#include "figchaos/stats.hpp"
#include "figchaos/types.hpp"

namespace figchaos
{

enum class LyapMethod { wolf, kantz, direct_map };

inline const char *to_string(LyapMethod method)
{
    switch (method) {
    case LyapMethod::wolf:
        return "wolf";
    case LyapMethod::kantz:
        return "kantz";
    default:
        return "direct-map";
    }
}

struct WolfDiagnostics {
    std::size_t replacements = 0;   // M in the exponent formula
    std::size_t fallbacks = 0;      // legs where no in-band candidate existed
    std::size_t skipped_legs = 0;   // zero evolved distance, not accumulated
    std::size_t t_evolv = 1;
    bool enough_replacements = true;
};

struct KantzDiagnostics {
    double fit_lo = 0.0, fit_hi = 0.0;
    double r_squared = 0.0;
    std::size_t fit_points = 0;
    std::size_t references = 0;
};

struct MapDiagnostics {
    std::size_t iterations = 0;
    double d0 = 0.0;
    std::size_t floor_hits = 0;  // separations clamped at the resolution floor
};

struct LyapunovEstimate {
    double value = 0.0;  // nats per sample step
    LyapMethod method = LyapMethod::wolf;
    std::variant<WolfDiagnostics, KantzDiagnostics, MapDiagnostics> diagnostics;
};

// ---------------------------------------------------------------------------
// Wolf's trajectory-following estimator
// ---------------------------------------------------------------------------

struct WolfOptions {
    std::size_t t_evolv = 1;        // evolution steps per leg
    double eps_min = 0.0;           // replacement scale bounds (absolute)
    double eps_max = 0.0;
    double theta_max_deg = 30.0;    // orientation-change bound
    std::size_t theiler = 0;
    std::size_t min_replacements = 50;
};

/// Scale bounds as the customary fractions of the attractor size
/// (0.1% .. 10% of the series standard deviation).
inline WolfOptions wolf_defaults(double attractor_size, std::size_t delay)
{
    WolfOptions options;
    options.t_evolv = std::max<std::size_t>(delay, 1);
    options.theiler = delay;
    options.eps_min = 1e-3 * attractor_size;
    options.eps_max = 0.10 * attractor_size;
    return options;
}

/// Wolf et al. fiducial-trajectory estimate: follow a reference orbit,
/// evolve the (reference, neighbor) pair t_evolv steps, accumulate
/// ln(L_evolv / L_0), then replace the neighbor by the closest point inside
/// the scale bounds whose direction stays within theta_max of the evolved
/// separation; fall back to the nearest admissible point when the bounded
/// search comes up empty. Result is sum / (M * t_evolv) in nats per step.
inline LyapunovEstimate wolf_mle(const NeighborIndex &index,
                                 const WolfOptions &options)
{
    const DelayVectors &points = index.points();
    const std::size_t n = points.size();
    require(options.t_evolv >= 1, "t_evolv must be >= 1");
    require(options.eps_min >= 0.0 && options.eps_max > options.eps_min,
            "need 0 <= eps_min < eps_max");
    if (n < options.t_evolv + 2) {
        throw SeriesTooShortError(n, options.t_evolv + 2);
    }
    const std::size_t last_start = n - 1 - options.t_evolv;
    const double cos_max =
        std::cos(options.theta_max_deg * std::numbers::pi / 180.0);

    // Candidate neighbors must themselves be evolvable.
    const auto admissible = [&](std::size_t ref, std::size_t j) {
        return j <= last_start && !detail::excluded(ref, j, options.theiler);
    };

    // Starting pair: first reference with an in-band admissible neighbor.
    std::size_t fiducial = 0;
    std::optional<std::size_t> neighbor;
    for (; fiducial <= last_start; ++fiducial) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_id = 0;
        bool found = false;
        const auto q = points.point(fiducial);
        for (std::size_t j :
             index.neighbors_within(fiducial, options.eps_max, options.theiler)) {
            if (j > last_start) {
                continue;
            }
            const double d = std::sqrt(detail::sq_dist(q, points.point(j)));
            if (d >= options.eps_min && d > 0.0 && d < best) {
                best = d;
                best_id = j;
                found = true;
            }
        }
        if (found) {
            neighbor = best_id;
            break;
        }
    }
    if (!neighbor) {
        throw NoAdmissibleNeighborError(
            "no starting neighbor inside the scale bounds anywhere");
    }

    WolfDiagnostics diag;
    diag.t_evolv = options.t_evolv;
    double sum = 0.0;
    std::size_t i = fiducial;
    std::size_t j = *neighbor;

    while (i <= last_start && j <= last_start) {
        const double l0 =
            std::sqrt(detail::sq_dist(points.point(i), points.point(j)));
        const std::size_t ie = i + options.t_evolv;
        const std::size_t je = j + options.t_evolv;
        const double l1 =
            std::sqrt(detail::sq_dist(points.point(ie), points.point(je)));
        if (l0 > 0.0 && l1 > 0.0) {
            sum += std::log(l1 / l0);
            ++diag.replacements;
        } else {
            ++diag.skipped_legs;
        }
        i = ie;
        if (i > last_start) {
            break;
        }

        // Replacement: closest in-band candidate within the orientation cone
        // around the evolved separation.
        const auto q = points.point(i);
        const std::size_t m = points.dimension();
        std::vector<double> evolved_dir(m);
        for (std::size_t c = 0; c < m; ++c) {
            evolved_dir[c] = points.coord(je, c) - q[c];
        }
        const double evolved_norm = std::sqrt(detail::sq_dist(
            points.point(je), q));

        double best = std::numeric_limits<double>::infinity();
        std::size_t best_id = 0;
        bool found = false;
        for (std::size_t k :
             index.neighbors_within(i, options.eps_max, options.theiler)) {
            if (!admissible(i, k)) {
                continue;
            }
            const double d = std::sqrt(detail::sq_dist(q, points.point(k)));
            if (d < options.eps_min || d == 0.0) {
                continue;
            }
            if (evolved_norm > 0.0) {
                double dot = 0.0;
                for (std::size_t c = 0; c < m; ++c) {
                    dot += evolved_dir[c] * (points.coord(k, c) - q[c]);
                }
                if (dot < cos_max * evolved_norm * d) {
                    continue;
                }
            }
            if (d < best) {
                best = d;
                best_id = k;
                found = true;
            }
        }
        if (!found) {
            // Nearest admissible evolvable point, any scale.
            const auto hit = index.nearest_if(
                q, [&](std::size_t k) { return admissible(i, k); }, 0.0);
            if (!hit) {
                break;
            }
            best_id = hit->id;
            ++diag.fallbacks;
        }
        j = best_id;
    }

    if (diag.replacements == 0) {
        throw NoAdmissibleNeighborError(
            "Wolf estimate impossible: no evolvable neighbor pair");
    }
    diag.enough_replacements = diag.replacements >= options.min_replacements;

    LyapunovEstimate estimate;
    estimate.method = LyapMethod::wolf;
    estimate.value = sum / (static_cast<double>(diag.replacements) *
                            static_cast<double>(options.t_evolv));
    estimate.diagnostics = diag;
    return estimate;
}

// ---------------------------------------------------------------------------
// Kantz's neighborhood-growth curve
// ---------------------------------------------------------------------------

struct KantzOptions {
    double epsilon = 0.0;           // neighborhood radius (absolute)
    std::size_t t_max = 15;
    std::size_t theiler = 0;
    std::size_t min_neighbors = 5;
};

struct KantzCurve {
    EstimatorCurve s;               // S(t) against horizon t = 0..t_max
    std::size_t references = 0;
};

/// S(t) = <ln( mean_{j in Omega_i} |x_{i+h+t} - x_{j+h+t}| )>_i with
/// h = (m-1) * delay: distances are taken between the final embedding
/// coordinates of the evolved vectors. Reference points need at least
/// min_neighbors within epsilon and full evolution room up to t_max, so the
/// pair sets are identical at every horizon.
inline KantzCurve kantz_curve(const NeighborIndex &index,
                              const KantzOptions &options)
{
    const DelayVectors &points = index.points();
    const std::size_t n = points.size();
    require(options.t_max >= 1, "t_max must be >= 1");
    require(options.epsilon > 0.0, "epsilon must be positive");
    if (n < options.t_max + 2) {
        throw SeriesTooShortError(n, options.t_max + 2);
    }
    const std::size_t last = points.dimension() - 1;
    const std::size_t usable = n - options.t_max;  // ids 0..usable-1 evolve

    std::vector<double> sums(options.t_max + 1, 0.0);
    std::vector<std::size_t> counts(options.t_max + 1, 0);
    std::size_t references = 0;

    std::vector<std::size_t> omega;
    for (std::size_t i = 0; i < usable; ++i) {
        omega.clear();
        for (std::size_t j :
             index.neighbors_within(i, options.epsilon, options.theiler)) {
            if (j < usable) {
                omega.push_back(j);
            }
        }
        if (omega.size() < options.min_neighbors) {
            continue;
        }
        ++references;
        for (std::size_t t = 0; t <= options.t_max; ++t) {
            double acc = 0.0;
            for (std::size_t j : omega) {
                acc += std::abs(points.coord(i + t, last) -
                                points.coord(j + t, last));
            }
            const double mean_dist = acc / static_cast<double>(omega.size());
            if (mean_dist > 0.0) {
                sums[t] += std::log(mean_dist);
                ++counts[t];
            }
        }
    }
    if (references == 0) {
        throw NoAdmissibleNeighborError(
            "no reference point has enough neighbors; epsilon too small");
    }

    KantzCurve curve;
    curve.references = references;
    curve.s.x.resize(options.t_max + 1);
    curve.s.y.resize(options.t_max + 1);
    for (std::size_t t = 0; t <= options.t_max; ++t) {
        curve.s.x[t] = static_cast<double>(t);
        curve.s.y[t] = counts[t] > 0
                           ? sums[t] / static_cast<double>(counts[t])
                           : std::numeric_limits<double>::quiet_NaN();
    }
    return curve;
}

/// Least-squares slope of S(t) over horizons in [fit_lo, fit_hi].
inline LyapunovEstimate kantz_mle(const KantzCurve &curve, double fit_lo = 1.0,
                                  double fit_hi = 6.0)
{
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < curve.s.x.size(); ++k) {
        if (curve.s.x[k] >= fit_lo && curve.s.x[k] <= fit_hi &&
            std::isfinite(curve.s.y[k])) {
            xs.push_back(curve.s.x[k]);
            ys.push_back(curve.s.y[k]);
        }
    }
    if (xs.size() < 3) {
        throw std::invalid_argument(
            "degenerate Kantz fit: fewer than 3 usable points in range");
    }
    const auto fit = ols_fit(xs, ys);

    KantzDiagnostics diag;
    diag.fit_lo = fit_lo;
    diag.fit_hi = fit_hi;
    diag.r_squared = fit.r_squared;
    diag.fit_points = fit.points;
    diag.references = curve.references;

    LyapunovEstimate estimate;
    estimate.method = LyapMethod::kantz;
    estimate.value = fit.slope;
    estimate.diagnostics = diag;
    return estimate;
}

// ---------------------------------------------------------------------------
// Direct map-based local exponent (Benettin two-trajectory average)
// ---------------------------------------------------------------------------

/// Separations below d0 * kSeparationFloor are clamped before taking logs;
/// a fully collapsed companion is restarted along the u axis.
constexpr double kSeparationFloor = 1e-12;

struct BenettinResult {
    double exponent = 0.0;
    std::size_t steps = 0;
    std::size_t floor_hits = 0;
};

/// Shared Benettin driver. System must expose:
///   void step();                    advance both trajectories one step
///   double separation() const;      current projected distance
///   void renormalize(double d0);    pull companion back to offset d0
template <typename System>
BenettinResult benettin_average(System &system, double d0, std::size_t n_iter)
{
    require(d0 > 0.0, "perturbation size must be positive");
    require(n_iter >= 1, "need at least one iteration");
    BenettinResult result;
    double sum = 0.0;
    for (std::size_t it = 0; it < n_iter; ++it) {
        system.step();
        double dist = system.separation();
        if (!std::isfinite(dist)) {
            throw DivergenceError("trajectory separation diverged");
        }
        if (dist < d0 * kSeparationFloor) {
            dist = d0 * kSeparationFloor;
            ++result.floor_hits;
        }
        sum += std::log(dist / d0);
        system.renormalize(d0);
    }
    result.steps = n_iter;
    result.exponent = sum / static_cast<double>(n_iter);
    return result;
}

/// Fiducial + companion FIGARCH trajectories driven by one shared innovation
/// stream; the companion is offset by d0 in the (u, sigma) plane and pulled
/// back to that offset after every step.
class FigarchPairSystem {
  public:
    FigarchPairSystem(const FigarchParams &params, const SimConfig &config,
                      double d0)
        : weights_(arch_infinity_weights(params, config.truncation)),
          fiducial_(weights_, weights_.omega_star),
          companion_(weights_, weights_.omega_star), rng_(config.seed),
          ceiling_(config.variance_ceiling)
    {
        for (std::size_t t = 0; t < config.burn_in; ++t) {
            const double z = rng_.normal();
            fiducial_.step(z);
            if (fiducial_.last_variance() > ceiling_) {
                throw DivergenceError("variance ceiling hit during burn-in");
            }
        }
        companion_ = fiducial_;
        const double component = d0 / std::numbers::sqrt2;
        companion_.perturb(component, component);
    }

    void step()
    {
        const double z = rng_.normal();
        fiducial_.step(z);
        companion_.step(z);
        if (fiducial_.last_variance() > ceiling_ ||
            companion_.last_variance() > ceiling_) {
            throw DivergenceError("variance ceiling hit");
        }
    }

    double separation() const
    {
        const double du = companion_.last_u() - fiducial_.last_u();
        const double ds = companion_.last_sigma() - fiducial_.last_sigma();
        return std::sqrt(du * du + ds * ds);
    }

    void renormalize(double d0)
    {
        const double dist = separation();
        if (dist < d0 * kSeparationFloor) {
            companion_ = fiducial_;
            companion_.perturb(d0, 0.0);
            return;
        }
        companion_.contract_toward(fiducial_, d0 / dist);
    }

  private:
    ArchWeights weights_;
    FigarchState fiducial_;
    FigarchState companion_;
    GaussianRng rng_;
    double ceiling_;
};

/// Average one-step log growth of an infinitesimal (u, sigma) offset under
/// the FIGARCH recursion with shared innovations: the deterministic
/// contraction rate of the volatility map.
inline LyapunovEstimate direct_map_lle(const FigarchParams &params,
                                       const SimConfig &config,
                                       double d0 = 1e-8,
                                       std::size_t n_iter = 5000)
{
    require(d0 > 0.0, "perturbation size must be positive");
    require(n_iter >= 1, "n_iter must be >= 1");
    FigarchPairSystem system(params, config, d0);
    const auto result = benettin_average(system, d0, n_iter);

    MapDiagnostics diag;
    diag.iterations = result.steps;
    diag.d0 = d0;
    diag.floor_hits = result.floor_hits;

    LyapunovEstimate estimate;
    estimate.method = LyapMethod::direct_map;
    estimate.value = result.exponent;
    estimate.diagnostics = diag;
    return estimate;
}

} // namespace figchaos
