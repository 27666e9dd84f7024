#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "figchaos/embedding.hpp"
#include "figchaos/neighbors.hpp"
#include "figchaos/stats.hpp"
#include "figchaos/types.hpp"

namespace figchaos
{

/// False-nearest-neighbor fractions per embedding dimension (Kennel test,
/// both criteria).
struct FnnCurve {
    std::vector<std::size_t> dimensions;
    std::vector<double> fractions;
    std::vector<std::size_t> testable;    // pairs entering the fraction
    std::vector<std::size_t> duplicates;  // zero-distance neighbor pairs
    double r_tol = 15.0;
    double a_tol = 2.0;
    double attractor_size = 0.0;
    std::size_t theiler = 0;
};

struct FnnOptions {
    std::size_t m_max = 10;
    double r_tol = 15.0;
    double a_tol = 2.0;
    // Theiler window; defaults to the embedding delay when unset.
    std::optional<std::size_t> theiler;
};

/// For each m in 1..m_max, embeds at (delay, m), finds each point's nearest
/// neighbor, and declares it false when the extra (m+1)-th coordinate either
/// blows up the neighbor distance (|dx| / R_m > r_tol) or carries the pair
/// beyond the attractor scale (R_{m+1} / A > a_tol, A = series stddev).
/// Zero-distance pairs skip the ratio criterion and are tallied separately.
inline FnnCurve fnn_fractions(std::span<const double> series, std::size_t delay,
                              const FnnOptions &options = {})
{
    require(delay >= 1, "embedding delay must be >= 1");
    require(options.m_max >= 1, "m_max must be >= 1");
    require(options.r_tol > 0.0 && options.a_tol > 0.0,
            "tolerances must be positive");
    const std::size_t needed = options.m_max * delay + 1;
    if (series.size() < needed) {
        throw SeriesTooShortError(series.size(), needed);
    }

    FnnCurve curve;
    curve.r_tol = options.r_tol;
    curve.a_tol = options.a_tol;
    curve.theiler = options.theiler.value_or(delay);
    curve.attractor_size = sample_stddev(series);

    for (std::size_t m = 1; m <= options.m_max; ++m) {
        const auto vectors = embed(series, {delay, m});
        const NeighborIndex index(vectors);
        // The false-neighbor test needs series[i + m * delay] for both ends.
        const std::size_t testable_limit = series.size() - m * delay;
        std::size_t false_count = 0, tested = 0, dupes = 0;
        for (std::size_t i = 0; i < testable_limit; ++i) {
            NeighborHit nn;
            try {
                nn = index.nearest(i, curve.theiler);
            } catch (const NoAdmissibleNeighborError &) {
                continue;
            }
            if (nn.id >= testable_limit) {
                continue;  // neighbor has no (m+1)-th coordinate
            }
            ++tested;
            const double extra =
                std::abs(series[i + m * delay] - series[nn.id + m * delay]);
            const double r_m = nn.distance;
            const double r_next =
                std::sqrt(r_m * r_m + extra * extra);
            bool is_false = r_next / curve.attractor_size > curve.a_tol;
            if (r_m > 0.0) {
                is_false = is_false || (extra / r_m > curve.r_tol);
            } else {
                ++dupes;
            }
            if (is_false) {
                ++false_count;
            }
        }
        curve.dimensions.push_back(m);
        curve.fractions.push_back(
            tested > 0 ? static_cast<double>(false_count) /
                             static_cast<double>(tested)
                       : 0.0);
        curve.testable.push_back(tested);
        curve.duplicates.push_back(dupes);
    }
    return curve;
}

inline FnnCurve fnn_fractions(const TimeSeries &series, std::size_t delay,
                              const FnnOptions &options = {})
{
    return fnn_fractions(std::span<const double>(series.values), delay, options);
}

struct MinEmbeddingDim {
    std::size_t dimension = 0;
    bool unfolded = true;  // false: no dimension met the drop threshold
};

/// Smallest m whose false-neighbor fraction is at or below drop_threshold;
/// flagged m_max when the curve never drops.
inline MinEmbeddingDim min_embedding_dim(const FnnCurve &curve,
                                         double drop_threshold = 0.01)
{
    require(!curve.dimensions.empty(), "empty FNN curve");
    for (std::size_t k = 0; k < curve.dimensions.size(); ++k) {
        if (curve.fractions[k] <= drop_threshold) {
            return {curve.dimensions[k], true};
        }
    }
    return {curve.dimensions.back(), false};
}

} // namespace figchaos
