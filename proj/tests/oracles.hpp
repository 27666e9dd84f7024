// Independent reference implementations used only by the test suite.
// Everything here is computed by a different route than the library code so
// the two can check each other: closed forms via lgamma, power-series
// arithmetic in extended precision, Jacobian products on generator state, and
// plain O(N^2) scans.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracles
{

// ---------------------------------------------------------------------------
// Fractional-differencing coefficients
// ---------------------------------------------------------------------------

/// Closed-form series coefficients of (1-L)^d: pi_k = Gamma(k-d) /
/// (Gamma(k+1) * Gamma(-d)), evaluated through lgamma so no recurrence is
/// shared with the library implementation.
inline std::vector<double> binomial_pi(double d, std::size_t k_max)
{
    std::vector<double> pi(k_max + 1);
    pi[0] = 1.0;
    if (k_max == 0) {
        return pi;
    }
    // Gamma(-d) is negative for d in (0,1); split magnitude and sign.
    // |Gamma(-d)| = pi / (d * sin(pi d) * Gamma(d)) via the reflection
    // formula Gamma(-d)Gamma(1+d) = -pi / sin(pi d).
    const long double dl = d;
    const long double log_abs_gamma_minus_d =
        std::log(std::numbers::pi_v<long double>) -
        std::log(std::sin(std::numbers::pi_v<long double> * dl)) -
        lgammal(1.0L + dl);
    for (std::size_t k = 1; k <= k_max; ++k) {
        const long double lk = static_cast<long double>(k);
        const long double log_mag =
            lgammal(lk - dl) - lgammal(lk + 1.0L) - log_abs_gamma_minus_d;
        pi[k] = static_cast<double>(-std::exp(log_mag));  // sign of 1/Gamma(-d)
    }
    return pi;
}

/// Partial sums of the pi coefficients; |sum| must shrink toward zero.
inline std::vector<double> binomial_pi_partial_sums(double d, std::size_t k_max)
{
    const auto pi = binomial_pi(d, k_max);
    std::vector<double> sums(pi.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < pi.size(); ++k) {
        acc += pi[k];
        sums[k] = acc;
    }
    return sums;
}

// ---------------------------------------------------------------------------
// ARCH(infinity) weights by direct power-series arithmetic
// ---------------------------------------------------------------------------

/// Coefficients of lambda(L) = 1 - (1 - phi L)(1-L)^d / (1 - beta L) for the
/// (1,d,1) case, computed with long-double series multiplication and
/// geometric-series division rather than the library's long division.
inline std::vector<double> series_lambda(double d, double phi, double beta,
                                         std::size_t k_max)
{
    // a(L) = (1 - phi L)(1-L)^d
    std::vector<long double> pi(k_max + 1);
    {
        const auto dp = binomial_pi(d, k_max);
        for (std::size_t k = 0; k <= k_max; ++k) {
            pi[k] = dp[k];
        }
    }
    std::vector<long double> a(k_max + 1, 0.0L);
    for (std::size_t k = 0; k <= k_max; ++k) {
        a[k] = pi[k];
        if (k >= 1) {
            a[k] -= static_cast<long double>(phi) * pi[k - 1];
        }
    }
    // b(L) = a(L) / (1 - beta L) = a(L) * sum beta^j L^j
    std::vector<long double> b(k_max + 1, 0.0L);
    for (std::size_t k = 0; k <= k_max; ++k) {
        long double acc = 0.0L;
        long double bj = 1.0L;
        for (std::size_t j = 0; j <= k; ++j) {
            acc += a[k - j] * bj;
            bj *= static_cast<long double>(beta);
        }
        b[k] = acc;
    }
    // lambda(L) = 1 - b(L); lambda_0 is dropped (weights start at lag 1).
    std::vector<double> lambda(k_max);
    for (std::size_t k = 1; k <= k_max; ++k) {
        lambda[k - 1] = static_cast<double>(-b[k]);
    }
    return lambda;
}

// ---------------------------------------------------------------------------
// Deterministic test maps
// ---------------------------------------------------------------------------

inline std::vector<double> logistic_series(std::size_t n, double x0 = 0.4)
{
    std::vector<double> out;
    out.reserve(n);
    double x = x0;
    for (int i = 0; i < 100; ++i) {
        x = 4.0 * x * (1.0 - x);
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(x);
        x = 4.0 * x * (1.0 - x);
    }
    return out;
}

/// Exponent of the logistic orbit by direct derivative sums:
/// mean of ln|f'(x)| = ln|4 - 8x| along the given orbit.
inline double logistic_derivative_exponent(const std::vector<double> &orbit)
{
    double sum = 0.0;
    for (double x : orbit) {
        sum += std::log(std::abs(4.0 - 8.0 * x));
    }
    return sum / static_cast<double>(orbit.size());
}

struct HenonState {
    double x = 0.1;
    double y = 0.1;

    void step()
    {
        const double xn = 1.0 - 1.4 * x * x + y;
        y = 0.3 * x;
        x = xn;
    }
};

inline std::vector<double> henon_series(std::size_t n)
{
    HenonState s;
    for (int i = 0; i < 200; ++i) {
        s.step();
    }
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(s.x);
        s.step();
    }
    return out;
}

struct LyapunovPair {
    double largest = 0.0;
    double smallest = 0.0;
};

/// Both exponents of the Henon map by a QR (Gram-Schmidt) product of the
/// Jacobian J(x) = [[-2.8x, 1], [0.3, 0]] along a long orbit.
inline LyapunovPair henon_spectrum(std::size_t n_iter = 200000)
{
    HenonState s;
    for (int i = 0; i < 200; ++i) {
        s.step();
    }
    double q1x = 1.0, q1y = 0.0;
    double q2x = 0.0, q2y = 1.0;
    double sum1 = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n_iter; ++i) {
        const double a = -2.8 * s.x;
        // v = J q for both columns
        const double v1x = a * q1x + q1y, v1y = 0.3 * q1x;
        const double v2x = a * q2x + q2y, v2y = 0.3 * q2x;
        s.step();
        const double r11 = std::hypot(v1x, v1y);
        q1x = v1x / r11;
        q1y = v1y / r11;
        const double proj = v2x * q1x + v2y * q1y;
        const double w2x = v2x - proj * q1x;
        const double w2y = v2y - proj * q1y;
        const double r22 = std::hypot(w2x, w2y);
        q2x = w2x / r22;
        q2y = w2y / r22;
        sum1 += std::log(r11);
        sum2 += std::log(r22);
    }
    return {sum1 / static_cast<double>(n_iter),
            sum2 / static_cast<double>(n_iter)};
}

/// Largest Henon exponent alone (tangent-vector norm growth).
inline double henon_largest_exponent(std::size_t n_iter = 200000)
{
    return henon_spectrum(n_iter).largest;
}

/// Kaplan-Yorke dimension from the two Henon exponents: for a 2-D map with
/// L1 > 0 > L2 and L1 + L2 < 0, D = 1 + L1/|L2|. Close to the correlation
/// dimension for this attractor.
inline double henon_kaplan_yorke_dimension(std::size_t n_iter = 200000)
{
    const auto pair = henon_spectrum(n_iter);
    return 1.0 + pair.largest / std::abs(pair.smallest);
}

// ---------------------------------------------------------------------------
// Random reference series (independent of the library RNG)
// ---------------------------------------------------------------------------

inline std::vector<double> gaussian_iid(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(normal(engine));
    }
    return out;
}

inline std::vector<double> uniform_iid(std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(uniform(engine));
    }
    return out;
}

inline std::vector<double> sine_series(std::size_t n, double samples_per_period)
{
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(
            std::sin(2.0 * std::numbers::pi * static_cast<double>(i) / samples_per_period));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force geometry
// ---------------------------------------------------------------------------

/// Plain O(N^2) scan for the nearest neighbor of `query` among embedded
/// vectors, honoring the temporal exclusion |i-j| <= w. Returns the index, or
/// throws when nothing is admissible.
inline std::size_t brute_nearest(const std::vector<std::vector<double>> &points,
                                 std::size_t query, std::size_t w)
{
    std::size_t best = points.size();
    double best_sq = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) {
        const std::size_t gap = query > j ? query - j : j - query;
        if (gap <= w) {
            continue;
        }
        double sq = 0.0;
        for (std::size_t c = 0; c < points[j].size(); ++c) {
            const double diff = points[query][c] - points[j][c];
            sq += diff * diff;
        }
        if (best == points.size() || sq < best_sq) {
            best = j;
            best_sq = sq;
        }
    }
    if (best == points.size()) {
        throw std::runtime_error("no admissible neighbor");
    }
    return best;
}

/// Brute-force false-nearest-neighbor fraction at one dimension, following
/// the two-criterion test directly on the scalar series: embed at (T, m),
/// find each point's nearest neighbor, then compare the (m+1)-th coordinates.
/// Distance-zero pairs skip the ratio criterion. Returns the fraction over
/// points whose (m+1)-th coordinate exists for both members.
inline double brute_fnn_fraction(const std::vector<double> &series,
                                 std::size_t delay, std::size_t m,
                                 double r_tol, double a_tol, std::size_t w)
{
    const std::size_t span = (m - 1) * delay;
    if (series.size() < span + 1) {
        throw std::runtime_error("series too short");
    }
    const std::size_t count = series.size() - span;
    std::vector<std::vector<double>> points(count);
    for (std::size_t i = 0; i < count; ++i) {
        points[i].resize(m);
        for (std::size_t c = 0; c < m; ++c) {
            points[i][c] = series[i + c * delay];
        }
    }
    double mean = 0.0;
    for (double v : series) {
        mean += v;
    }
    mean /= static_cast<double>(series.size());
    double var = 0.0;
    for (double v : series) {
        var += (v - mean) * (v - mean);
    }
    const double attractor_size =
        std::sqrt(var / static_cast<double>(series.size() - 1));

    std::size_t testable = 0;
    std::size_t false_count = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = brute_nearest(points, i, w);
        if (i + m * delay >= series.size() || j + m * delay >= series.size()) {
            continue;
        }
        double sq = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            const double diff = points[i][c] - points[j][c];
            sq += diff * diff;
        }
        const double r_m = std::sqrt(sq);
        const double extra =
            std::abs(series[i + m * delay] - series[j + m * delay]);
        ++testable;
        bool is_false = false;
        if (r_m > 0.0 && extra / r_m > r_tol) {
            is_false = true;
        }
        if (std::sqrt(sq + extra * extra) / attractor_size > a_tol) {
            is_false = true;
        }
        if (is_false) {
            ++false_count;
        }
    }
    if (testable == 0) {
        throw std::runtime_error("no testable points");
    }
    return static_cast<double>(false_count) / static_cast<double>(testable);
}

}  // namespace oracles
