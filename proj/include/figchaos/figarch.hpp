#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "figchaos/rng.hpp"
#include "figchaos/types.hpp"

namespace figchaos
{

/// FIGARCH(p, d, q) parameter set. The lag polynomials follow the
/// Baillie-Bollerslev-Mikkelsen convention phi(L) = 1 - sum phi_k L^k,
/// beta(L) = sum beta_j L^j, so that the conditional variance is
///   sigma_t^2 = omega / (1 - beta(1)) + lambda(L) u_t^2,
///   lambda(L) = 1 - [1 - beta(L)]^{-1} phi(L) (1 - L)^d.
struct FigarchParams {
    int p = 0;
    int q = 0;
    double d = 0.0;
    double omega = 1.0;
    std::vector<double> phi;   // phi_1 .. phi_p
    std::vector<double> beta;  // beta_1 .. beta_q
};

struct SimConfig {
    std::size_t n_points = 4096;
    std::size_t burn_in = 2000;
    std::size_t truncation = 1000;  // ARCH(inf) lags retained
    std::uint64_t seed = 0;
    double variance_ceiling = 1e12;
};

namespace detail
{
constexpr double kNonNegTol = 1e-12;
constexpr double kUnitRootTol = 1e-12;

inline void validate(const FigarchParams &params)
{
    require(params.p >= 0 && params.q >= 0, "FIGARCH orders must be >= 0");
    require(params.phi.size() == static_cast<std::size_t>(params.p),
            "phi must hold exactly p coefficients");
    require(params.beta.size() == static_cast<std::size_t>(params.q),
            "beta must hold exactly q coefficients");
    require(params.omega > 0.0, "omega must be positive");
    require(params.d >= 0.0 && params.d <= 1.0, "d must lie in [0, 1]");
}

inline void validate(const SimConfig &config)
{
    require(config.n_points >= 1, "n_points must be >= 1");
    require(config.truncation >= 1, "truncation must be >= 1");
    require(config.variance_ceiling > 0.0, "variance ceiling must be positive");
}
} // namespace detail

/// Series expansion coefficients pi_0..pi_n of (1 - L)^d:
/// pi_0 = 1, pi_k = pi_{k-1} (k - 1 - d) / k.
inline std::vector<double> frac_diff_coeffs(double d, std::size_t n)
{
    require(d >= 0.0 && d <= 1.0, "d must lie in [0, 1]");
    std::vector<double> pi(n + 1);
    pi[0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k) {
        pi[k] = pi[k - 1] * (static_cast<double>(k) - 1.0 - d) /
                static_cast<double>(k);
    }
    return pi;
}

/// Truncated ARCH(inf) representation: lag weights lambda_1..lambda_K and
/// the level omega* = omega / (1 - sum beta_j).
struct ArchWeights {
    std::vector<double> lambda;  // lambda[k-1] holds lambda_k
    double omega_star = 0.0;
};

/// Expands lambda(L) by dividing [1 - beta(L)] - phi(L)(1 - L)^d by
/// [1 - beta(L)], truncated after `truncation` lags. Rejects weight sets
/// with lambda_k < -1e-12 instead of clamping them.
inline ArchWeights arch_infinity_weights(const FigarchParams &params,
                                         std::size_t truncation)
{
    detail::validate(params);
    require(truncation >= 1, "truncation must be >= 1");

    double beta_sum = 0.0;
    for (double b : params.beta) {
        beta_sum += b;
    }
    if (std::abs(1.0 - beta_sum) < detail::kUnitRootTol) {
        throw std::invalid_argument(
            "beta polynomial has a unit root: 1 - sum(beta) == 0");
    }

    const std::size_t K = truncation;
    const auto pi = frac_diff_coeffs(params.d, K);

    // Numerator n_k of [1 - beta(L)] - phi(L)(1 - L)^d with
    // phi(L) = 1 - sum phi_k L^k; n_0 vanishes identically.
    std::vector<double> numer(K + 1, 0.0);
    for (std::size_t k = 1; k <= K; ++k) {
        double conv = pi[k];  // phi_0 * pi_k with phi_0 = 1
        const auto pmax = std::min<std::size_t>(k, params.phi.size());
        for (std::size_t i = 1; i <= pmax; ++i) {
            conv -= params.phi[i - 1] * pi[k - i];
        }
        double nk = -conv;
        if (k <= params.beta.size()) {
            nk -= params.beta[k - 1];
        }
        numer[k] = nk;
    }

    // Long division by 1 - beta(L): lambda_k = n_k + sum beta_j lambda_{k-j}.
    ArchWeights out;
    out.lambda.assign(K, 0.0);
    for (std::size_t k = 1; k <= K; ++k) {
        double lk = numer[k];
        const auto jmax = std::min<std::size_t>(k - 1, params.beta.size());
        for (std::size_t j = 1; j <= jmax; ++j) {
            lk += params.beta[j - 1] * out.lambda[k - j - 1];
        }
        out.lambda[k - 1] = lk;
    }

    for (std::size_t k = 1; k <= K; ++k) {
        const double lk = out.lambda[k - 1];
        if (!std::isfinite(lk) || lk < -detail::kNonNegTol) {
            throw NonNegativityError(k, lk);
        }
    }

    out.omega_star = params.omega / (1.0 - beta_sum);
    return out;
}

/// One FIGARCH trajectory: a rolling window of the last K innovations and
/// the recursion sigma_t^2 = omega* + sum lambda_k u_{t-k}^2, u_t = sigma_t z_t.
/// Kept as a standalone stepper so the direct-map Lyapunov estimator can
/// evolve two coupled copies against a shared innovation stream.
class FigarchState {
  public:
    FigarchState(const ArchWeights &weights, double presample_u_squared)
        : lambda_(weights.lambda), omega_star_(weights.omega_star),
          window_(weights.lambda.size(),
                  std::sqrt(std::max(presample_u_squared, 0.0))),
          head_(0)
    {
    }

    /// Advances one step with innovation z; returns u_t.
    double step(double z)
    {
        double var = omega_star_;
        const std::size_t K = lambda_.size();
        // window_[head_-1] is u_{t-1}; walk back through the lags in order.
        std::size_t idx = head_;
        for (std::size_t k = 0; k < K; ++k) {
            idx = (idx == 0) ? K - 1 : idx - 1;
            const double u = window_[idx];
            var += lambda_[k] * (u * u);
        }
        last_sigma_ = std::sqrt(var);
        last_var_ = var;
        last_u_ = last_sigma_ * z;
        window_[head_] = last_u_;
        head_ = (head_ + 1) % K;
        return last_u_;
    }

    double last_u() const { return last_u_; }
    double last_sigma() const { return last_sigma_; }
    double last_variance() const { return last_var_; }
    double omega_star() const { return omega_star_; }

    /// Benettin contraction of the current (u, sigma) offset toward
    /// `reference`: the newest innovation and the reported sigma move to
    /// reference + alpha * offset. Older lags keep the values they were
    /// contracted to at their own steps, so each trajectory carries its own
    /// history. Both states must share one weight vector and step count.
    void contract_toward(const FigarchState &reference, double alpha)
    {
        const std::size_t last = (head_ == 0) ? window_.size() - 1 : head_ - 1;
        window_[last] = reference.window_[last] +
                        alpha * (window_[last] - reference.window_[last]);
        last_u_ = window_[last];
        last_sigma_ =
            reference.last_sigma_ + alpha * (last_sigma_ - reference.last_sigma_);
    }

    /// Displaces the most recent innovation and the reported sigma; used to
    /// seed the companion trajectory of the direct-map estimator.
    void perturb(double du, double dsigma)
    {
        const std::size_t last = (head_ == 0) ? window_.size() - 1 : head_ - 1;
        window_[last] += du;
        last_u_ += du;
        last_sigma_ += dsigma;
    }

  private:
    std::vector<double> lambda_;
    double omega_star_;
    std::vector<double> window_;  // u_{t-K}..u_{t-1}, ring buffer
    std::size_t head_;
    double last_u_ = 0.0;
    double last_sigma_ = 0.0;
    double last_var_ = 0.0;
};

/// Simulates a FIGARCH path with standard normal innovations. Pre-sample
/// squared innovations start at omega*, `burn_in` samples are discarded,
/// and identical (params, config) reproduce the path bit for bit.
inline TimeSeries simulate(const FigarchParams &params, const SimConfig &config)
{
    detail::validate(config);
    const ArchWeights weights = arch_infinity_weights(params, config.truncation);

    FigarchState state(weights, weights.omega_star);
    GaussianRng rng(config.seed);

    TimeSeries out;
    out.values.reserve(config.n_points);
    out.volatility.reserve(config.n_points);

    const std::size_t total = config.burn_in + config.n_points;
    for (std::size_t t = 0; t < total; ++t) {
        state.step(rng.normal());
        if (state.last_variance() > config.variance_ceiling ||
            !std::isfinite(state.last_variance())) {
            throw DivergenceError("sigma^2 = " +
                                  std::to_string(state.last_variance()) +
                                  " exceeded the divergence ceiling at step " +
                                  std::to_string(t));
        }
        if (t >= config.burn_in) {
            out.values.push_back(state.last_u());
            out.volatility.push_back(state.last_sigma());
        }
    }
    return out;
}

} // namespace figchaos
