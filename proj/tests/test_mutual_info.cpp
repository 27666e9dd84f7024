#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <figchaos/mutual_info.hpp>

#include "oracles.hpp"

namespace
{

figchaos::MiCurve curve_of(std::vector<double> bits)
{
    figchaos::MiCurve curve;
    curve.bits = std::move(bits);
    curve.lags.resize(curve.bits.size());
    std::iota(curve.lags.begin(), curve.lags.end(), std::size_t{0});
    curve.bins = 16;
    return curve;
}

// Independent plug-in entropy of the series under the same equal-width
// binning rule the histogram estimator uses.
double marginal_entropy_bits(const std::vector<double> &xs, std::size_t bins)
{
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    std::vector<double> counts(bins, 0.0);
    for (double x : xs) {
        const double r = (x - *lo_it) / (*hi_it - *lo_it);
        auto b = static_cast<std::size_t>(r * static_cast<double>(bins));
        counts[std::min(b, bins - 1)] += 1.0;
    }
    const double total = static_cast<double>(xs.size());
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) {
            h -= (c / total) * std::log2(c / total);
        }
    }
    return h;
}

}  // namespace

TEST(MiCurve, LagZeroEqualsMarginalEntropy)
{
    const auto xs = oracles::gaussian_iid(8192, 21);
    const auto curve = figchaos::mi_curve(xs, 4, 32);
    EXPECT_NEAR(curve.bits[0], marginal_entropy_bits(xs, 32), 1e-12);
}

TEST(MiCurve, IndependentSamplesCarryAlmostNoInformation)
{
    const auto xs = oracles::uniform_iid(20000, 77);
    const auto curve = figchaos::mi_curve(xs, 5, 16);
    EXPECT_GT(curve.bits[0], 3.0);  // near log2(16) for uniform data
    for (std::size_t t = 1; t <= 5; ++t) {
        EXPECT_LT(curve.bits[t], 0.05) << "lag " << t;
        EXPECT_GE(curve.bits[t], 0.0);
    }
}

TEST(MiCurve, SineFirstMinimumNearQuarterPeriod)
{
    // The histogram estimate of a pure sine dips into a flat basin around
    // the quarter period (lag 5 here); the argmin may land anywhere inside
    // the basin, but it must be interior and below both shoulders.
    const auto xs = oracles::sine_series(4000, 20);
    const auto curve = figchaos::mi_curve(xs, 12, 32);
    const auto min = figchaos::first_minimum(curve);
    EXPECT_TRUE(min.clear);
    EXPECT_GE(min.lag, 2u);
    EXPECT_LE(min.lag, 8u);
    EXPECT_LT(curve.bits[min.lag], curve.bits[1]);
    EXPECT_LT(curve.bits[min.lag], curve.bits[9]);
}

TEST(MiCurve, InvariantUnderPowerOfTwoRescaling)
{
    const auto xs = oracles::gaussian_iid(4096, 5);
    std::vector<double> scaled(xs);
    for (double &x : scaled) {
        x *= 4.0;
    }
    const auto a = figchaos::mi_curve(xs, 8, 64);
    const auto b = figchaos::mi_curve(scaled, 8, 64);
    for (std::size_t t = 0; t <= 8; ++t) {
        EXPECT_EQ(a.bits[t], b.bits[t]) << "lag " << t;
    }
}

TEST(MiCurve, ConstantSeriesIsRejected)
{
    const std::vector<double> xs(128, 3.25);
    EXPECT_THROW(figchaos::mi_curve(xs, 4, 16),
                 figchaos::DegenerateSeriesError);
}

TEST(MiCurve, RejectsBadArguments)
{
    const auto xs = oracles::gaussian_iid(64, 1);
    EXPECT_THROW(figchaos::mi_curve(xs, 4, 1), std::invalid_argument);
    EXPECT_THROW(figchaos::mi_curve(xs, 63, 16), std::invalid_argument);
}

TEST(FirstMinimum, PicksFirstInteriorDip)
{
    const auto min = figchaos::first_minimum(curve_of({3.0, 1.0, 0.5, 0.8, 0.7}));
    EXPECT_EQ(min.lag, 2u);
    EXPECT_TRUE(min.clear);
}

TEST(FirstMinimum, MonotoneCurveFallsBackToGlobalMinimum)
{
    const auto min = figchaos::first_minimum(curve_of({5.0, 4.0, 3.0, 2.0, 1.0}));
    EXPECT_EQ(min.lag, 4u);
    EXPECT_FALSE(min.clear);
}

TEST(FirstMinimum, FlatShoulderCountsAsMinimum)
{
    // I(T-1) > I(T) <= I(T+1): equality on the right shoulder still selects T.
    const auto min = figchaos::first_minimum(curve_of({2.0, 1.0, 1.0, 1.5}));
    EXPECT_EQ(min.lag, 1u);
    EXPECT_TRUE(min.clear);
}

TEST(FirstMinimum, NeedsAtLeastThreeLags)
{
    EXPECT_THROW(figchaos::first_minimum(curve_of({1.0, 2.0})),
                 std::invalid_argument);
}
