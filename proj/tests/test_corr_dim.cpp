#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include <figchaos/corr_dim.hpp>
#include <figchaos/embedding.hpp>

#include "oracles.hpp"

namespace
{

figchaos::DelayVectors cloud_from(std::vector<double> flat, std::size_t dim)
{
    const std::size_t n = flat.size() / dim;
    return figchaos::DelayVectors(std::move(flat),
                                  {.delay = 1, .dimension = dim}, n + dim - 1);
}

}  // namespace

TEST(CorrelationSum, TwoPointBoundaryConvention)
{
    const auto cloud = cloud_from({0.0, 1.0}, 1);
    const std::vector<double> radii{0.5, 2.0};
    const auto curve = figchaos::correlation_sum(cloud, radii, 0);
    ASSERT_EQ(curve.sums.size(), 2u);
    EXPECT_DOUBLE_EQ(curve.sums[0], 0.0);  // the single pair sits at distance 1
    EXPECT_DOUBLE_EQ(curve.sums[1], 1.0);
    EXPECT_EQ(curve.pair_norm, 1u);
}

TEST(CorrelationSum, SaturatesAtOneBeyondTheDiameter)
{
    const auto points = oracles::uniform_iid(300, 4);
    const auto cloud = cloud_from(std::vector<double>(points), 1);
    const std::vector<double> radii{5.0};
    const auto curve = figchaos::correlation_sum(cloud, radii, 0);
    EXPECT_DOUBLE_EQ(curve.sums[0], 1.0);
}

TEST(CorrelationSum, MatchesDirectPairCountNormalization)
{
    const auto points = oracles::gaussian_iid(200, 8);
    const auto cloud = cloud_from(std::vector<double>(points), 1);
    const std::vector<double> radii{0.1, 0.5, 1.0};
    const std::size_t w = 3;
    const auto curve = figchaos::correlation_sum(cloud, radii, w);
    // Admissible pairs: |i - j| > w among 200 points.
    const std::uint64_t all = 200u * 199u / 2u;
    const std::uint64_t banded = 197u + 198u + 199u;  // |i-j| in {1,2,3}
    EXPECT_EQ(curve.pair_norm, all - banded);
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const auto count = figchaos::bruteforce::count_pairs_within(
            cloud, radii[k], w);
        EXPECT_DOUBLE_EQ(curve.sums[k],
                         static_cast<double>(count) /
                             static_cast<double>(curve.pair_norm));
    }
}

TEST(CorrelationDimension, ExactPowerLawRecoversitsExponent)
{
    // C(eps) = eps^2 on a log grid must fit slope 2 to machine precision.
    figchaos::CorrelationCurve curve;
    for (int k = -12; k <= 0; ++k) {
        const double eps = std::exp(0.5 * k);
        curve.radii.push_back(eps);
        curve.sums.push_back(eps * eps);
    }
    curve.pair_norm = 1000;
    const auto est = figchaos::correlation_dimension(curve);
    EXPECT_NEAR(est.value, 2.0, 1e-12);
    EXPECT_TRUE(est.stable_window);
    EXPECT_NEAR(est.r_squared, 1.0, 1e-12);
}

TEST(CorrelationDimension, UniformIntervalHasDimensionOne)
{
    const auto points = oracles::uniform_iid(4000, 12);
    const auto cloud = cloud_from(std::vector<double>(points), 1);
    const auto radii = figchaos::log_radius_grid(cloud, 32, 0);
    const auto curve = figchaos::correlation_sum(cloud, radii, 0);
    const auto est = figchaos::correlation_dimension(curve);
    EXPECT_NEAR(est.value, 1.0, 0.1);
}

TEST(CorrelationDimension, UniformSquareHasDimensionTwo)
{
    // Radii well below the unit side length, where the square's pair count
    // follows the clean power law (the near-diameter range is boundary
    // dominated and systematically flattens the slope).
    const auto points = oracles::uniform_iid(16000, 3);
    const auto cloud = cloud_from(std::vector<double>(points), 2);
    std::vector<double> radii;
    for (int k = 0; k < 16; ++k) {
        radii.push_back(0.01 * std::pow(15.0, k / 15.0));  // 0.01 .. 0.15
    }
    const auto curve = figchaos::correlation_sum(cloud, radii, 0);
    const auto est = figchaos::correlation_dimension(curve);
    EXPECT_NEAR(est.value, 2.0, 0.1);
}

TEST(CorrelationDimension, HenonAttractorNearOnePointTwo)
{
    const auto xs = oracles::henon_series(10000);
    const auto vecs = figchaos::embed(xs, {.delay = 1, .dimension = 2});
    const auto radii = figchaos::log_radius_grid(vecs, 32, 1);
    const auto curve = figchaos::correlation_sum(vecs, radii, 1);
    const auto est = figchaos::correlation_dimension(curve);
    EXPECT_NEAR(est.value, 1.2, 0.1);
    EXPECT_TRUE(est.stable_window);
    EXPECT_GT(est.r_squared, 0.99);
}

TEST(CorrelationDimension, TooFewPositiveSumsThrow)
{
    figchaos::CorrelationCurve curve;
    curve.radii = {0.1, 0.2, 0.4, 0.8};
    curve.sums = {0.0, 0.0, 0.1, 0.2};  // only two usable points
    EXPECT_THROW(figchaos::correlation_dimension(curve),
                 figchaos::InsufficientScalingRegionError);
}

TEST(DimensionScan, HenonPlateausFromDimensionTwo)
{
    const auto xs = oracles::henon_series(4096);
    const std::vector<std::size_t> delays{1};
    const std::vector<std::size_t> dims{1, 2, 3, 4, 5, 6};
    const auto scan = figchaos::dimension_scan(xs, delays, dims, {});
    ASSERT_EQ(scan.plateau.size(), 1u);
    EXPECT_TRUE(scan.plateau[0]);
    for (std::size_t j = 1; j < dims.size(); ++j) {
        const auto &est = scan.cell(0, j);
        ASSERT_TRUE(est.has_value()) << scan.errors[j];
        EXPECT_NEAR(est->value, 1.2, 0.25) << "m=" << dims[j];
        EXPECT_TRUE(est->converged);
    }
}

TEST(DimensionScan, NoiseTracksTheEmbeddingDimension)
{
    const auto xs = oracles::gaussian_iid(4096, 17);
    const std::vector<std::size_t> delays{1};
    const std::vector<std::size_t> dims{1, 2, 3, 4, 5};
    const auto scan = figchaos::dimension_scan(xs, delays, dims, {});
    EXPECT_FALSE(scan.plateau[0]);
    for (std::size_t j = 0; j < dims.size(); ++j) {
        const auto &est = scan.cell(0, j);
        ASSERT_TRUE(est.has_value()) << scan.errors[j];
        // Noise fills the embedding space: the estimate keeps climbing.
        EXPECT_NEAR(est->value, static_cast<double>(dims[j]),
                    0.35 * static_cast<double>(dims[j]));
        EXPECT_FALSE(est->converged);
    }
}

TEST(DimensionScan, CellErrorsAreRecordedWithoutAborting)
{
    // Dimension 40 at delay 30 needs more points than the series has; that
    // cell must fail in place while the others fill in.
    const auto xs = oracles::henon_series(512);
    const std::vector<std::size_t> delays{30};
    const std::vector<std::size_t> dims{2, 40};
    const auto scan = figchaos::dimension_scan(xs, delays, dims, {});
    EXPECT_TRUE(scan.cell(0, 0).has_value());
    EXPECT_FALSE(scan.cell(0, 1).has_value());
    EXPECT_FALSE(scan.errors[1].empty());
}
