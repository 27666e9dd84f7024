#include <gtest/gtest.h>

#include <cstdint>
#include <vector>

#include <figchaos/embedding.hpp>
#include <figchaos/neighbors.hpp>

#include "oracles.hpp"

namespace
{

figchaos::DelayVectors make_cloud(std::size_t n, std::size_t dim,
                                  std::uint64_t seed)
{
    auto data = oracles::gaussian_iid(n * dim, seed);
    return figchaos::DelayVectors(std::move(data), {.delay = 1, .dimension = dim},
                                  n + dim - 1);
}

figchaos::DelayVectors line_cloud(std::vector<double> xs)
{
    const std::size_t n = xs.size();
    return figchaos::DelayVectors(std::move(xs), {.delay = 1, .dimension = 1}, n);
}

}  // namespace

TEST(NearestNeighbor, ExclusionWindowSkipsTemporalNeighbors)
{
    const auto cloud = line_cloud({0.0, 1.0, 5.0});
    const figchaos::NeighborIndex index(cloud);

    const auto plain = index.nearest(0, 0);
    EXPECT_EQ(plain.id, 1u);
    EXPECT_DOUBLE_EQ(plain.distance, 1.0);

    const auto windowed = index.nearest(0, 1);
    EXPECT_EQ(windowed.id, 2u);
    EXPECT_DOUBLE_EQ(windowed.distance, 5.0);
}

TEST(NearestNeighbor, ThrowsWhenWindowExcludesEveryone)
{
    const auto cloud = line_cloud({0.0, 1.0, 5.0});
    const figchaos::NeighborIndex index(cloud);
    EXPECT_THROW(index.nearest(1, 5), figchaos::NoAdmissibleNeighborError);
}

TEST(NearestNeighbor, TiesBreakToLowestId)
{
    const auto cloud = line_cloud({0.0, 1.0, -1.0});
    const figchaos::NeighborIndex index(cloud);
    const auto hit = index.nearest(0, 0);
    EXPECT_EQ(hit.id, 1u);
    EXPECT_DOUBLE_EQ(hit.distance, 1.0);
}

TEST(NearestNeighbor, MatchesBruteForceOnRandomClouds)
{
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto cloud = make_cloud(500, 4, seed);
        const figchaos::NeighborIndex index(cloud);
        for (std::size_t w : {0u, 3u, 25u}) {
            for (std::size_t q = 0; q < cloud.size(); q += 17) {
                const auto fast = index.nearest(q, w);
                const auto slow = figchaos::bruteforce::nearest(cloud, q, w);
                ASSERT_TRUE(slow.has_value());
                EXPECT_EQ(fast.id, slow->id) << "seed=" << seed << " q=" << q;
                EXPECT_DOUBLE_EQ(fast.distance, slow->distance);
            }
        }
    }
}

TEST(PairCounts, BoundaryIsInclusive)
{
    const auto cloud = line_cloud({0.0, 1.0});
    const figchaos::NeighborIndex index(cloud);
    EXPECT_EQ(index.count_pairs_within(1.0, 0), 1u);
    EXPECT_EQ(index.count_pairs_within(0.999, 0), 0u);
}

TEST(PairCounts, ExactlyMatchBruteForceOnRandomClouds)
{
    for (std::uint64_t seed : {10u, 20u}) {
        const auto cloud = make_cloud(300, 3, seed);
        const figchaos::NeighborIndex index(cloud);
        for (double radius : {0.05, 0.3, 1.0, 2.5, 10.0}) {
            for (std::size_t w : {0u, 5u}) {
                EXPECT_EQ(index.count_pairs_within(radius, w),
                          figchaos::bruteforce::count_pairs_within(cloud, radius,
                                                                   w))
                    << "seed=" << seed << " r=" << radius << " w=" << w;
            }
        }
    }
}

TEST(PairCounts, MultiRadiusSweepEqualsIndividualQueries)
{
    const auto cloud = make_cloud(400, 3, 7);
    const figchaos::NeighborIndex index(cloud);
    const std::vector<double> radii{0.1, 0.4, 0.9, 1.7, 3.0, 6.0};
    const auto sweep = index.count_pairs_multi(radii, 2);
    ASSERT_EQ(sweep.size(), radii.size());
    std::uint64_t prev = 0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        EXPECT_EQ(sweep[k], index.count_pairs_within(radii[k], 2));
        EXPECT_GE(sweep[k], prev);  // monotone in the radius
        prev = sweep[k];
    }
}

TEST(RangeQueries, MatchBruteForceAndComeSorted)
{
    const auto cloud = make_cloud(350, 2, 99);
    const figchaos::NeighborIndex index(cloud);
    for (std::size_t q : {0u, 50u, 349u}) {
        const auto fast = index.neighbors_within(q, 0.8, 1);
        auto slow = figchaos::bruteforce::neighbors_within(cloud, q, 0.8, 1);
        std::sort(slow.begin(), slow.end());
        EXPECT_EQ(fast, slow) << "q=" << q;
    }
}

TEST(RangeQueries, DuplicatePointsCanBeSkipped)
{
    const auto cloud = line_cloud({2.0, 2.0, 2.5});
    const figchaos::NeighborIndex index(cloud);
    // Plain nearest of point 0 is its duplicate at zero distance.
    const auto dup = index.nearest(0, 0);
    EXPECT_EQ(dup.id, 1u);
    EXPECT_DOUBLE_EQ(dup.distance, 0.0);
    // Skipping squared distance <= 0 hops over the duplicate.
    const auto hit = index.nearest_if(
        cloud.point(0), [](std::size_t j) { return j != 0; }, 0.0);
    ASSERT_TRUE(hit.has_value());
    EXPECT_EQ(hit->id, 2u);
    EXPECT_DOUBLE_EQ(hit->distance, 0.5);
}
