#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "figchaos/embedding.hpp"
#include "figchaos/types.hpp"

namespace figchaos
{

struct NeighborHit {
    std::size_t id = 0;
    double distance = 0.0;
};

namespace detail
{

/// Squared Euclidean distance, accumulated in component order. Every path
/// through the index (leaf scans, brute force, bounding-box bounds) uses the
/// same accumulation order, so counts and argmins agree bit for bit.
inline double sq_dist(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        s += diff * diff;
    }
    return s;
}

inline bool excluded(std::size_t i, std::size_t j, std::size_t theiler)
{
    const std::size_t gap = (i > j) ? i - j : j - i;
    return gap <= theiler;  // covers i == j
}

} // namespace detail

/// Spatial index over a DelayVectors cloud (median-split kd-tree with
/// per-node bounding boxes). Holds a reference to the cloud; the cloud must
/// outlive the index. Queries are read-only and safe to issue concurrently.
///
/// All queries take a Theiler window `theiler`: points j with
/// |i - j| <= theiler are never returned for query id i. Results are exactly
/// those of the brute-force reference below: the box lower bound and the
/// point distance are accumulated in the same component order, so a pruned
/// subtree can never hide an admissible point (floating-point rounding is
/// monotone in each operand).
class NeighborIndex {
  public:
    explicit NeighborIndex(const DelayVectors &points, std::size_t leaf_size = 16)
        : points_(points), leaf_size_(std::max<std::size_t>(leaf_size, 1)),
          order_(points.size())
    {
        require(points.size() >= 1, "index needs at least one point");
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        nodes_.reserve(2 * points.size() / leaf_size_ + 2);
        build(0, points.size());
    }

    const DelayVectors &points() const { return points_; }

    /// Nearest admissible neighbor of point `query_id`; ties broken by the
    /// lowest point id. Throws NoAdmissibleNeighborError if the exclusion
    /// window leaves no candidates.
    NeighborHit nearest(std::size_t query_id, std::size_t theiler) const
    {
        auto hit = nearest_if(points_.point(query_id), [&](std::size_t j) {
            return !detail::excluded(query_id, j, theiler);
        });
        if (!hit) {
            throw NoAdmissibleNeighborError(
                "no admissible neighbor for point " + std::to_string(query_id) +
                " with exclusion window " + std::to_string(theiler));
        }
        return *hit;
    }

    /// Nearest point satisfying `admissible(id)`, or nullopt. The predicate
    /// must be pure. `min_sq_dist_exclusive` skips candidates at squared
    /// distance <= that bound (used to skip exact duplicates).
    template <typename Pred>
    std::optional<NeighborHit> nearest_if(std::span<const double> query,
                                          Pred admissible,
                                          double min_sq_dist_exclusive = -1.0) const
    {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_id = std::numeric_limits<std::size_t>::max();
        search_nearest(0, query, admissible, min_sq_dist_exclusive, best, best_id);
        if (best_id == std::numeric_limits<std::size_t>::max()) {
            return std::nullopt;
        }
        return NeighborHit{best_id, std::sqrt(best)};
    }

    /// Ids with distance <= radius (boundary inclusive) and |id - query| >
    /// theiler, in ascending id order.
    std::vector<std::size_t> neighbors_within(std::size_t query_id, double radius,
                                              std::size_t theiler) const
    {
        require(radius > 0.0, "radius must be positive");
        std::vector<std::size_t> ids;
        const double r2 = radius * radius;
        for_each_within(0, points_.point(query_id), r2, [&](std::size_t j) {
            if (!detail::excluded(query_id, j, theiler)) {
                ids.push_back(j);
            }
        });
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    /// Number of unordered pairs (i, j) with |i - j| > theiler and distance
    /// <= radius, matching the Theta(0) = 1 boundary convention.
    std::uint64_t count_pairs_within(double radius, std::size_t theiler) const
    {
        require(radius > 0.0, "radius must be positive");
        const std::vector<double> radii{radius};
        return count_pairs_multi(radii, theiler)[0];
    }

    /// Pair counts for an ascending radius grid in one sweep: result[k] is
    /// the number of admissible unordered pairs with distance <= radii[k].
    std::vector<std::uint64_t> count_pairs_multi(std::span<const double> radii,
                                                 std::size_t theiler) const
    {
        require(!radii.empty(), "empty radius grid");
        for (std::size_t k = 0; k + 1 < radii.size(); ++k) {
            require(radii[k] < radii[k + 1], "radii must be strictly increasing");
        }
        require(radii.front() > 0.0, "radii must be positive");

        std::vector<double> sq(radii.size());
        for (std::size_t k = 0; k < radii.size(); ++k) {
            sq[k] = radii[k] * radii[k];
        }
        std::vector<std::uint64_t> histogram(radii.size() + 1, 0);
        const double rmax2 = sq.back();
        const std::size_t n = points_.size();
        for (std::size_t i = 0; i < n; ++i) {
            // Only j > i + theiler, so each unordered pair is seen once.
            for_each_within_sq(0, points_.point(i), rmax2, [&](std::size_t j,
                                                               double d2) {
                if (j > i + theiler) {
                    const auto bin = static_cast<std::size_t>(
                        std::lower_bound(sq.begin(), sq.end(), d2) - sq.begin());
                    ++histogram[bin];
                }
            });
        }
        std::vector<std::uint64_t> counts(radii.size());
        std::uint64_t acc = 0;
        for (std::size_t k = 0; k < radii.size(); ++k) {
            acc += histogram[k];
            counts[k] = acc;
        }
        return counts;
    }

  private:
    struct Node {
        std::size_t begin = 0, end = 0;   // range in order_ (leaves only)
        std::size_t left = 0, right = 0;  // child node ids (0 == leaf)
        std::vector<double> lo, hi;       // bounding box
    };

    std::size_t build(std::size_t begin, std::size_t end)
    {
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        const std::size_t m = points_.dimension();
        auto &node = nodes_.back();
        node.lo.assign(m, std::numeric_limits<double>::infinity());
        node.hi.assign(m, -std::numeric_limits<double>::infinity());
        for (std::size_t k = begin; k < end; ++k) {
            const auto p = points_.point(order_[k]);
            for (std::size_t j = 0; j < m; ++j) {
                node.lo[j] = std::min(node.lo[j], p[j]);
                node.hi[j] = std::max(node.hi[j], p[j]);
            }
        }
        if (end - begin <= leaf_size_) {
            nodes_[id].begin = begin;
            nodes_[id].end = end;
            // Leaves scan in ascending id order so equal-distance candidates
            // resolve deterministically.
            std::sort(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                      order_.begin() + static_cast<std::ptrdiff_t>(end));
            return id;
        }
        std::size_t split_dim = 0;
        double widest = -1.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double extent = nodes_[id].hi[j] - nodes_[id].lo[j];
            if (extent > widest) {
                widest = extent;
                split_dim = j;
            }
        }
        const std::size_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                         order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(end),
                         [&](std::size_t a, std::size_t b) {
                             const double ca = points_.coord(a, split_dim);
                             const double cb = points_.coord(b, split_dim);
                             return ca < cb || (ca == cb && a < b);
                         });
        const std::size_t left = build(begin, mid);
        const std::size_t right = build(mid, end);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    /// Lower bound on the squared distance from q to node's box, accumulated
    /// in the same component order as sq_dist.
    double box_sq_dist(const Node &node, std::span<const double> q) const
    {
        double s = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            double diff = 0.0;
            if (q[j] < node.lo[j]) {
                diff = node.lo[j] - q[j];
            } else if (q[j] > node.hi[j]) {
                diff = q[j] - node.hi[j];
            }
            s += diff * diff;
        }
        return s;
    }

    template <typename Pred>
    void search_nearest(std::size_t node_id, std::span<const double> q,
                        Pred &admissible, double min_sq, double &best,
                        std::size_t &best_id) const
    {
        const Node &node = nodes_[node_id];
        // Strict > keeps boundary ties alive for the lowest-id rule.
        if (box_sq_dist(node, q) > best) {
            return;
        }
        if (node.left == 0) {
            for (std::size_t k = node.begin; k < node.end; ++k) {
                const std::size_t j = order_[k];
                if (!admissible(j)) {
                    continue;
                }
                const double d2 = detail::sq_dist(q, points_.point(j));
                if (d2 <= min_sq) {
                    continue;
                }
                if (d2 < best || (d2 == best && j < best_id)) {
                    best = d2;
                    best_id = j;
                }
            }
            return;
        }
        const double dl = box_sq_dist(nodes_[node.left], q);
        const double dr = box_sq_dist(nodes_[node.right], q);
        if (dl <= dr) {
            search_nearest(node.left, q, admissible, min_sq, best, best_id);
            search_nearest(node.right, q, admissible, min_sq, best, best_id);
        } else {
            search_nearest(node.right, q, admissible, min_sq, best, best_id);
            search_nearest(node.left, q, admissible, min_sq, best, best_id);
        }
    }

    template <typename Visit>
    void for_each_within(std::size_t node_id, std::span<const double> q,
                         double r2, Visit &&visit) const
    {
        for_each_within_sq(node_id, q,
                           r2, [&](std::size_t j, double) { visit(j); });
    }

    template <typename Visit>
    void for_each_within_sq(std::size_t node_id, std::span<const double> q,
                            double r2, Visit &&visit) const
    {
        const Node &node = nodes_[node_id];
        if (box_sq_dist(node, q) > r2) {
            return;
        }
        if (node.left == 0) {
            for (std::size_t k = node.begin; k < node.end; ++k) {
                const std::size_t j = order_[k];
                const double d2 = detail::sq_dist(q, points_.point(j));
                if (d2 <= r2) {
                    visit(j, d2);
                }
            }
            return;
        }
        for_each_within_sq(node.left, q, r2, visit);
        for_each_within_sq(node.right, q, r2, visit);
    }

    const DelayVectors &points_;
    std::size_t leaf_size_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

/// O(N^2) reference implementation of the same queries. The acceptance and
/// unit suites compare the kd-tree against these functions; they are also the
/// honest fallback for tiny clouds.
namespace bruteforce
{

inline std::optional<NeighborHit> nearest(const DelayVectors &points,
                                          std::size_t query_id,
                                          std::size_t theiler)
{
    const auto q = points.point(query_id);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_id = std::numeric_limits<std::size_t>::max();
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (detail::excluded(query_id, j, theiler)) {
            continue;
        }
        const double d2 = detail::sq_dist(q, points.point(j));
        if (d2 < best || (d2 == best && j < best_id)) {
            best = d2;
            best_id = j;
        }
    }
    if (best_id == std::numeric_limits<std::size_t>::max()) {
        return std::nullopt;
    }
    return NeighborHit{best_id, std::sqrt(best)};
}

inline std::vector<std::size_t> neighbors_within(const DelayVectors &points,
                                                 std::size_t query_id,
                                                 double radius,
                                                 std::size_t theiler)
{
    const auto q = points.point(query_id);
    const double r2 = radius * radius;
    std::vector<std::size_t> ids;
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (detail::excluded(query_id, j, theiler)) {
            continue;
        }
        if (detail::sq_dist(q, points.point(j)) <= r2) {
            ids.push_back(j);
        }
    }
    return ids;
}

inline std::uint64_t count_pairs_within(const DelayVectors &points,
                                        double radius, std::size_t theiler)
{
    const double r2 = radius * radius;
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = i + theiler + 1; j < points.size(); ++j) {
            if (detail::sq_dist(points.point(i), points.point(j)) <= r2) {
                ++count;
            }
        }
    }
    return count;
}

} // namespace bruteforce

} // namespace figchaos
