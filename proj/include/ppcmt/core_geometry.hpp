#pragma once

#include <cstddef>
#include <vector>

#include "ppcmt/types.hpp"

namespace ppcmt {

// Foundational point-set operations. All of them are pure functions over
// immutable inputs and deterministic: every distance tie breaks toward the
// smaller original index, and farthest point sampling starts at the
// canonical-sort minimum so selected point sets do not depend on storage
// order for generic clouds.

// Permutation sorting points lexicographically by (x, y, z); equal points
// keep their original relative order.
IndexSet canonical_sort(const PointCloud& cloud);

// Greedy min-distance maximization. First pick = canonical-sort minimum;
// later picks take the point with the largest distance to the selected set,
// ties toward the smaller original index.
IndexSet fps(const PointCloud& cloud, std::size_t count);

// For each query the k nearest cloud indices, ascending by distance then by
// index. A query coinciding with a cloud point includes that point.
IndexMatrix knn(const PointCloud& cloud, const PointCloud& queries, std::size_t k);

// Centers = cloud[center_idx]; per center the k nearest neighbors and their
// center-relative offsets (exactly neighbor - center).
GroupedPatches group_normalize(const PointCloud& cloud, const IndexSet& center_idx,
                               std::size_t k);

// All indices within `radius` of each seed (boundary inclusive), ascending
// by index.
std::vector<IndexSet> ball_query(const PointCloud& cloud, const PointCloud& seeds,
                                 double radius);

// For each a in A, min over b in B of the Euclidean (non-squared) distance.
std::vector<double> directed_nn_dists(const PointCloud& A, const PointCloud& B);

// Same, but also reports the argmin index in B for each point of A.
void directed_nn(const PointCloud& A, const PointCloud& B, std::vector<double>& dists,
                 IndexSet& nearest);

// Uniform-grid index over a cloud. Exact: results are identical, index for
// index, to the exhaustive scan (same tie rules). Built once, queried from
// any number of threads.
class GridIndex {
  public:
    explicit GridIndex(const PointCloud& cloud);

    // k smallest (distance, index) pairs, ascending.
    void knn(const Vec3& query, std::size_t k, IndexSet& out) const;
    // Nearest index + distance^2.
    std::size_t nearest(const Vec3& query, double& best_d2) const;
    // Indices with dist <= radius, ascending by index.
    void ball(const Vec3& query, double radius, IndexSet& out) const;

  private:
    void cell_of(const Vec3& p, long long& cx, long long& cy, long long& cz) const;
    std::size_t flat(long long cx, long long cy, long long cz) const;

    const PointCloud& cloud_;
    Vec3 origin_;
    double cell_ = 1.0;
    std::size_t nx_ = 1, ny_ = 1, nz_ = 1;
    std::vector<std::vector<std::size_t>> cells_;
};

}  // namespace ppcmt
