#include "ppcmt/core_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ppcmt/parallel.hpp"

namespace ppcmt {

namespace {

constexpr std::size_t kGridThreshold = 256;  // below this, brute force wins

void brute_knn_one(const PointCloud& cloud, const Vec3& q, std::size_t k, IndexSet& out) {
    std::vector<std::pair<double, std::size_t>> cand(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) cand[i] = {dist2(q, cloud[i]), i};
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    out.resize(k);
    for (std::size_t j = 0; j < k; ++j) out[j] = cand[j].second;
}

}  // namespace

IndexSet canonical_sort(const PointCloud& cloud) {
    require_nonempty(cloud);
    IndexSet perm(cloud.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
        return lex_less(cloud[a], cloud[b]);
    });
    return perm;
}

IndexSet fps(const PointCloud& cloud, std::size_t count) {
    require_nonempty(cloud);
    const std::size_t n = cloud.size();
    if (count > n) throw std::invalid_argument("sample larger than population");
    if (count == 0) throw std::invalid_argument("sample count must be positive");

    std::size_t first = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (lex_less(cloud[i], cloud[first])) first = i;

    IndexSet picks;
    picks.reserve(count);
    picks.push_back(first);

    std::vector<double> min_d2(n);
    for (std::size_t i = 0; i < n; ++i) min_d2[i] = dist2(cloud[i], cloud[first]);

    while (picks.size() < count) {
        std::size_t best = 0;
        double best_d2 = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (min_d2[i] > best_d2) {
                best_d2 = min_d2[i];
                best = i;
            }
        }
        picks.push_back(best);
        for (std::size_t i = 0; i < n; ++i)
            min_d2[i] = std::min(min_d2[i], dist2(cloud[i], cloud[best]));
    }
    return picks;
}

IndexMatrix knn(const PointCloud& cloud, const PointCloud& queries, std::size_t k) {
    require_nonempty(cloud);
    require_nonempty(queries);
    if (k > cloud.size()) throw std::invalid_argument("neighbor count exceeds population");
    if (k == 0) throw std::invalid_argument("neighbor count must be positive");

    IndexMatrix result(queries.size(), k);
    if (cloud.size() >= kGridThreshold) {
        GridIndex grid(cloud);
        parallel_for(
            queries.size(),
            [&](std::size_t qi) {
                IndexSet row;
                grid.knn(queries[qi], k, row);
                std::copy(row.begin(), row.end(), result.data.begin() + qi * k);
            },
            512);
    } else {
        parallel_for(
            queries.size(),
            [&](std::size_t qi) {
                IndexSet row;
                brute_knn_one(cloud, queries[qi], k, row);
                std::copy(row.begin(), row.end(), result.data.begin() + qi * k);
            },
            std::max<std::size_t>(1, (std::size_t{1} << 18) / cloud.size()));
    }
    return result;
}

GroupedPatches group_normalize(const PointCloud& cloud, const IndexSet& center_idx,
                               std::size_t k) {
    require_nonempty(cloud);
    if (center_idx.empty()) throw std::invalid_argument("empty input");
    for (std::size_t idx : center_idx)
        if (idx >= cloud.size()) throw std::invalid_argument("center index out of range");

    GroupedPatches patches;
    patches.centers.reserve(center_idx.size());
    for (std::size_t idx : center_idx) patches.centers.push_back(cloud[idx]);

    patches.neighbor_indices = knn(cloud, patches.centers, k);
    patches.local_offsets.resize(center_idx.size() * k);
    for (std::size_t g = 0; g < center_idx.size(); ++g)
        for (std::size_t j = 0; j < k; ++j)
            patches.local_offsets[g * k + j] =
                cloud[patches.neighbor_indices.at(g, j)] - patches.centers[g];
    return patches;
}

std::vector<IndexSet> ball_query(const PointCloud& cloud, const PointCloud& seeds,
                                 double radius) {
    require_nonempty(cloud);
    require_nonempty(seeds);
    if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");

    std::vector<IndexSet> result(seeds.size());
    if (cloud.size() >= kGridThreshold) {
        GridIndex grid(cloud);
        parallel_for(
            seeds.size(), [&](std::size_t s) { grid.ball(seeds[s], radius, result[s]); }, 512);
    } else {
        const double r2 = radius * radius;
        parallel_for(
            seeds.size(),
            [&](std::size_t s) {
                for (std::size_t i = 0; i < cloud.size(); ++i)
                    if (dist2(seeds[s], cloud[i]) <= r2) result[s].push_back(i);
            },
            std::max<std::size_t>(1, (std::size_t{1} << 18) / cloud.size()));
    }
    return result;
}

void directed_nn(const PointCloud& A, const PointCloud& B, std::vector<double>& dists,
                 IndexSet& nearest) {
    require_nonempty(A);
    require_nonempty(B);
    dists.resize(A.size());
    nearest.resize(A.size());
    if (B.size() >= kGridThreshold) {
        GridIndex grid(B);
        parallel_for(
            A.size(),
            [&](std::size_t i) {
                double d2 = 0.0;
                nearest[i] = grid.nearest(A[i], d2);
                dists[i] = std::sqrt(d2);
            },
            512);
    } else {
        parallel_for(
            A.size(),
            [&](std::size_t i) {
                double best_d2 = std::numeric_limits<double>::infinity();
                std::size_t best = 0;
                for (std::size_t j = 0; j < B.size(); ++j) {
                    const double d2 = dist2(A[i], B[j]);
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = j;
                    }
                }
                dists[i] = std::sqrt(best_d2);
                nearest[i] = best;
            },
            std::max<std::size_t>(1, (std::size_t{1} << 18) / B.size()));
    }
}

std::vector<double> directed_nn_dists(const PointCloud& A, const PointCloud& B) {
    std::vector<double> dists;
    IndexSet nearest;
    directed_nn(A, B, dists, nearest);
    return dists;
}

// --- GridIndex ---------------------------------------------------------

GridIndex::GridIndex(const PointCloud& cloud) : cloud_(cloud) {
    require_nonempty(cloud);
    Vec3 lo = cloud[0], hi = cloud[0];
    for (const Vec3& p : cloud) {
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    origin_ = lo;
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    const double per_axis = std::cbrt(static_cast<double>(cloud.size()));
    cell_ = extent > 0.0 ? extent / per_axis : 1.0;
    nx_ = static_cast<std::size_t>((hi.x - lo.x) / cell_) + 1;
    ny_ = static_cast<std::size_t>((hi.y - lo.y) / cell_) + 1;
    nz_ = static_cast<std::size_t>((hi.z - lo.z) / cell_) + 1;
    cells_.resize(nx_ * ny_ * nz_);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        long long cx, cy, cz;
        cell_of(cloud[i], cx, cy, cz);
        cx = std::clamp<long long>(cx, 0, static_cast<long long>(nx_) - 1);
        cy = std::clamp<long long>(cy, 0, static_cast<long long>(ny_) - 1);
        cz = std::clamp<long long>(cz, 0, static_cast<long long>(nz_) - 1);
        cells_[flat(cx, cy, cz)].push_back(i);
    }
}

void GridIndex::cell_of(const Vec3& p, long long& cx, long long& cy, long long& cz) const {
    cx = static_cast<long long>(std::floor((p.x - origin_.x) / cell_));
    cy = static_cast<long long>(std::floor((p.y - origin_.y) / cell_));
    cz = static_cast<long long>(std::floor((p.z - origin_.z) / cell_));
}

std::size_t GridIndex::flat(long long cx, long long cy, long long cz) const {
    return (static_cast<std::size_t>(cz) * ny_ + static_cast<std::size_t>(cy)) * nx_ +
           static_cast<std::size_t>(cx);
}

void GridIndex::knn(const Vec3& query, std::size_t k, IndexSet& out) const {
    long long qx, qy, qz;
    cell_of(query, qx, qy, qz);

    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(k * 4);

    const long long max_ring =
        static_cast<long long>(nx_ + ny_ + nz_) + std::llabs(qx) + std::llabs(qy) + std::llabs(qz);

    auto scan_cell = [&](long long cx, long long cy, long long cz) {
        if (cx < 0 || cy < 0 || cz < 0 || cx >= static_cast<long long>(nx_) ||
            cy >= static_cast<long long>(ny_) || cz >= static_cast<long long>(nz_))
            return;
        for (std::size_t i : cells_[flat(cx, cy, cz)]) cand.emplace_back(dist2(query, cloud_[i]), i);
    };

    for (long long r = 0; r <= max_ring; ++r) {
        // Any point in a ring-r cell is at least (r-1) cells away, so once the
        // k-th best beats that bound strictly, no farther ring can win a tie.
        if (cand.size() >= k) {
            const double bound = static_cast<double>(r - 1) * cell_;
            std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1),
                             cand.end());
            const double kth = cand[k - 1].first;
            if (bound > 0.0 && bound * bound > kth) break;
        }
        if (r == 0) {
            scan_cell(qx, qy, qz);
            continue;
        }
        for (long long dx = -r; dx <= r; ++dx) {
            for (long long dy = -r; dy <= r; ++dy) {
                if (std::max(std::llabs(dx), std::llabs(dy)) == r) {
                    for (long long dz = -r; dz <= r; ++dz) scan_cell(qx + dx, qy + dy, qz + dz);
                } else {
                    scan_cell(qx + dx, qy + dy, qz - r);
                    scan_cell(qx + dx, qy + dy, qz + r);
                }
            }
        }
    }

    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    out.resize(k);
    for (std::size_t j = 0; j < k; ++j) out[j] = cand[j].second;
}

std::size_t GridIndex::nearest(const Vec3& query, double& best_d2) const {
    IndexSet one;
    knn(query, 1, one);
    best_d2 = dist2(query, cloud_[one[0]]);
    return one[0];
}

void GridIndex::ball(const Vec3& query, double radius, IndexSet& out) const {
    out.clear();
    const double r2 = radius * radius;
    long long x0, y0, z0, x1, y1, z1;
    cell_of({query.x - radius, query.y - radius, query.z - radius}, x0, y0, z0);
    cell_of({query.x + radius, query.y + radius, query.z + radius}, x1, y1, z1);
    x0 = std::max<long long>(x0, 0);
    y0 = std::max<long long>(y0, 0);
    z0 = std::max<long long>(z0, 0);
    x1 = std::min<long long>(x1, static_cast<long long>(nx_) - 1);
    y1 = std::min<long long>(y1, static_cast<long long>(ny_) - 1);
    z1 = std::min<long long>(z1, static_cast<long long>(nz_) - 1);
    for (long long cz = z0; cz <= z1; ++cz)
        for (long long cy = y0; cy <= y1; ++cy)
            for (long long cx = x0; cx <= x1; ++cx)
                for (std::size_t i : cells_[flat(cx, cy, cz)])
                    if (dist2(query, cloud_[i]) <= r2) out.push_back(i);
    std::sort(out.begin(), out.end());
}

}  // namespace ppcmt
