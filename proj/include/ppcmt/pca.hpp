#pragma once

#include <array>
#include <cstdint>
#include <cstddef>
#include <vector>

#include "ppcmt/types.hpp"

namespace ppcmt {

struct Mat3 {
    // m[r][c]
    std::array<std::array<double, 3>, 3> m{};

    static Mat3 identity() {
        Mat3 out;
        out.m[0][0] = out.m[1][1] = out.m[2][2] = 1.0;
        return out;
    }
    Vec3 col(std::size_t c) const { return {m[0][c], m[1][c], m[2][c]}; }
    void set_col(std::size_t c, const Vec3& v) {
        m[0][c] = v.x;
        m[1][c] = v.y;
        m[2][c] = v.z;
    }
    Vec3 mul(const Vec3& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
                m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
                m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
    }
    // V^T p, i.e. coordinates of p in the column frame.
    Vec3 tmul(const Vec3& v) const {
        return {col(0).dot(v), col(1).dot(v), col(2).dot(v)};
    }
};

// Which rule fixed the sign of each principal axis.
enum class SignRule : std::uint8_t {
    skewness,       // projections' third moment made positive
    max_magnitude,  // skew below threshold; max(q) >= |min(q)| enforced
    solver_default, // still tied; eigensolver output kept as is
};

struct PcaFrame {
    Vec3 centroid;
    Mat3 eigvecs;                        // columns = principal axes, descending eigenvalue
    std::array<double, 3> eigvals{};     // descending, >= 0
    std::array<SignRule, 3> sign_rule_applied{};
    bool degenerate = false;             // repeated eigenvalues within tolerance
};

// Eigenvalues/vectors of a symmetric 3x3 matrix, descending. Closed-form
// characteristic-polynomial roots with one Newton polish each; eigenvectors
// via row cross products plus a 2x2 solve in the orthogonal complement.
void eig33_sym(const Mat3& a, std::array<double, 3>& eigvals, Mat3& eigvecs,
               bool& degenerate);

// Centroid, 1/(N-1) covariance, eigendecomposition, and the deterministic
// sign convention. N == 1 yields the documented degenerate frame
// (eigenvalues 0, identity axes).
PcaFrame pca_axes(const PointCloud& cloud);

// Per-point projections q = V^T (p - centroid).
std::vector<Vec3> pca_project(const PointCloud& cloud, const PcaFrame& frame);

// Permutation sorting points lexicographically by their projections
// (q1, q2, q3); full ties break by original index.
IndexSet pca_sort(const PointCloud& cloud);

enum class DecomposeStrategy : std::uint8_t { pca_uniform, random_uniform };

struct Decomposition {
    IndexSet sorted_perm;                       // cloud index at each sorted position
    std::vector<PointCloud> subsets;            // U interleaved subsets
    std::vector<IndexSet> subset_positions;     // sorted positions backing each subset
    DecomposeStrategy strategy = DecomposeStrategy::pca_uniform;
};

// Sort (PCA order, or a seeded shuffle for the random baseline), then deal
// sorted positions round-robin: subset u takes 0-based positions j with
// j mod U == u. Subset sizes differ by at most one.
Decomposition decompose(const PointCloud& cloud, std::size_t subset_count,
                        DecomposeStrategy strategy, std::uint64_t seed);

}  // namespace ppcmt
