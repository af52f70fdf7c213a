#include "ppcmt/pca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ppcmt/rng.hpp"

namespace ppcmt {

namespace {

constexpr double kDegenRelTol = 1e-9;

// Null vector of (a - lambda*I) via the largest cross product of two rows.
// Valid when lambda is a simple eigenvalue (rank 2).
Vec3 eigvec_cross_rows(const Mat3& a, double lambda) {
    const Vec3 r0{a.m[0][0] - lambda, a.m[0][1], a.m[0][2]};
    const Vec3 r1{a.m[1][0], a.m[1][1] - lambda, a.m[1][2]};
    const Vec3 r2{a.m[2][0], a.m[2][1], a.m[2][2] - lambda};
    const Vec3 c01 = r0.cross(r1);
    const Vec3 c02 = r0.cross(r2);
    const Vec3 c12 = r1.cross(r2);
    Vec3 best = c01;
    double best_n2 = c01.norm2();
    if (c02.norm2() > best_n2) {
        best = c02;
        best_n2 = c02.norm2();
    }
    if (c12.norm2() > best_n2) {
        best = c12;
        best_n2 = c12.norm2();
    }
    if (best_n2 == 0.0) return {1.0, 0.0, 0.0};
    return best / std::sqrt(best_n2);
}

// Orthonormal pair spanning the plane perpendicular to unit vector v.
void complement_basis(const Vec3& v, Vec3& u, Vec3& w) {
    const Vec3 axis = std::abs(v.x) <= std::abs(v.y)
                          ? (std::abs(v.x) <= std::abs(v.z) ? Vec3{1, 0, 0} : Vec3{0, 0, 1})
                          : (std::abs(v.y) <= std::abs(v.z) ? Vec3{0, 1, 0} : Vec3{0, 0, 1});
    u = axis - v * v.dot(axis);
    u = u / u.norm();
    w = v.cross(u);
}

// Eigenvector for `lambda` restricted to the plane perpendicular to v_known.
Vec3 eigvec_in_complement(const Mat3& a, double lambda, const Vec3& v_known) {
    Vec3 u, w;
    complement_basis(v_known, u, w);
    const Vec3 au = a.mul(u);
    const Vec3 aw = a.mul(w);
    const double m00 = u.dot(au) - lambda;
    const double m01 = u.dot(aw);
    const double m11 = w.dot(aw) - lambda;
    // Null vector of the (nearly singular) symmetric 2x2 [[m00,m01],[m01,m11]].
    double cu, cw;
    if (std::abs(m00) >= std::abs(m11)) {
        if (std::abs(m00) > 0.0 || std::abs(m01) > 0.0) {
            cu = m01;
            cw = -m00;
        } else {
            cu = 1.0;
            cw = 0.0;
        }
    } else {
        cu = m11;
        cw = -m01;
    }
    const double n = std::sqrt(cu * cu + cw * cw);
    if (n == 0.0) return u;
    cu /= n;
    cw /= n;
    return u * cu + w * cw;
}

}  // namespace

void eig33_sym(const Mat3& a_in, std::array<double, 3>& eigvals, Mat3& eigvecs,
               bool& degenerate) {
    double scale = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) scale = std::max(scale, std::abs(a_in.m[r][c]));
    if (scale == 0.0) {
        eigvals = {0.0, 0.0, 0.0};
        eigvecs = Mat3::identity();
        degenerate = true;
        return;
    }
    Mat3 a = a_in;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) a.m[r][c] /= scale;

    const double a00 = a.m[0][0], a11 = a.m[1][1], a22 = a.m[2][2];
    const double a01 = a.m[0][1], a02 = a.m[0][2], a12 = a.m[1][2];

    std::array<double, 3> lam{};
    const double p1 = a01 * a01 + a02 * a02 + a12 * a12;
    if (p1 == 0.0) {
        lam = {a00, a11, a22};
        std::sort(lam.begin(), lam.end(), std::greater<>());
    } else {
        const double q = (a00 + a11 + a22) / 3.0;
        const double p2 = (a00 - q) * (a00 - q) + (a11 - q) * (a11 - q) +
                          (a22 - q) * (a22 - q) + 2.0 * p1;
        const double p = std::sqrt(p2 / 6.0);
        // det((A - qI)/p) / 2
        const double b00 = (a00 - q) / p, b11 = (a11 - q) / p, b22 = (a22 - q) / p;
        const double b01 = a01 / p, b02 = a02 / p, b12 = a12 / p;
        double r = (b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) +
                    b02 * (b01 * b12 - b11 * b02)) /
                   2.0;
        r = std::clamp(r, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        lam[0] = q + 2.0 * p * std::cos(phi);
        lam[2] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
        lam[1] = 3.0 * q - lam[0] - lam[2];
    }

    // One Newton step per root on the characteristic polynomial
    // f(x) = -x^3 + tr x^2 - c x + det.
    const double tr = a00 + a11 + a22;
    const double c = (a00 * a11 - a01 * a01) + (a00 * a22 - a02 * a02) +
                     (a11 * a22 - a12 * a12);
    const double det = a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02) +
                       a02 * (a01 * a12 - a11 * a02);
    for (double& x : lam) {
        const double f = ((-x + tr) * x - c) * x + det;
        const double fp = (-3.0 * x + 2.0 * tr) * x - c;
        if (std::abs(fp) > 1e-12) x -= f / fp;
    }
    std::sort(lam.begin(), lam.end(), std::greater<>());

    const double spread_tol = kDegenRelTol * std::max({std::abs(lam[0]), std::abs(lam[2]), 1e-300});
    const double d01 = lam[0] - lam[1];
    const double d12 = lam[1] - lam[2];
    degenerate = d01 <= spread_tol || d12 <= spread_tol;

    if (lam[0] - lam[2] <= spread_tol) {
        eigvecs = Mat3::identity();  // isotropic: every basis is an eigenbasis
    } else if (d01 >= d12) {
        // lam[0] is the best isolated root
        const Vec3 v0 = eigvec_cross_rows(a, lam[0]);
        const Vec3 v1 = eigvec_in_complement(a, lam[1], v0);
        const Vec3 v2 = v0.cross(v1);
        eigvecs.set_col(0, v0);
        eigvecs.set_col(1, v1);
        eigvecs.set_col(2, v2);
    } else {
        const Vec3 v2 = eigvec_cross_rows(a, lam[2]);
        const Vec3 v1 = eigvec_in_complement(a, lam[1], v2);
        const Vec3 v0 = v2.cross(v1);
        eigvecs.set_col(0, v0);
        eigvecs.set_col(1, v1);
        eigvecs.set_col(2, v2);
    }

    for (int i = 0; i < 3; ++i) eigvals[i] = lam[i] * scale;
}

PcaFrame pca_axes(const PointCloud& cloud) {
    require_nonempty(cloud);
    for (const Vec3& p : cloud)
        if (!finite(p)) throw std::invalid_argument("non-finite coordinate");

    const std::size_t n = cloud.size();
    PcaFrame frame;

    Vec3 mu{0, 0, 0};
    for (const Vec3& p : cloud) mu += p;
    mu = mu / static_cast<double>(n);
    frame.centroid = mu;

    if (n == 1) {
        // 1/(N-1) is undefined; documented degenerate case
        frame.eigvecs = Mat3::identity();
        frame.eigvals = {0.0, 0.0, 0.0};
        frame.sign_rule_applied = {SignRule::solver_default, SignRule::solver_default,
                                   SignRule::solver_default};
        frame.degenerate = true;
        return frame;
    }

    Mat3 cov;
    for (const Vec3& p : cloud) {
        const Vec3 d = p - mu;
        cov.m[0][0] += d.x * d.x;
        cov.m[0][1] += d.x * d.y;
        cov.m[0][2] += d.x * d.z;
        cov.m[1][1] += d.y * d.y;
        cov.m[1][2] += d.y * d.z;
        cov.m[2][2] += d.z * d.z;
    }
    const double inv = 1.0 / static_cast<double>(n - 1);
    cov.m[0][0] *= inv;
    cov.m[0][1] *= inv;
    cov.m[0][2] *= inv;
    cov.m[1][1] *= inv;
    cov.m[1][2] *= inv;
    cov.m[2][2] *= inv;
    cov.m[1][0] = cov.m[0][1];
    cov.m[2][0] = cov.m[0][2];
    cov.m[2][1] = cov.m[1][2];

    eig33_sym(cov, frame.eigvals, frame.eigvecs, frame.degenerate);
    for (double& l : frame.eigvals) l = std::max(l, 0.0);

    // Sign convention per axis: positive projection skewness; when skew is
    // below threshold, make max(q) >= |min(q)|; exact tie keeps the solver
    // output. Threshold scale is the RMS radius about the centroid.
    double rms2 = 0.0;
    for (const Vec3& p : cloud) rms2 += (p - mu).norm2();
    rms2 /= static_cast<double>(n);
    const double scale = std::sqrt(rms2);
    const double skew_tol = 1e-12 * scale * scale * scale;

    for (std::size_t axis = 0; axis < 3; ++axis) {
        const Vec3 v = frame.eigvecs.col(axis);
        double skew = 0.0;
        double qmax = -std::numeric_limits<double>::infinity();
        double qmin = std::numeric_limits<double>::infinity();
        for (const Vec3& p : cloud) {
            const double q = v.dot(p - mu);
            skew += q * q * q;
            qmax = std::max(qmax, q);
            qmin = std::min(qmin, q);
        }
        if (std::abs(skew) >= skew_tol && skew_tol > 0.0) {
            if (skew < 0.0) frame.eigvecs.set_col(axis, v * -1.0);
            frame.sign_rule_applied[axis] = SignRule::skewness;
        } else if (qmax != -qmin) {
            if (qmax < -qmin) frame.eigvecs.set_col(axis, v * -1.0);
            frame.sign_rule_applied[axis] = SignRule::max_magnitude;
        } else {
            frame.sign_rule_applied[axis] = SignRule::solver_default;
        }
    }
    return frame;
}

std::vector<Vec3> pca_project(const PointCloud& cloud, const PcaFrame& frame) {
    std::vector<Vec3> q(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i)
        q[i] = frame.eigvecs.tmul(cloud[i] - frame.centroid);
    return q;
}

IndexSet pca_sort(const PointCloud& cloud) {
    const PcaFrame frame = pca_axes(cloud);
    const std::vector<Vec3> q = pca_project(cloud, frame);
    IndexSet perm(cloud.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::stable_sort(perm.begin(), perm.end(),
                     [&](std::size_t a, std::size_t b) { return lex_less(q[a], q[b]); });
    return perm;
}

Decomposition decompose(const PointCloud& cloud, std::size_t subset_count,
                        DecomposeStrategy strategy, std::uint64_t seed) {
    require_nonempty(cloud);
    if (subset_count == 0) throw std::invalid_argument("subset count must be positive");
    if (subset_count > cloud.size())
        throw std::invalid_argument("subset count exceeds population");

    Decomposition out;
    out.strategy = strategy;
    if (strategy == DecomposeStrategy::pca_uniform) {
        out.sorted_perm = pca_sort(cloud);
    } else {
        out.sorted_perm.resize(cloud.size());
        std::iota(out.sorted_perm.begin(), out.sorted_perm.end(), std::size_t{0});
        Rng rng(seed);
        shuffle(out.sorted_perm, rng);
    }

    out.subsets.resize(subset_count);
    out.subset_positions.resize(subset_count);
    for (std::size_t pos = 0; pos < out.sorted_perm.size(); ++pos) {
        const std::size_t u = pos % subset_count;
        out.subsets[u].push_back(cloud[out.sorted_perm[pos]]);
        out.subset_positions[u].push_back(pos);
    }
    return out;
}

}  // namespace ppcmt
