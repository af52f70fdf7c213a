#include "ppcmt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppcmt/assignment.hpp"
#include "ppcmt/core_geometry.hpp"

namespace ppcmt {

ChamferBreakdown chamfer(const PointCloud& P, const PointCloud& G) {
    const std::vector<double> d_pg = directed_nn_dists(P, G);
    const std::vector<double> d_gp = directed_nn_dists(G, P);

    ChamferBreakdown out;
    double sq_pg = 0.0, sq_gp = 0.0;
    for (double d : d_pg) {
        out.cd_l += d;
        sq_pg += d * d;
    }
    for (double d : d_gp) {
        out.cd_g += d;
        sq_gp += d * d;
    }
    out.cd_l /= static_cast<double>(P.size());
    out.cd_g /= static_cast<double>(G.size());
    out.cd_l1 = (out.cd_l + out.cd_g) / 2.0;
    out.cd_l2 = sq_pg / static_cast<double>(P.size()) + sq_gp / static_cast<double>(G.size());
    return out;
}

double dcd(const PointCloud& P, const PointCloud& G, double alpha) {
    require_nonempty(P);
    require_nonempty(G);
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");

    std::vector<double> d_pg, d_gp;
    IndexSet nn_pg, nn_gp;
    directed_nn(P, G, d_pg, nn_pg);
    directed_nn(G, P, d_gp, nn_gp);

    // NN multiplicities: how many points of P picked each g, and vice versa.
    std::vector<std::size_t> count_g(G.size(), 0), count_p(P.size(), 0);
    for (std::size_t j : nn_pg) ++count_g[j];
    for (std::size_t j : nn_gp) ++count_p[j];

    double term_p = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        const double w = std::exp(-alpha * d_pg[i] * d_pg[i]);
        term_p += 1.0 - w / static_cast<double>(count_g[nn_pg[i]]);
    }
    double term_g = 0.0;
    for (std::size_t i = 0; i < G.size(); ++i) {
        const double w = std::exp(-alpha * d_gp[i] * d_gp[i]);
        term_g += 1.0 - w / static_cast<double>(count_p[nn_gp[i]]);
    }
    return 0.5 * (term_p / static_cast<double>(P.size()) + term_g / static_cast<double>(G.size()));
}

EmdResult emd(const PointCloud& P, const PointCloud& G) {
    require_nonempty(P);
    require_nonempty(G);
    if (P.size() != G.size()) throw std::invalid_argument("EMD requires equal sizes");

    const std::size_t n = P.size();
    EmdResult out;
    if (n <= kEmdExactLimit) {
        std::vector<double> cost(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = dist(P[i], G[j]);
        const AssignmentResult sol = hungarian_assign(cost, n);
        out.value = sol.total_cost / static_cast<double>(n);
        out.exact = true;
    } else {
        double cmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) cmax = std::max(cmax, dist(P[i], G[0]));
        const double eps_final = std::max(1e-300, 1e-7 * cmax);
        const AssignmentResult sol = auction_assign(
            [&](std::size_t i, std::size_t j) { return dist(P[i], G[j]); }, n, eps_final);
        out.value = sol.total_cost / static_cast<double>(n);
        out.exact = false;
        out.epsilon = sol.epsilon;
    }
    return out;
}

double fscore(const PointCloud& P, const PointCloud& G, double tau) {
    require_nonempty(P);
    require_nonempty(G);
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");

    const std::vector<double> d_pg = directed_nn_dists(P, G);
    const std::vector<double> d_gp = directed_nn_dists(G, P);
    const auto frac_below = [tau](const std::vector<double>& d) {
        std::size_t hits = 0;
        for (double x : d) hits += x < tau ? 1 : 0;
        return static_cast<double>(hits) / static_cast<double>(d.size());
    };
    const double precision = frac_below(d_pg);
    const double recall = frac_below(d_gp);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double fidelity(const PointCloud& input, const PointCloud& output) {
    const std::vector<double> d = directed_nn_dists(input, output);
    double sum = 0.0;
    for (double x : d) sum += x;
    return sum / static_cast<double>(d.size());
}

double mmd(const PointCloud& output, const std::vector<PointCloud>& reference_set) {
    require_nonempty(output);
    if (reference_set.empty()) throw std::invalid_argument("empty reference set");
    double best = std::numeric_limits<double>::infinity();
    for (const PointCloud& ref : reference_set) best = std::min(best, chamfer(output, ref).cd_l1);
    return best;
}

double consistency(const std::vector<PointCloud>& frames) {
    if (frames.size() < 2) throw std::invalid_argument("consistency needs at least 2 frames");
    double sum = 0.0;
    for (std::size_t t = 0; t + 1 < frames.size(); ++t)
        sum += chamfer(frames[t], frames[t + 1]).cd_l1;
    return sum / static_cast<double>(frames.size() - 1);
}

double uniformity(const PointCloud& P, double p, std::size_t M) {
    require_nonempty(P);
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p must be in (0,1)");
    if (M == 0 || M > P.size()) throw std::invalid_argument("seed count out of range");

    const IndexSet seed_idx = fps(P, M);
    PointCloud seeds;
    seeds.reserve(M);
    for (std::size_t i : seed_idx) seeds.push_back(P[i]);

    const std::vector<IndexSet> subsets = ball_query(P, seeds, std::sqrt(p));
    const double n_hat = p * static_cast<double>(P.size());

    double total = 0.0;
    for (const IndexSet& subset : subsets) {
        const std::size_t sz = subset.size();
        if (sz <= 1) continue;  // no local structure to score
        const double imbalance =
            (static_cast<double>(sz) - n_hat) * (static_cast<double>(sz) - n_hat) / n_hat;

        const double d_hat = std::sqrt(2.0 * M_PI * p / (static_cast<double>(sz) * std::sqrt(3.0)));
        double clutter = 0.0;
        for (std::size_t j = 0; j < sz; ++j) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t l = 0; l < sz; ++l) {
                if (l == j) continue;
                best = std::min(best, dist2(P[subset[j]], P[subset[l]]));
            }
            const double d = std::sqrt(best);
            clutter += (d - d_hat) * (d - d_hat) / d_hat;
        }
        clutter /= static_cast<double>(sz);
        total += imbalance * clutter;
    }
    return total / static_cast<double>(M);
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
    require_nonempty(cloud);
    Vec3 mu{0, 0, 0};
    for (const Vec3& p : cloud) mu += p;
    mu = mu / static_cast<double>(cloud.size());
    double max_r = 0.0;
    for (const Vec3& p : cloud) max_r = std::max(max_r, (p - mu).norm());
    const double inv = max_r > 0.0 ? 1.0 / max_r : 1.0;
    PointCloud out;
    out.reserve(cloud.size());
    for (const Vec3& p : cloud) out.push_back((p - mu) * inv);
    return out;
}

void MetricReport::add(std::string name, double value, std::string convention,
                       std::vector<std::pair<std::string, double>> params) {
    entries.push_back({std::move(name), value, std::move(convention), std::move(params)});
}

void MetricReport::validate() const {
    for (const MetricEntry& e : entries) {
        if (!std::isfinite(e.value) || e.value < 0.0)
            throw std::domain_error("metric " + e.name + " out of range");
        if (e.name.rfind("fscore", 0) == 0 && e.value > 1.0)
            throw std::domain_error("fscore above 1");
        if (e.name.rfind("dcd", 0) == 0 && e.value > 1.0) throw std::domain_error("dcd above 1");
    }
}

}  // namespace ppcmt
