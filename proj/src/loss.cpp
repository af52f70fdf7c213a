#include "ppcmt/loss.hpp"

#include <stdexcept>

#include "ppcmt/core_geometry.hpp"

namespace ppcmt {

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double cd_l_term(const PointCloud& pred, const PointCloud& gt) {
    return mean(directed_nn_dists(pred, gt));
}

double cd_g_term(const PointCloud& pred, const PointCloud& gt) {
    return mean(directed_nn_dists(gt, pred));
}

// d/d pred of weight * mean_{a in pred} ||a - nn(a, gt)||
void accum_grad_pred_to_gt(const PointCloud& pred, const PointCloud& gt, double weight,
                           std::vector<Vec3>& grad) {
    std::vector<double> dists;
    IndexSet nearest;
    directed_nn(pred, gt, dists, nearest);
    const double w = weight / static_cast<double>(pred.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (dists[i] == 0.0) continue;  // subgradient 0 at the kink
        grad[i] += (pred[i] - gt[nearest[i]]) * (w / dists[i]);
    }
}

// d/d pred of weight * mean_{g in gt} ||g - nn(g, pred)||
void accum_grad_gt_to_pred(const PointCloud& pred, const PointCloud& gt, double weight,
                           std::vector<Vec3>& grad) {
    std::vector<double> dists;
    IndexSet nearest;
    directed_nn(gt, pred, dists, nearest);
    const double w = weight / static_cast<double>(gt.size());
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (dists[i] == 0.0) continue;
        grad[nearest[i]] += (pred[nearest[i]] - gt[i]) * (w / dists[i]);
    }
}

void check_shapes(const PointCloud& P0, const std::vector<PointCloud>& parts,
                  const PointCloud& Pout, const PointCloud& G,
                  const std::vector<PointCloud>& G_parts) {
    if (parts.size() != G_parts.size() || parts.empty())
        throw std::invalid_argument("part count mismatch");
    require_nonempty(P0);
    require_nonempty(Pout);
    require_nonempty(G);
    for (const PointCloud& c : parts) require_nonempty(c);
    for (const PointCloud& c : G_parts) require_nonempty(c);
}

}  // namespace

LossBreakdown total_loss(const PointCloud& P0, const std::vector<PointCloud>& parts,
                         const PointCloud& Pout, const PointCloud& G,
                         const std::vector<PointCloud>& G_parts) {
    check_shapes(P0, parts, Pout, G, G_parts);
    const std::size_t U = parts.size();

    LossBreakdown out;
    out.l_p0 = cd_g_term(P0, G);  // seeds: global coverage only
    out.l_parts.resize(U);
    double part_sum = 0.0;
    for (std::size_t i = 0; i < U; ++i) {
        out.l_parts[i] = cd_l_term(parts[i], G_parts[i]) + 2.0 * cd_g_term(parts[i], G_parts[i]);
        part_sum += out.l_parts[i];
    }
    out.l_out = cd_l_term(Pout, G) + 2.0 * cd_g_term(Pout, G);
    out.total = out.l_p0 + part_sum / static_cast<double>(U) + out.l_out;
    return out;
}

LossGrad loss_grad(const PointCloud& P0, const std::vector<PointCloud>& parts,
                   const PointCloud& Pout, const PointCloud& G,
                   const std::vector<PointCloud>& G_parts) {
    check_shapes(P0, parts, Pout, G, G_parts);
    const std::size_t U = parts.size();

    LossGrad grad;
    grad.p0.assign(P0.size(), Vec3{});
    grad.pout.assign(Pout.size(), Vec3{});
    grad.parts.resize(U);

    accum_grad_gt_to_pred(P0, G, 1.0, grad.p0);
    const double head_w = 1.0 / static_cast<double>(U);
    for (std::size_t i = 0; i < U; ++i) {
        grad.parts[i].assign(parts[i].size(), Vec3{});
        accum_grad_pred_to_gt(parts[i], G_parts[i], head_w, grad.parts[i]);
        accum_grad_gt_to_pred(parts[i], G_parts[i], 2.0 * head_w, grad.parts[i]);
    }
    accum_grad_pred_to_gt(Pout, G, 1.0, grad.pout);
    accum_grad_gt_to_pred(Pout, G, 2.0, grad.pout);
    return grad;
}

}  // namespace ppcmt
