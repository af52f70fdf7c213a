#pragma once

#include <cstddef>
#include <vector>

#include "ppcmt/types.hpp"

namespace ppcmt {

// Training loss over seeds, per-head parts, and the merged output:
//   total = CD_g(P0, G) + (1/U) sum_i [CD_l(P_i, G_i) + 2 CD_g(P_i, G_i)]
//                       +          [CD_l(Pout, G) + 2 CD_g(Pout, G)]
// The CD_g weight of 2 biases supervision toward global coverage.

struct LossBreakdown {
    double l_p0 = 0.0;
    std::vector<double> l_parts;
    double l_out = 0.0;
    double total = 0.0;
};

LossBreakdown total_loss(const PointCloud& P0, const std::vector<PointCloud>& parts,
                         const PointCloud& Pout, const PointCloud& G,
                         const std::vector<PointCloud>& G_parts);

struct LossGrad {
    std::vector<Vec3> p0;
    std::vector<std::vector<Vec3>> parts;
    std::vector<Vec3> pout;
};

// Subgradient of `total` w.r.t. every predicted coordinate, with nearest
// neighbor assignments held fixed. Pairs at exactly zero distance
// contribute zero (the documented subgradient choice).
LossGrad loss_grad(const PointCloud& P0, const std::vector<PointCloud>& parts,
                   const PointCloud& Pout, const PointCloud& G,
                   const std::vector<PointCloud>& G_parts);

}  // namespace ppcmt
