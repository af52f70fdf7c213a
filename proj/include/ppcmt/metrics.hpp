#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ppcmt/types.hpp"

namespace ppcmt {

// Evaluation metrics. Conventions, where the literature is split:
//  - cd_l1 is the MEAN of the two directed mean distances (benchmark-table
//    convention), cd_l / cd_g expose the raw directed terms.
//  - cd_l2 is the SUM of the two directed mean squared distances.
//  - emd is the MEAN matched distance under a min-cost perfect matching.

struct ChamferBreakdown {
    double cd_l = 0.0;   // mean over P of NN distance to G
    double cd_g = 0.0;   // mean over G of NN distance to P
    double cd_l1 = 0.0;  // (cd_l + cd_g) / 2
    double cd_l2 = 0.0;  // mean squared P->G + mean squared G->P
};

ChamferBreakdown chamfer(const PointCloud& P, const PointCloud& G);

// Density-aware Chamfer distance, bounded in [0,1]. Default alpha 1000.
double dcd(const PointCloud& P, const PointCloud& G, double alpha);

struct EmdResult {
    double value = 0.0;  // mean matched distance
    bool exact = true;   // false: auction epsilon-scaling path (|P| > 1024)
    double epsilon = 0.0;
};

// Equal-size clouds only. Exact Hungarian up to kEmdExactLimit points,
// auction approximation (mean abs error <= epsilon) above.
inline constexpr std::size_t kEmdExactLimit = 1024;
EmdResult emd(const PointCloud& P, const PointCloud& G);

// Harmonic mean of precision/recall at threshold tau (strict <).
double fscore(const PointCloud& P, const PointCloud& G, double tau);

// Mean over input points of NN distance to the output.
double fidelity(const PointCloud& input, const PointCloud& output);

// Minimum cd_l1 Chamfer between `output` and any reference cloud.
double mmd(const PointCloud& output, const std::vector<PointCloud>& reference_set);

// Mean cd_l1 Chamfer over consecutive frame pairs.
double consistency(const std::vector<PointCloud>& frames);

// Distribution uniformity: FPS seeds, ball queries of radius sqrt(p),
// imbalance x clutter per subset, averaged over M seeds. Subsets with <= 1
// point contribute 0. Clouds are NOT normalized here; callers pick the
// scale convention (sqrt(p) presumes unit-area scaling).
double uniformity(const PointCloud& P, double p, std::size_t M);

// Center to centroid, scale so the max radius is 1. Helper for the CLI's
// optional unit-sphere normalization.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

struct MetricEntry {
    std::string name;
    double value = 0.0;
    std::string convention;
    std::vector<std::pair<std::string, double>> params;
};

struct MetricReport {
    std::vector<MetricEntry> entries;

    void add(std::string name, double value, std::string convention = {},
             std::vector<std::pair<std::string, double>> params = {});
    // Finite, >= 0, fscore <= 1, dcd in [0,1]. Throws std::domain_error.
    void validate() const;
};

}  // namespace ppcmt
