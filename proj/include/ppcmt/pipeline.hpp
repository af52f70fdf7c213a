#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ppcmt/config.hpp"
#include "ppcmt/nn.hpp"
#include "ppcmt/types.hpp"
#include "ppcmt/weights.hpp"

namespace ppcmt {

struct StageSnapshots {
    std::vector<Vec3> centers;  // FPS centers
    Tensor extracted;           // F, G x D
    Tensor encoded;             // E, G x D
    Tensor seed_feats;          // S, I x D
    Tensor decoded;             // D, I x D
};

struct CompletionResult {
    std::vector<Vec3> candidates;     // I' x 3
    PointCloud seeds;                 // P0, I x 3
    std::vector<PointCloud> parts;    // U clouds, I*r each
    PointCloud output;                // Pout, N_c points
    std::optional<StageSnapshots> stages;
};

// Full forward pass: FPS/KNN grouping, point MLP, Mamba encoder, seed
// generator, transformer decoder, multi-head reconstruction. The input must
// hold exactly config.n points (pad or subsample first).
CompletionResult complete(const PointCloud& cloud, const ModelConfig& config,
                          const WeightStore& weights, bool capture_stages = false);

enum class ShapeKind { sphere, cuboid, cylinder, torus };

// Area-uniform surface samples, centered at the origin with unit
// characteristic radius.
PointCloud synth_shape(ShapeKind kind, std::size_t n, std::uint64_t seed);

struct CropResult {
    PointCloud partial;
    PointCloud missing;
    Vec3 viewpoint;
};

// Removes the floor(fraction*N) points nearest to a viewpoint drawn
// uniformly on the unit sphere. partial + missing == cloud, multiset-exact.
CropResult crop_viewpoint(const PointCloud& cloud, double fraction, std::uint64_t seed);
// Same with a caller-supplied viewpoint.
CropResult crop_viewpoint_at(const PointCloud& cloud, double fraction, const Vec3& viewpoint);

}  // namespace ppcmt
