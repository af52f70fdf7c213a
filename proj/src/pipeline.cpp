#include "ppcmt/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ppcmt/core_geometry.hpp"
#include "ppcmt/rng.hpp"

namespace ppcmt {

CompletionResult complete(const PointCloud& cloud, const ModelConfig& config,
                          const WeightStore& weights, bool capture_stages) {
    config.validate();
    if (cloud.size() != config.n)
        throw std::invalid_argument("input size mismatch: expected " + std::to_string(config.n) +
                                    " points, got " + std::to_string(cloud.size()));
    for (const Vec3& p : cloud)
        if (!finite(p)) throw std::invalid_argument("non-finite coordinate");
    validate_weights(weights, config);

    const IndexSet centers = fps(cloud, config.g);
    const GroupedPatches patches = group_normalize(cloud, centers, config.k);
    const ProxySet extracted = pointnet_lite(patches, weights, config);
    const ProxySet encoded = mamba_encoder(extracted, weights, config);
    SeedGenOut gen = seed_generator(encoded, weights, config);
    const Tensor decoded =
        transformer_decoder(gen.seed_feats, gen.seeds, encoded, weights, config);
    ReconOut recon = multi_head_reconstruct(decoded, gen.seeds, weights, config);

    CompletionResult result;
    result.candidates = std::move(gen.candidates);
    result.seeds = std::move(gen.seeds);
    result.parts = std::move(recon.parts);
    result.output = std::move(recon.merged);
    if (capture_stages) {
        StageSnapshots snaps;
        snaps.centers = extracted.centers;
        snaps.extracted = extracted.features;
        snaps.encoded = encoded.features;
        snaps.seed_feats = std::move(gen.seed_feats);
        snaps.decoded = decoded;
        result.stages = std::move(snaps);
    }
    return result;
}

namespace {

Vec3 unit_sphere_point(Rng& rng) {
    const double z = 1.0 - 2.0 * rng.next_double();
    const double phi = 2.0 * M_PI * rng.next_double();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
}

PointCloud sample_sphere(std::size_t n, Rng& rng) {
    PointCloud cloud;
    cloud.reserve(n);
    for (std::size_t i = 0; i < n; ++i) cloud.push_back(unit_sphere_point(rng));
    return cloud;
}

PointCloud sample_cuboid(std::size_t n, Rng& rng) {
    // half extents; unit characteristic radius = the largest one
    const Vec3 h{1.0, 0.75, 0.5};
    const double areas[3] = {h.y * h.z, h.x * h.z, h.x * h.y};  // per axis-normal pair
    const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
    PointCloud cloud;
    cloud.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        double pick = rng.next_double() * total;
        int axis = 0;
        double sign = 1.0;
        for (int a = 0; a < 3; ++a) {
            if (pick < 2.0 * areas[a]) {
                axis = a;
                sign = pick < areas[a] ? 1.0 : -1.0;
                break;
            }
            pick -= 2.0 * areas[a];
        }
        Vec3 p;
        p[axis] = sign * h[axis];
        const int u_axis = (axis + 1) % 3;
        const int v_axis = (axis + 2) % 3;
        p[static_cast<std::size_t>(u_axis)] = rng.uniform(-h[static_cast<std::size_t>(u_axis)],
                                                          h[static_cast<std::size_t>(u_axis)]);
        p[static_cast<std::size_t>(v_axis)] = rng.uniform(-h[static_cast<std::size_t>(v_axis)],
                                                          h[static_cast<std::size_t>(v_axis)]);
        cloud.push_back(p);
    }
    return cloud;
}

PointCloud sample_cylinder(std::size_t n, Rng& rng) {
    // radius 1, z in [-1, 1]
    const double lateral = 2.0 * M_PI * 2.0;
    const double cap = M_PI;
    const double total = lateral + 2.0 * cap;
    PointCloud cloud;
    cloud.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double pick = rng.next_double() * total;
        const double theta = 2.0 * M_PI * rng.next_double();
        if (pick < lateral) {
            cloud.push_back({std::cos(theta), std::sin(theta), rng.uniform(-1.0, 1.0)});
        } else {
            const double r = std::sqrt(rng.next_double());  // area-uniform disc
            const double z = pick < lateral + cap ? 1.0 : -1.0;
            cloud.push_back({r * std::cos(theta), r * std::sin(theta), z});
        }
    }
    return cloud;
}

PointCloud sample_torus(std::size_t n, Rng& rng) {
    const double major = 1.0, minor = 0.35;
    PointCloud cloud;
    cloud.reserve(n);
    while (cloud.size() < n) {
        // area element goes as (major + minor*cos(psi)): rejection on psi
        const double psi = 2.0 * M_PI * rng.next_double();
        const double accept = (major + minor * std::cos(psi)) / (major + minor);
        if (rng.next_double() > accept) continue;
        const double theta = 2.0 * M_PI * rng.next_double();
        const double ring = major + minor * std::cos(psi);
        cloud.push_back({ring * std::cos(theta), ring * std::sin(theta), minor * std::sin(psi)});
    }
    return cloud;
}

}  // namespace

PointCloud synth_shape(ShapeKind kind, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("point count must be positive");
    Rng rng(seed);
    switch (kind) {
        case ShapeKind::sphere: return sample_sphere(n, rng);
        case ShapeKind::cuboid: return sample_cuboid(n, rng);
        case ShapeKind::cylinder: return sample_cylinder(n, rng);
        case ShapeKind::torus: return sample_torus(n, rng);
    }
    throw std::invalid_argument("unknown shape");
}

CropResult crop_viewpoint_at(const PointCloud& cloud, double fraction, const Vec3& viewpoint) {
    require_nonempty(cloud);
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("fraction must be in (0,1)");

    const std::size_t remove =
        static_cast<std::size_t>(std::floor(fraction * static_cast<double>(cloud.size())));

    std::vector<std::pair<double, std::size_t>> order(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) order[i] = {dist2(cloud[i], viewpoint), i};
    std::sort(order.begin(), order.end());  // ties toward the smaller index

    std::vector<char> removed(cloud.size(), 0);
    for (std::size_t j = 0; j < remove; ++j) removed[order[j].second] = 1;

    CropResult out;
    out.viewpoint = viewpoint;
    out.partial.reserve(cloud.size() - remove);
    out.missing.reserve(remove);
    for (std::size_t i = 0; i < cloud.size(); ++i)
        (removed[i] ? out.missing : out.partial).push_back(cloud[i]);
    return out;
}

CropResult crop_viewpoint(const PointCloud& cloud, double fraction, std::uint64_t seed) {
    Rng rng(seed);
    return crop_viewpoint_at(cloud, fraction, unit_sphere_point(rng));
}

}  // namespace ppcmt
