#pragma once

#include <cstdint>
#include <cstddef>
#include <string>

namespace ppcmt {

enum class ConfigScale { desk, paper };

// Every hyperparameter of the pipeline. Loaded from JSON or built from the
// named presets; validate() enforces the dimension invariants.
struct ModelConfig {
    std::size_t n = 512;            // input points
    std::size_t g = 32;             // proxy groups
    std::size_t k = 16;             // group size
    std::size_t d_h = 64;           // hidden width
    std::size_t m = 2;              // encoder blocks
    std::size_t t = 2;              // decoder layers
    std::size_t i_candidates = 96;  // I' seed candidates
    std::size_t i_seeds = 64;       // I selected seeds
    std::size_t u = 4;              // reconstruction heads
    std::size_t r = 2;              // offsets per seed per head
    std::size_t k_lnp = 8;          // local aggregation neighbors
    std::size_t k_attn = 8;         // keys receiving the geometry bias
    std::size_t attn_heads = 4;
    std::size_t ssm_state = 8;      // SSM state size per channel
    bool attention_bias = false;    // geometry-aware additive bias (off = plain attention)
    std::uint64_t seed = 0;
    bool deterministic = true;

    std::size_t n_out() const { return u * i_seeds * r; }          // N_c
    std::size_t seed_residual() const;                             // R = round(I'/3)

    // Throws std::invalid_argument naming the violated invariant.
    void validate() const;
};

ModelConfig default_config(ConfigScale scale);

// JSON round trip. Accepts the preset names "desk"/"paper" in place of a
// file path on the load side (CLI convenience).
ModelConfig load_config(const std::string& path_or_preset);
void save_config(const std::string& path, const ModelConfig& config);

}  // namespace ppcmt
