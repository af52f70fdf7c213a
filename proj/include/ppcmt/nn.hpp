#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ppcmt/config.hpp"
#include "ppcmt/tensor.hpp"
#include "ppcmt/types.hpp"
#include "ppcmt/weights.hpp"

namespace ppcmt {

// ---- dense primitives --------------------------------------------------
// Fixed accumulation order throughout (row by row, index ascending), so a
// forward pass is bit-reproducible.

Tensor matmul(const Tensor& x, const Tensor& w);                    // (R,I)x(I,O)
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);   // xW + b
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta);
void relu_inplace(Tensor& x);
void silu_inplace(Tensor& x);
double softplus(double x);
void softmax_rows_inplace(Tensor& x);
Tensor maxpool_rows(const Tensor& x);  // column-wise max -> 1 x C

Tensor to_matrix(const std::vector<Vec3>& pts);  // N x 3

// fc1 -> ReLU -> fc2, weights at {prefix}.fc1.{w,b} / {prefix}.fc2.{w,b}
Tensor mlp2(const WeightStore& store, const std::string& prefix, const Tensor& x);
// single layer at {prefix}.{w,b}
Tensor linear_named(const WeightStore& store, const std::string& prefix, const Tensor& x);

struct AttnWeights {
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
    static AttnWeights from(const WeightStore& store, const std::string& prefix);
};

// Standard pre-projection multi-head scaled dot-product attention.
// `logit_bias`, when present, has shape (heads, rows_q, rows_kv) and is
// added to the logits before softmax.
Tensor multi_head_attention(const Tensor& q_in, const Tensor& kv_in, const AttnWeights& w,
                            std::size_t heads, const Tensor* logit_bias = nullptr);

// ---- state space scan ----------------------------------------------------

enum class ScanMode { sequential, parallel };

// Inclusive scan of h_t = a[t] * h_{t-1} + b[t], h_0 = 0; the h_t land in b.
// `sequential` is the defining recurrence; `parallel` is a Hillis-Steele
// associative scan over (a, b) pairs with (a1,b1)∘(a2,b2) = (a1a2, a2b1+b2).
void linear_recurrence(std::vector<double>& a, std::vector<double>& b, ScanMode mode);

struct SsmParams {
    Tensor a;     // D x S, all entries < 0
    Tensor wb;    // D x S input projection
    Tensor wc;    // D x S output projection
    Tensor dtw;   // D, per-channel step-size weight
    Tensor dtb;   // D, per-channel step-size bias (pre-softplus)
    Tensor dskip; // D skip gain
    static SsmParams from(const WeightStore& store, const std::string& prefix);
};

// Selective scan: per step, delta = softplus(dtw*x + dtb); zero-order hold
// A_bar = exp(delta*A), B_bar = delta*(x@wb); y = (x@wc)^T h + dskip*x.
Tensor ssm_scan(const SsmParams& params, const Tensor& x, ScanMode mode);

// Forward scan plus re-reversed backward scan, averaged.
Tensor bi_ssm(const SsmParams& fwd, const SsmParams& bwd, const Tensor& x, ScanMode mode);

// ---- network stages ------------------------------------------------------

struct ProxySet {
    std::vector<Vec3> centers;  // G x 3
    Tensor features;            // G x D
};

// Shared point MLP on local offsets, max-pool over the group, second MLP.
ProxySet pointnet_lite(const GroupedPatches& patches, const WeightStore& store,
                       const ModelConfig& config);

// M blocks of (positional encoding + LNP local aggregation + bi-SSM), each
// with pre-norm residual wiring.
ProxySet mamba_encoder(const ProxySet& proxies, const WeightStore& store,
                       const ModelConfig& config);

struct SeedGenOut {
    std::vector<Vec3> candidates;  // I' predicted candidates
    std::vector<Vec3> seeds;       // I selected, descending score
    std::vector<double> scores;    // per candidate
    IndexSet selected;             // candidate index per seed
    Tensor seed_feats;             // I x D
};

// Candidate MLP over [pooled features, flattened centers], residual branch
// on the first round(I'/3) candidates, sigmoid scoring, top-I selection.
SeedGenOut seed_generator(const ProxySet& proxies, const WeightStore& store,
                          const ModelConfig& config);

// T pre-norm layers: self-attention over seeds, cross-attention into the
// encoder proxies, FFN. Geometry-aware additive bias (from coordinate
// differences, k_attn nearest keys) when config.attention_bias is set.
Tensor transformer_decoder(const Tensor& seed_feats, const std::vector<Vec3>& seed_coords,
                           const ProxySet& encoder_out, const WeightStore& store,
                           const ModelConfig& config);

struct ReconOut {
    std::vector<PointCloud> parts;  // U clouds of I*r points each
    PointCloud merged;              // parts concatenated in head order
};

// MLP&Divide into U per-head feature sets, then per-head offset MLPs; each
// part is seed-major (seed j contributes points j*r .. j*r+r-1).
ReconOut multi_head_reconstruct(const Tensor& decoded, const std::vector<Vec3>& seeds,
                                const WeightStore& store, const ModelConfig& config);

}  // namespace ppcmt
