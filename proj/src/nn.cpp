#include "ppcmt/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ppcmt/core_geometry.hpp"
#include "ppcmt/parallel.hpp"

namespace ppcmt {

// ---- dense primitives ------------------------------------------------

Tensor matmul(const Tensor& x, const Tensor& w) {
    if (x.rank() != 2 || w.rank() != 2 || x.cols() != w.rows())
        throw std::invalid_argument("matmul shape mismatch");
    Tensor y({x.rows(), w.cols()});
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double* xr = x.row(r);
        double* yr = y.row(r);
        for (std::size_t i = 0; i < x.cols(); ++i) {
            const double xv = xr[i];
            if (xv == 0.0) continue;
            const double* wr = w.row(i);
            for (std::size_t c = 0; c < w.cols(); ++c) yr[c] += xv * wr[c];
        }
    }
    return y;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    if (b.numel() != w.cols()) throw std::invalid_argument("bias shape mismatch");
    Tensor y = matmul(x, w);
    for (std::size_t r = 0; r < y.rows(); ++r) {
        double* yr = y.row(r);
        for (std::size_t c = 0; c < y.cols(); ++c) yr[c] += b.at(c);
    }
    return y;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta) {
    constexpr double kEps = 1e-5;
    const std::size_t d = x.cols();
    if (gamma.numel() != d || beta.numel() != d)
        throw std::invalid_argument("layer norm scale shape mismatch");
    Tensor y({x.rows(), d});
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double* xr = x.row(r);
        double mean = 0.0;
        for (std::size_t c = 0; c < d; ++c) mean += xr[c];
        mean /= static_cast<double>(d);
        double var = 0.0;
        for (std::size_t c = 0; c < d; ++c) var += (xr[c] - mean) * (xr[c] - mean);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + kEps);
        double* yr = y.row(r);
        for (std::size_t c = 0; c < d; ++c)
            yr[c] = (xr[c] - mean) * inv * gamma.at(c) + beta.at(c);
    }
    return y;
}

void relu_inplace(Tensor& x) {
    for (double& v : x.data) v = v > 0.0 ? v : 0.0;
}

void silu_inplace(Tensor& x) {
    for (double& v : x.data) v = v / (1.0 + std::exp(-v));
}

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

void softmax_rows_inplace(Tensor& x) {
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double* xr = x.row(r);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < x.cols(); ++c) mx = std::max(mx, xr[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
            xr[c] = std::exp(xr[c] - mx);
            sum += xr[c];
        }
        for (std::size_t c = 0; c < x.cols(); ++c) xr[c] /= sum;
    }
}

Tensor maxpool_rows(const Tensor& x) {
    Tensor y({1, x.cols()});
    for (std::size_t c = 0; c < x.cols(); ++c) y.at(0, c) = x.at(0, c);
    for (std::size_t r = 1; r < x.rows(); ++r) {
        const double* xr = x.row(r);
        for (std::size_t c = 0; c < x.cols(); ++c) y.at(0, c) = std::max(y.at(0, c), xr[c]);
    }
    return y;
}

Tensor to_matrix(const std::vector<Vec3>& pts) {
    Tensor m({pts.size(), 3});
    for (std::size_t i = 0; i < pts.size(); ++i) {
        m.at(i, 0) = pts[i].x;
        m.at(i, 1) = pts[i].y;
        m.at(i, 2) = pts[i].z;
    }
    return m;
}

Tensor mlp2(const WeightStore& store, const std::string& prefix, const Tensor& x) {
    Tensor h = linear(x, store.get(prefix + ".fc1.w"), store.get(prefix + ".fc1.b"));
    relu_inplace(h);
    return linear(h, store.get(prefix + ".fc2.w"), store.get(prefix + ".fc2.b"));
}

Tensor linear_named(const WeightStore& store, const std::string& prefix, const Tensor& x) {
    return linear(x, store.get(prefix + ".w"), store.get(prefix + ".b"));
}

AttnWeights AttnWeights::from(const WeightStore& store, const std::string& prefix) {
    return {store.get(prefix + ".q.w"), store.get(prefix + ".q.b"), store.get(prefix + ".k.w"),
            store.get(prefix + ".k.b"), store.get(prefix + ".v.w"), store.get(prefix + ".v.b"),
            store.get(prefix + ".o.w"), store.get(prefix + ".o.b")};
}

Tensor multi_head_attention(const Tensor& q_in, const Tensor& kv_in, const AttnWeights& w,
                            std::size_t heads, const Tensor* logit_bias) {
    const std::size_t d = q_in.cols();
    if (heads == 0 || d % heads != 0)
        throw std::invalid_argument("hidden width not divisible by head count");
    const std::size_t dk = d / heads;
    const std::size_t rq = q_in.rows();
    const std::size_t rkv = kv_in.rows();

    const Tensor q = linear(q_in, w.wq, w.bq);
    const Tensor k = linear(kv_in, w.wk, w.bk);
    const Tensor v = linear(kv_in, w.wv, w.bv);

    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
    Tensor mixed({rq, d});
    for (std::size_t h = 0; h < heads; ++h) {
        const std::size_t off = h * dk;
        Tensor logits({rq, rkv});
        for (std::size_t i = 0; i < rq; ++i) {
            for (std::size_t j = 0; j < rkv; ++j) {
                double dot = 0.0;
                for (std::size_t c = 0; c < dk; ++c) dot += q.at(i, off + c) * k.at(j, off + c);
                double l = dot * scale;
                if (logit_bias != nullptr) l += logit_bias->at((h * rq + i) * rkv + j);
                logits.at(i, j) = l;
            }
        }
        softmax_rows_inplace(logits);
        for (std::size_t i = 0; i < rq; ++i)
            for (std::size_t j = 0; j < rkv; ++j) {
                const double a = logits.at(i, j);
                for (std::size_t c = 0; c < dk; ++c) mixed.at(i, off + c) += a * v.at(j, off + c);
            }
    }
    return linear(mixed, w.wo, w.bo);
}

// ---- state space scan --------------------------------------------------

void linear_recurrence(std::vector<double>& a, std::vector<double>& b, ScanMode mode) {
    const std::size_t len = a.size();
    if (b.size() != len) throw std::invalid_argument("recurrence length mismatch");
    if (mode == ScanMode::sequential) {
        for (std::size_t t = 1; t < len; ++t) b[t] += a[t] * b[t - 1];
        return;
    }
    std::vector<double> a2(len), b2(len);
    for (std::size_t shift = 1; shift < len; shift <<= 1) {
        for (std::size_t t = 0; t < len; ++t) {
            if (t >= shift) {
                a2[t] = a[t - shift] * a[t];
                b2[t] = a[t] * b[t - shift] + b[t];
            } else {
                a2[t] = a[t];
                b2[t] = b[t];
            }
        }
        a.swap(a2);
        b.swap(b2);
    }
}

SsmParams SsmParams::from(const WeightStore& store, const std::string& prefix) {
    return {store.get(prefix + ".a"),   store.get(prefix + ".wb"),
            store.get(prefix + ".wc"),  store.get(prefix + ".dtw"),
            store.get(prefix + ".dtb"), store.get(prefix + ".dskip")};
}

Tensor ssm_scan(const SsmParams& params, const Tensor& x, ScanMode mode) {
    const std::size_t len = x.rows();
    const std::size_t d = x.cols();
    const std::size_t s = params.a.cols();
    if (params.a.rows() != d || !params.wb.same_shape({d, s}) || !params.wc.same_shape({d, s}) ||
        params.dtw.numel() != d || params.dtb.numel() != d || params.dskip.numel() != d)
        throw std::invalid_argument("ssm parameter shape mismatch");

    // per-step selective parameters
    Tensor delta({len, d});
    for (std::size_t t = 0; t < len; ++t)
        for (std::size_t c = 0; c < d; ++c) {
            const double dt = softplus(params.dtw.at(c) * x.at(t, c) + params.dtb.at(c));
            if (!(dt > 0.0)) throw std::invalid_argument("non-positive step size");
            delta.at(t, c) = dt;
        }
    const Tensor bproj = matmul(x, params.wb);  // len x s
    const Tensor cproj = matmul(x, params.wc);  // len x s

    Tensor y({len, d});
    const std::size_t grain = std::max<std::size_t>(1, 200000 / std::max<std::size_t>(1, len * s));
    parallel_for(d, [&](std::size_t c) {
        std::vector<double> abar(len), bbar(len);
        for (std::size_t j = 0; j < s; ++j) {
            const double a_cj = params.a.at(c, j);
            for (std::size_t t = 0; t < len; ++t) {
                const double dt = delta.at(t, c);
                abar[t] = std::exp(dt * a_cj);
                bbar[t] = dt * bproj.at(t, j) * x.at(t, c);
            }
            linear_recurrence(abar, bbar, mode);
            for (std::size_t t = 0; t < len; ++t) y.at(t, c) += cproj.at(t, j) * bbar[t];
        }
        const double skip = params.dskip.at(c);
        for (std::size_t t = 0; t < len; ++t) y.at(t, c) += skip * x.at(t, c);
    }, grain);
    return y;
}

Tensor bi_ssm(const SsmParams& fwd, const SsmParams& bwd, const Tensor& x, ScanMode mode) {
    const std::size_t len = x.rows();
    const Tensor y_fwd = ssm_scan(fwd, x, mode);

    Tensor x_rev({len, x.cols()});
    for (std::size_t t = 0; t < len; ++t)
        std::copy(x.row(len - 1 - t), x.row(len - 1 - t) + x.cols(), x_rev.row(t));
    const Tensor y_rev = ssm_scan(bwd, x_rev, mode);

    Tensor out({len, x.cols()});
    for (std::size_t t = 0; t < len; ++t)
        for (std::size_t c = 0; c < x.cols(); ++c)
            out.at(t, c) = 0.5 * (y_fwd.at(t, c) + y_rev.at(len - 1 - t, c));
    return out;
}

// ---- network stages ------------------------------------------------------

ProxySet pointnet_lite(const GroupedPatches& patches, const WeightStore& store,
                       const ModelConfig& config) {
    const std::size_t g = patches.group_count();
    const std::size_t k = patches.group_size();
    const std::size_t d = config.d_h;

    Tensor offsets({g * k, 3});
    for (std::size_t i = 0; i < g * k; ++i) {
        offsets.at(i, 0) = patches.local_offsets[i].x;
        offsets.at(i, 1) = patches.local_offsets[i].y;
        offsets.at(i, 2) = patches.local_offsets[i].z;
    }
    const Tensor per_point = mlp2(store, "fx.mlp1", offsets);  // (g*k) x d

    Tensor pooled({g, d});
    for (std::size_t gi = 0; gi < g; ++gi)
        for (std::size_t c = 0; c < d; ++c) {
            double mx = per_point.at(gi * k, c);
            for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, per_point.at(gi * k + j, c));
            pooled.at(gi, c) = mx;
        }

    ProxySet out;
    out.centers = patches.centers;
    out.features = mlp2(store, "fx.mlp2", pooled);
    return out;
}

namespace {

// LNP: gather k_lnp nearest proxies (by center distance), shared MLP on
// feature differences, max-pool, residual add.
Tensor lnp_aggregate(const Tensor& feats, const IndexMatrix& neighbors, const WeightStore& store,
                     const std::string& prefix) {
    const std::size_t g = feats.rows();
    const std::size_t d = feats.cols();
    const std::size_t k = neighbors.cols;

    Tensor diffs({g * k, d});
    for (std::size_t gi = 0; gi < g; ++gi)
        for (std::size_t j = 0; j < k; ++j) {
            const double* nb = feats.row(neighbors.at(gi, j));
            const double* self = feats.row(gi);
            double* row = diffs.row(gi * k + j);
            for (std::size_t c = 0; c < d; ++c) row[c] = nb[c] - self[c];
        }
    const Tensor mapped = mlp2(store, prefix, diffs);

    Tensor out({g, d});
    for (std::size_t gi = 0; gi < g; ++gi)
        for (std::size_t c = 0; c < d; ++c) {
            double mx = mapped.at(gi * k, c);
            for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, mapped.at(gi * k + j, c));
            out.at(gi, c) = feats.at(gi, c) + mx;
        }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] += b.data[i];
    return out;
}

}  // namespace

ProxySet mamba_encoder(const ProxySet& proxies, const WeightStore& store,
                       const ModelConfig& config) {
    const std::size_t g = proxies.centers.size();
    if (proxies.features.rows() != g || proxies.features.cols() != config.d_h)
        throw std::invalid_argument("proxy feature shape mismatch");

    Tensor pos = linear_named(store, "enc.pos", to_matrix(proxies.centers));
    silu_inplace(pos);

    const IndexMatrix neighbors = knn(proxies.centers, proxies.centers, config.k_lnp);
    // The sequential recurrence is the normative path; the parallel scan is
    // equally run-to-run stable but may differ from it by ~1e-5 relative.
    const ScanMode mode = config.deterministic ? ScanMode::sequential : ScanMode::parallel;

    Tensor z = add(proxies.features, pos);
    for (std::size_t b = 0; b < config.m; ++b) {
        const std::string p = "enc.b" + std::to_string(b);
        const Tensor normed =
            layer_norm(add(z, pos), store.get(p + ".ln1.g"), store.get(p + ".ln1.b"));
        const Tensor z_prime = add(lnp_aggregate(normed, neighbors, store, p + ".lnp"), z);

        const Tensor normed2 =
            layer_norm(z_prime, store.get(p + ".ln2.g"), store.get(p + ".ln2.b"));
        const Tensor mixed = bi_ssm(SsmParams::from(store, p + ".ssm.fwd"),
                                    SsmParams::from(store, p + ".ssm.bwd"), normed2, mode);
        z = add(mixed, z_prime);
    }

    return {proxies.centers, std::move(z)};
}

SeedGenOut seed_generator(const ProxySet& proxies, const WeightStore& store,
                          const ModelConfig& config) {
    const std::size_t d = config.d_h;
    const std::size_t g = proxies.centers.size();
    const std::size_t n_cand = config.i_candidates;
    const std::size_t n_seed = config.i_seeds;
    if (n_seed > n_cand) throw std::invalid_argument("i_seeds must satisfy 1 <= I <= I'");

    // [max-pooled features | flattened centers]
    const Tensor pooled = maxpool_rows(proxies.features);
    Tensor concat_in({1, d + 3 * g});
    std::copy(pooled.row(0), pooled.row(0) + d, concat_in.row(0));
    for (std::size_t gi = 0; gi < g; ++gi) {
        concat_in.at(0, d + 3 * gi) = proxies.centers[gi].x;
        concat_in.at(0, d + 3 * gi + 1) = proxies.centers[gi].y;
        concat_in.at(0, d + 3 * gi + 2) = proxies.centers[gi].z;
    }

    Tensor flat = mlp2(store, "sg.mlp", concat_in);  // 1 x 3I'
    // residual branch for the first R = round(I'/3) candidates
    const std::size_t r_cnt = config.seed_residual();
    const Tensor res = linear_named(store, "sg.res", concat_in);
    for (std::size_t i = 0; i < 3 * r_cnt && i < flat.numel(); ++i) flat.data[i] += res.at(i);

    SeedGenOut out;
    out.candidates.resize(n_cand);
    Tensor cand_m({n_cand, 3});
    for (std::size_t i = 0; i < n_cand; ++i) {
        out.candidates[i] = {flat.at(3 * i), flat.at(3 * i + 1), flat.at(3 * i + 2)};
        cand_m.at(i, 0) = out.candidates[i].x;
        cand_m.at(i, 1) = out.candidates[i].y;
        cand_m.at(i, 2) = out.candidates[i].z;
    }

    // sigmoid scoring, top-I by score, ties toward the lower candidate index
    Tensor score_pre = mlp2(store, "sg.score", cand_m);  // n_cand x 1
    out.scores.resize(n_cand);
    for (std::size_t i = 0; i < n_cand; ++i)
        out.scores[i] = 1.0 / (1.0 + std::exp(-score_pre.at(i, 0)));

    IndexSet order(n_cand);
    for (std::size_t i = 0; i < n_cand; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out.scores[a] > out.scores[b];
    });
    out.selected.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_seed));

    out.seeds.resize(n_seed);
    Tensor seed_m({n_seed, 3});
    for (std::size_t i = 0; i < n_seed; ++i) {
        out.seeds[i] = out.candidates[out.selected[i]];
        seed_m.at(i, 0) = out.seeds[i].x;
        seed_m.at(i, 1) = out.seeds[i].y;
        seed_m.at(i, 2) = out.seeds[i].z;
    }

    // seed features from pooled encoder context + SiLU-embedded coordinates
    Tensor embed = linear_named(store, "sg.embed", seed_m);
    silu_inplace(embed);
    Tensor feat_in({n_seed, 2 * d});
    for (std::size_t i = 0; i < n_seed; ++i) {
        std::copy(pooled.row(0), pooled.row(0) + d, feat_in.row(i));
        std::copy(embed.row(i), embed.row(i) + d, feat_in.row(i) + d);
    }
    out.seed_feats = mlp2(store, "sg.feat", feat_in);
    return out;
}

namespace {

// Additive logit bias from coordinate differences, restricted to the k_attn
// nearest keys per query. Zero elsewhere.
Tensor geometry_bias(const std::vector<Vec3>& q_coords, const std::vector<Vec3>& k_coords,
                     const WeightStore& store, const std::string& prefix,
                     const ModelConfig& config) {
    const std::size_t rq = q_coords.size();
    const std::size_t rk = k_coords.size();
    const std::size_t heads = config.attn_heads;
    const std::size_t kn = std::min(config.k_attn, rk);

    const IndexMatrix nearest = knn(k_coords, q_coords, kn);
    Tensor diffs({rq * kn, 3});
    for (std::size_t i = 0; i < rq; ++i)
        for (std::size_t j = 0; j < kn; ++j) {
            const Vec3 dv = q_coords[i] - k_coords[nearest.at(i, j)];
            diffs.at(i * kn + j, 0) = dv.x;
            diffs.at(i * kn + j, 1) = dv.y;
            diffs.at(i * kn + j, 2) = dv.z;
        }
    const Tensor mapped = mlp2(store, prefix, diffs);  // (rq*kn) x heads

    Tensor bias({heads, rq, rk});
    for (std::size_t i = 0; i < rq; ++i)
        for (std::size_t j = 0; j < kn; ++j)
            for (std::size_t h = 0; h < heads; ++h)
                bias.data[(h * rq + i) * rk + nearest.at(i, j)] = mapped.at(i * kn + j, h);
    return bias;
}

}  // namespace

Tensor transformer_decoder(const Tensor& seed_feats, const std::vector<Vec3>& seed_coords,
                           const ProxySet& encoder_out, const WeightStore& store,
                           const ModelConfig& config) {
    if (config.d_h % config.attn_heads != 0)
        throw std::invalid_argument("hidden width not divisible by head count");

    Tensor w = seed_feats;
    for (std::size_t t = 0; t < config.t; ++t) {
        const std::string p = "dec.l" + std::to_string(t);

        Tensor sa_bias, ca_bias;
        const Tensor* sa_bias_ptr = nullptr;
        const Tensor* ca_bias_ptr = nullptr;
        if (config.attention_bias) {
            sa_bias = geometry_bias(seed_coords, seed_coords, store, p + ".sa.bias", config);
            ca_bias = geometry_bias(seed_coords, encoder_out.centers, store, p + ".ca.bias", config);
            sa_bias_ptr = &sa_bias;
            ca_bias_ptr = &ca_bias;
        }

        const Tensor sa_in = layer_norm(w, store.get(p + ".ln_sa.g"), store.get(p + ".ln_sa.b"));
        w = add(w, multi_head_attention(sa_in, sa_in, AttnWeights::from(store, p + ".sa"),
                                        config.attn_heads, sa_bias_ptr));

        const Tensor ca_q =
            layer_norm(w, store.get(p + ".ln_ca_q.g"), store.get(p + ".ln_ca_q.b"));
        const Tensor ca_kv = layer_norm(encoder_out.features, store.get(p + ".ln_ca_kv.g"),
                                        store.get(p + ".ln_ca_kv.b"));
        w = add(w, multi_head_attention(ca_q, ca_kv, AttnWeights::from(store, p + ".ca"),
                                        config.attn_heads, ca_bias_ptr));

        const Tensor ffn_in =
            layer_norm(w, store.get(p + ".ln_ffn.g"), store.get(p + ".ln_ffn.b"));
        w = add(w, mlp2(store, p + ".ffn", ffn_in));
    }
    return w;
}

ReconOut multi_head_reconstruct(const Tensor& decoded, const std::vector<Vec3>& seeds,
                                const WeightStore& store, const ModelConfig& config) {
    const std::size_t n_seed = seeds.size();
    const std::size_t d = config.d_h;
    if (decoded.rows() != n_seed || decoded.cols() != d)
        throw std::invalid_argument("decoded feature shape mismatch");

    // MLP & Divide: [global context | decoded | seed embedding] -> U feature sets
    const Tensor pooled = maxpool_rows(mlp2(store, "rc.pre", decoded));
    Tensor embed = linear_named(store, "rc.embed", to_matrix(seeds));
    silu_inplace(embed);

    Tensor psi_in({n_seed, 3 * d});
    for (std::size_t i = 0; i < n_seed; ++i) {
        std::copy(pooled.row(0), pooled.row(0) + d, psi_in.row(i));
        std::copy(decoded.row(i), decoded.row(i) + d, psi_in.row(i) + d);
        std::copy(embed.row(i), embed.row(i) + d, psi_in.row(i) + 2 * d);
    }
    const Tensor divided = mlp2(store, "rc.psi", psi_in);  // n_seed x (U*d)

    ReconOut out;
    out.parts.resize(config.u);
    out.merged.reserve(config.u * n_seed * config.r);
    for (std::size_t h = 0; h < config.u; ++h) {
        Tensor head_in({n_seed, d});
        for (std::size_t i = 0; i < n_seed; ++i)
            std::copy(divided.row(i) + h * d, divided.row(i) + (h + 1) * d, head_in.row(i));
        const Tensor offsets = mlp2(store, "rc.h" + std::to_string(h), head_in);  // n_seed x 3r

        PointCloud& part = out.parts[h];
        part.reserve(n_seed * config.r);
        for (std::size_t i = 0; i < n_seed; ++i)
            for (std::size_t rho = 0; rho < config.r; ++rho)
                part.push_back(seeds[i] + Vec3{offsets.at(i, 3 * rho), offsets.at(i, 3 * rho + 1),
                                               offsets.at(i, 3 * rho + 2)});
        out.merged.insert(out.merged.end(), part.begin(), part.end());
    }
    return out;
}

}  // namespace ppcmt
