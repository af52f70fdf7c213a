#include "ppcmt/weights.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ppcmt/rng.hpp"
#include "ppcmt/types.hpp"

namespace ppcmt {

namespace {

void add_linear(std::vector<TensorSpec>& out, const std::string& prefix, std::size_t in,
                std::size_t n_out) {
    out.push_back({prefix + ".w", {in, n_out}, InitKind::uniform_fan, in});
    out.push_back({prefix + ".b", {n_out}, InitKind::uniform_fan, in});
}

void add_norm(std::vector<TensorSpec>& out, const std::string& prefix, std::size_t d) {
    out.push_back({prefix + ".g", {d}, InitKind::ones, 1});
    out.push_back({prefix + ".b", {d}, InitKind::zeros, 1});
}

void add_attention(std::vector<TensorSpec>& out, const std::string& prefix, std::size_t d,
                   std::size_t heads, bool with_bias) {
    add_linear(out, prefix + ".q", d, d);
    add_linear(out, prefix + ".k", d, d);
    add_linear(out, prefix + ".v", d, d);
    add_linear(out, prefix + ".o", d, d);
    if (with_bias) {
        add_linear(out, prefix + ".bias.fc1", 3, 16);
        add_linear(out, prefix + ".bias.fc2", 16, heads);
    }
}

void add_ssm(std::vector<TensorSpec>& out, const std::string& prefix, std::size_t d,
             std::size_t s) {
    out.push_back({prefix + ".a", {d, s}, InitKind::ssm_a, 1});
    out.push_back({prefix + ".wb", {d, s}, InitKind::uniform_fan, d});
    out.push_back({prefix + ".wc", {d, s}, InitKind::uniform_fan, d});
    out.push_back({prefix + ".dtw", {d}, InitKind::uniform_fan, 1});
    out.push_back({prefix + ".dtb", {d}, InitKind::dt_bias, 1});
    out.push_back({prefix + ".dskip", {d}, InitKind::ones, 1});
}

}  // namespace

std::vector<TensorSpec> expected_tensors(const ModelConfig& c) {
    const std::size_t d = c.d_h;
    std::vector<TensorSpec> out;

    // feature extractor: shared point MLP, pool, second MLP
    add_linear(out, "fx.mlp1.fc1", 3, d);
    add_linear(out, "fx.mlp1.fc2", d, d);
    add_linear(out, "fx.mlp2.fc1", d, d);
    add_linear(out, "fx.mlp2.fc2", d, d);

    // encoder: shared positional encoder + per-block LNP/bi-SSM
    add_linear(out, "enc.pos", 3, d);
    for (std::size_t b = 0; b < c.m; ++b) {
        const std::string p = "enc.b" + std::to_string(b);
        add_norm(out, p + ".ln1", d);
        add_linear(out, p + ".lnp.fc1", d, d);
        add_linear(out, p + ".lnp.fc2", d, d);
        add_norm(out, p + ".ln2", d);
        add_ssm(out, p + ".ssm.fwd", d, c.ssm_state);
        add_ssm(out, p + ".ssm.bwd", d, c.ssm_state);
    }

    // seed generator
    const std::size_t concat_in = d + 3 * c.g;
    add_linear(out, "sg.mlp.fc1", concat_in, 2 * d);
    add_linear(out, "sg.mlp.fc2", 2 * d, 3 * c.i_candidates);
    add_linear(out, "sg.res", concat_in, 3 * c.seed_residual());
    add_linear(out, "sg.score.fc1", 3, d);
    add_linear(out, "sg.score.fc2", d, 1);
    add_linear(out, "sg.embed", 3, d);
    add_linear(out, "sg.feat.fc1", 2 * d, d);
    add_linear(out, "sg.feat.fc2", d, d);

    // transformer decoder
    for (std::size_t t = 0; t < c.t; ++t) {
        const std::string p = "dec.l" + std::to_string(t);
        add_norm(out, p + ".ln_sa", d);
        add_attention(out, p + ".sa", d, c.attn_heads, c.attention_bias);
        add_norm(out, p + ".ln_ca_q", d);
        add_norm(out, p + ".ln_ca_kv", d);
        add_attention(out, p + ".ca", d, c.attn_heads, c.attention_bias);
        add_norm(out, p + ".ln_ffn", d);
        add_linear(out, p + ".ffn.fc1", d, 4 * d);
        add_linear(out, p + ".ffn.fc2", 4 * d, d);
    }

    // multi-head reconstructor
    add_linear(out, "rc.pre.fc1", d, d);
    add_linear(out, "rc.pre.fc2", d, d);
    add_linear(out, "rc.embed", 3, d);
    add_linear(out, "rc.psi.fc1", 3 * d, 2 * d);
    add_linear(out, "rc.psi.fc2", 2 * d, c.u * d);
    for (std::size_t h = 0; h < c.u; ++h) {
        const std::string p = "rc.h" + std::to_string(h);
        add_linear(out, p + ".fc1", d, d);
        add_linear(out, p + ".fc2", d, 3 * c.r);
    }
    return out;
}

const Tensor& WeightStore::get(const std::string& name) const {
    const auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::invalid_argument("missing tensor: " + name);
    return it->second;
}

Tensor& WeightStore::at(const std::string& name) {
    const auto it = tensors_.find(name);
    if (it == tensors_.end()) throw std::invalid_argument("missing tensor: " + name);
    return it->second;
}

WeightStore init_weights(const ModelConfig& config, std::uint64_t seed) {
    WeightStore store;
    for (const TensorSpec& spec : expected_tensors(config)) {
        Rng rng(seed ^ fnv1a64(spec.name));
        Tensor t(spec.shape);
        switch (spec.init) {
            case InitKind::uniform_fan: {
                const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
                for (double& v : t.data)
                    v = static_cast<double>(static_cast<float>(rng.uniform(-bound, bound)));
                break;
            }
            case InitKind::ones:
                for (double& v : t.data) v = 1.0;
                break;
            case InitKind::zeros:
                break;
            case InitKind::ssm_a: {
                const std::size_t s = t.cols();
                for (std::size_t i = 0; i < t.numel(); ++i)
                    t.data[i] = -static_cast<double>(i % s + 1);
                break;
            }
            case InitKind::dt_bias:
                for (double& v : t.data)
                    v = static_cast<double>(static_cast<float>(rng.uniform(-4.0, -2.0)));
                break;
        }
        store.put(spec.name, std::move(t));
    }
    return store;
}

void validate_weights(const WeightStore& store, const ModelConfig& config) {
    const std::vector<TensorSpec> expected = expected_tensors(config);
    std::map<std::string, const TensorSpec*> by_name;
    for (const TensorSpec& spec : expected) by_name[spec.name] = &spec;

    for (const auto& [name, tensor] : store.tensors()) {
        const auto it = by_name.find(name);
        if (it == by_name.end()) throw std::invalid_argument("unknown tensor: " + name);
        if (tensor.shape != it->second->shape)
            throw std::invalid_argument("shape mismatch for tensor: " + name);
    }
    for (const TensorSpec& spec : expected)
        if (!store.has(spec.name)) throw std::invalid_argument("missing tensor: " + spec.name);

    // value constraints: state matrices must decay
    for (const auto& [name, tensor] : store.tensors()) {
        if (name.size() > 2 && name.compare(name.size() - 2, 2, ".a") == 0 &&
            name.find(".ssm.") != std::string::npos) {
            for (double v : tensor.data)
                if (!(v < 0.0))
                    throw std::invalid_argument("non-negative state entry in tensor: " + name);
        }
    }
}

namespace {

void put_u16(std::ostream& out, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF)};
    out.write(b, 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
    out.write(b, 4);
}

void put_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

class Reader {
  public:
    Reader(std::istream& in, std::string path) : in_(in), path_(std::move(path)) {}

    std::uint8_t u8() {
        std::uint8_t v = 0;
        read(reinterpret_cast<char*>(&v), 1);
        return v;
    }
    std::uint16_t u16() {
        unsigned char b[2];
        read(reinterpret_cast<char*>(b), 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }
    std::uint32_t u32() {
        unsigned char b[4];
        read(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }
    float f32() {
        const std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string str(std::size_t len) {
        std::string s(len, '\0');
        read(s.data(), len);
        return s;
    }
    std::size_t offset() const { return offset_; }

  private:
    void read(char* dst, std::size_t count) {
        in_.read(dst, static_cast<std::streamsize>(count));
        if (static_cast<std::size_t>(in_.gcount()) != count) {
            std::ostringstream msg;
            msg << path_ << ": truncated payload at offset " << offset_;
            throw ParseError(msg.str());
        }
        offset_ += count;
    }

    std::istream& in_;
    std::string path_;
    std::size_t offset_ = 0;
};

}  // namespace

WeightStore read_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open weight file: " + path);
    Reader r(in, path);

    if (r.str(4) != "PWT1") throw ParseError(path + ": bad magic, expected PWT1");
    const std::uint32_t count = r.u32();

    WeightStore store;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint16_t name_len = r.u16();
        const std::string name = r.str(name_len);
        const std::uint8_t rank = r.u8();
        std::vector<std::size_t> shape(rank);
        for (auto& d : shape) d = r.u32();
        Tensor t(shape);
        for (double& v : t.data) {
            const float f = r.f32();
            if (!std::isfinite(f)) {
                std::ostringstream msg;
                msg << path << ": non-finite value in tensor " << name << " near offset "
                    << r.offset();
                throw ParseError(msg.str());
            }
            v = static_cast<double>(f);
        }
        store.put(name, std::move(t));
    }
    return store;
}

WeightStore read_weights(const std::string& path, const ModelConfig& config) {
    WeightStore store = read_weights(path);
    validate_weights(store, config);
    return store;
}

void write_weights(const std::string& path, const WeightStore& store) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write weight file: " + path);
    out.write("PWT1", 4);
    put_u32(out, static_cast<std::uint32_t>(store.tensors().size()));
    for (const auto& [name, tensor] : store.tensors()) {
        put_u16(out, static_cast<std::uint16_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        out.put(static_cast<char>(tensor.rank()));
        for (std::size_t d : tensor.shape) put_u32(out, static_cast<std::uint32_t>(d));
        for (double v : tensor.data) put_f32(out, static_cast<float>(v));
    }
    if (!out) throw ParseError("write failed: " + path);
}

}  // namespace ppcmt
