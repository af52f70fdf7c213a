#include "ppcmt/config.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ppcmt/types.hpp"

namespace ppcmt {

std::size_t ModelConfig::seed_residual() const {
    return static_cast<std::size_t>(
        std::llround(static_cast<double>(i_candidates) / 3.0));
}

void ModelConfig::validate() const {
    const auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (n == 0) fail("n must be positive");
    if (g == 0 || g > n) fail("g must satisfy 1 <= g <= n");
    if (k == 0 || k > n) fail("k must satisfy 1 <= k <= n");
    if (d_h == 0) fail("d_h must be positive");
    if (m == 0) fail("m must be positive");
    if (t == 0) fail("t must be positive");
    if (i_candidates == 0) fail("i_candidates must be positive");
    if (i_seeds == 0 || i_seeds > i_candidates) fail("i_seeds must satisfy 1 <= I <= I'");
    if (u == 0) fail("u must be positive");
    if (r == 0) fail("r must be positive");
    if (k_lnp == 0 || k_lnp > g) fail("k_lnp must satisfy 1 <= k_lnp <= g");
    if (k_attn == 0) fail("k_attn must be positive");
    if (attn_heads == 0 || d_h % attn_heads != 0) fail("d_h must be divisible by attn_heads");
    if (ssm_state == 0) fail("ssm_state must be positive");
}

ModelConfig default_config(ConfigScale scale) {
    ModelConfig c;
    if (scale == ConfigScale::desk) {
        // Chosen so every divisibility invariant holds and the full forward
        // runs in well under a second on one core. N_c = 4*64*2 = 512.
        c = ModelConfig{};
    } else {
        c.n = 2048;
        c.g = 128;
        c.k = 32;
        c.d_h = 384;
        c.m = 12;
        c.t = 6;
        c.i_candidates = 768;
        c.i_seeds = 512;
        c.u = 4;
        c.r = 8;  // N_c = 4*512*8 = 16384
        c.k_lnp = 8;
        c.k_attn = 8;
        c.attn_heads = 6;
        c.ssm_state = 16;
    }
    c.validate();
    return c;
}

namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ModelConfig load_config(const std::string& path_or_preset) {
    if (path_or_preset == "desk") return default_config(ConfigScale::desk);
    if (path_or_preset == "paper") return default_config(ConfigScale::paper);

    std::ifstream in(path_or_preset);
    if (!in) throw ParseError("cannot open config file: " + path_or_preset);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("config parse error in " + path_or_preset + ": " + e.what());
    }

    ModelConfig c = default_config(ConfigScale::desk);
    read_field(j, "n", c.n);
    read_field(j, "g", c.g);
    read_field(j, "k", c.k);
    read_field(j, "d_h", c.d_h);
    read_field(j, "m", c.m);
    read_field(j, "t", c.t);
    read_field(j, "i_candidates", c.i_candidates);
    read_field(j, "i_seeds", c.i_seeds);
    read_field(j, "u", c.u);
    read_field(j, "r", c.r);
    read_field(j, "k_lnp", c.k_lnp);
    read_field(j, "k_attn", c.k_attn);
    read_field(j, "attn_heads", c.attn_heads);
    read_field(j, "ssm_state", c.ssm_state);
    read_field(j, "attention_bias", c.attention_bias);
    read_field(j, "seed", c.seed);
    read_field(j, "deterministic", c.deterministic);
    if (j.contains("n_c")) {
        const std::size_t requested = j.at("n_c").get<std::size_t>();
        if (requested != c.u * c.i_seeds * c.r)
            throw std::invalid_argument("n_c must equal u * i_seeds * r");
    }
    c.validate();
    return c;
}

void save_config(const std::string& path, const ModelConfig& c) {
    json j;
    j["n"] = c.n;
    j["g"] = c.g;
    j["k"] = c.k;
    j["d_h"] = c.d_h;
    j["m"] = c.m;
    j["t"] = c.t;
    j["i_candidates"] = c.i_candidates;
    j["i_seeds"] = c.i_seeds;
    j["u"] = c.u;
    j["r"] = c.r;
    j["k_lnp"] = c.k_lnp;
    j["k_attn"] = c.k_attn;
    j["attn_heads"] = c.attn_heads;
    j["ssm_state"] = c.ssm_state;
    j["attention_bias"] = c.attention_bias;
    j["seed"] = c.seed;
    j["deterministic"] = c.deterministic;
    j["n_c"] = c.n_out();
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write config file: " + path);
    out << j.dump(2) << "\n";
}

}  // namespace ppcmt
