#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "intragen/config.hpp"
#include "intragen/image.hpp"
#include "intragen/rng.hpp"
#include "intragen/schedule.hpp"
#include "intragen/tensor.hpp"

namespace intragen {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

enum class CondMode { none, sparse, sparse_id };

inline const char* to_string(CondMode mode) {
    switch (mode) {
        case CondMode::none: return "none";
        case CondMode::sparse: return "sparse";
        case CondMode::sparse_id: return "sparse_id";
    }
    return "?";
}

inline CondMode cond_mode_from_string(const std::string& name) {
    if (name == "none") return CondMode::none;
    if (name == "sparse") return CondMode::sparse;
    if (name == "sparse_id") return CondMode::sparse_id;
    throw std::invalid_argument("unknown conditioning mode '" + name + "'");
}

// Dense latent grid [frames, height, width, channels], double storage; cast
// to the model scalar at graph boundaries.
struct LatentVideo {
    int frames = 0;
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<double> data;

    LatentVideo() = default;
    LatentVideo(int f, int h, int w, int c)
        : frames(f), height(h), width(w), channels(c),
          data(static_cast<std::size_t>(f) * h * w * c, 0.0) {}

    std::size_t size() const { return data.size(); }
    Shape shape() const { return {frames, height, width, channels}; }
};

struct DitConfig {
    // data geometry
    int frames = 16;
    int width = 32;
    int height = 32;
    int channels = 3;
    int pool = 2;  // stub-VAE pooling factor, no temporal compression
    // transformer
    int patch = 2;   // k
    int embed = 64;  // L
    int blocks = 4;
    int heads = 4;
    // diffusion / optimization
    int diffusion_steps = 200;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    // conditioning pathway
    CondMode cond = CondMode::sparse_id;
    double sigma = 2.0;
    double v_max = 4.0;
    int point_radius = 1;

    int latent_h() const { return height / pool; }
    int latent_w() const { return width / pool; }
    int patch_dim() const { return patch * patch * channels; }
    int tokens_per_frame() const { return (latent_h() / patch) * (latent_w() / patch); }
    int token_total() const { return frames * tokens_per_frame(); }

    void validate() const {
        if (frames < 1 || width < 1 || height < 1 || channels < 1)
            throw std::invalid_argument("config: dims must be positive");
        if (pool < 1 || width % pool != 0 || height % pool != 0)
            throw std::invalid_argument("config: video dims must divide by the pool factor");
        if (patch < 1 || latent_h() % patch != 0 || latent_w() % patch != 0)
            throw std::invalid_argument("config: latent dims must divide by the patch size");
        if (embed < 1 || blocks < 1 || heads < 1)
            throw std::invalid_argument("config: embed/blocks/heads must be positive");
        if (embed % heads != 0) throw std::invalid_argument("config: embed must divide by heads");
        if (embed % 2 != 0) throw std::invalid_argument("config: embed must be even");
        if (diffusion_steps < 1) throw std::invalid_argument("config: diffusion steps >= 1");
        if (!(lr > 0.0)) throw std::invalid_argument("config: learning rate must be positive");
    }

    KeyValueConfig to_kv() const;
    static DitConfig from_kv(const KeyValueConfig& kv);
};

inline KeyValueConfig DitConfig::to_kv() const {
    KeyValueConfig kv;
    kv.set("frames", std::to_string(frames));
    kv.set("width", std::to_string(width));
    kv.set("height", std::to_string(height));
    kv.set("channels", std::to_string(channels));
    kv.set("pool", std::to_string(pool));
    kv.set("patch", std::to_string(patch));
    kv.set("embed", std::to_string(embed));
    kv.set("blocks", std::to_string(blocks));
    kv.set("heads", std::to_string(heads));
    kv.set("diffusion_steps", std::to_string(diffusion_steps));
    const auto fmt = [](double v) {
        std::ostringstream s;
        s.precision(17);
        s << v;
        return s.str();
    };
    kv.set("lr", fmt(lr));
    kv.set("seed", std::to_string(seed));
    kv.set("cond", to_string(cond));
    kv.set("sigma", fmt(sigma));
    kv.set("v_max", fmt(v_max));
    kv.set("point_radius", std::to_string(point_radius));
    return kv;
}

inline DitConfig DitConfig::from_kv(const KeyValueConfig& kv) {
    DitConfig c;
    c.frames = static_cast<int>(kv.get_int("frames", c.frames));
    c.width = static_cast<int>(kv.get_int("width", c.width));
    c.height = static_cast<int>(kv.get_int("height", c.height));
    c.channels = static_cast<int>(kv.get_int("channels", c.channels));
    c.pool = static_cast<int>(kv.get_int("pool", c.pool));
    c.patch = static_cast<int>(kv.get_int("patch", c.patch));
    c.embed = static_cast<int>(kv.get_int("embed", c.embed));
    c.blocks = static_cast<int>(kv.get_int("blocks", c.blocks));
    c.heads = static_cast<int>(kv.get_int("heads", c.heads));
    c.diffusion_steps = static_cast<int>(kv.get_int("diffusion_steps", c.diffusion_steps));
    c.lr = kv.get_double("lr", c.lr);
    c.seed = kv.get_u64("seed", c.seed);
    c.cond = cond_mode_from_string(kv.get("cond", to_string(c.cond)));
    c.sigma = kv.get_double("sigma", c.sigma);
    c.v_max = kv.get_double("v_max", c.v_max);
    c.point_radius = static_cast<int>(kv.get_int("point_radius", c.point_radius));
    c.validate();
    return c;
}

// ---- stub VAE ------------------------------------------------------------

// Per-channel s x s average pooling; no temporal compression.
inline LatentVideo vae_stub_encode(const std::vector<ImageF>& video, int pool) {
    if (video.empty()) throw std::invalid_argument("vae_stub_encode: empty video");
    const int h = video.front().height, w = video.front().width, c = video.front().channels;
    if (pool < 1 || h % pool != 0 || w % pool != 0)
        throw std::invalid_argument("vae_stub_encode: dims not divisible by pool factor");
    LatentVideo latent(static_cast<int>(video.size()), h / pool, w / pool, c);
    const double inv = 1.0 / (static_cast<double>(pool) * pool);
    std::size_t idx = 0;
    for (const auto& frame : video) {
        if (frame.height != h || frame.width != w || frame.channels != c)
            throw std::invalid_argument("vae_stub_encode: inconsistent frame shapes");
        for (int y = 0; y < h / pool; ++y)
            for (int x = 0; x < w / pool; ++x)
                for (int ch = 0; ch < c; ++ch) {
                    double acc = 0.0;
                    for (int dy = 0; dy < pool; ++dy)
                        for (int dx = 0; dx < pool; ++dx)
                            acc += frame.at(x * pool + dx, y * pool + dy, ch);
                    latent.data[idx++] = acc * inv;
                }
    }
    return latent;
}

// Nearest-neighbor upsampling; exact inverse of encode on pool-constant
// inputs.
inline std::vector<ImageF> vae_stub_decode(const LatentVideo& latent, int pool) {
    if (pool < 1) throw std::invalid_argument("vae_stub_decode: bad pool factor");
    std::vector<ImageF> video;
    video.reserve(static_cast<std::size_t>(latent.frames));
    std::size_t idx = 0;
    for (int f = 0; f < latent.frames; ++f) {
        ImageF frame(latent.width * pool, latent.height * pool, latent.channels);
        for (int y = 0; y < latent.height; ++y)
            for (int x = 0; x < latent.width; ++x)
                for (int ch = 0; ch < latent.channels; ++ch) {
                    const double v = latent.data[idx++];
                    for (int dy = 0; dy < pool; ++dy)
                        for (int dx = 0; dx < pool; ++dx)
                            frame.at(x * pool + dx, y * pool + dy, ch) = v;
                }
        video.push_back(std::move(frame));
    }
    return video;
}

// ---- noising (forward process) --------------------------------------------

// out = sqrt(alpha_bar[t]) * z + sqrt(1 - alpha_bar[t]) * eps; t = 0 returns
// z exactly.
template <typename Vec>
Vec add_noise(const Vec& z, int t, const Vec& eps, const NoiseSchedule& sched) {
    if (t < 0 || t > sched.steps)
        throw std::invalid_argument("add_noise: t out of range [0, " +
                                    std::to_string(sched.steps) + "]");
    if (z.size() != eps.size()) throw std::invalid_argument("add_noise: shape mismatch");
    const double ab = sched.alpha_bar[static_cast<std::size_t>(t)];
    const double signal = std::sqrt(ab);
    const double noise = std::sqrt(1.0 - ab);
    Vec out = z;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<typename Vec::value_type>(signal * z[i] + noise * eps[i]);
    return out;
}

inline LatentVideo add_noise(const LatentVideo& z, int t, const LatentVideo& eps,
                             const NoiseSchedule& sched) {
    if (z.shape() != eps.shape()) throw std::invalid_argument("add_noise: shape mismatch");
    LatentVideo out = z;
    out.data = add_noise(z.data, t, eps.data, sched);
    return out;
}

// ---- graph-level building blocks ------------------------------------------

// Non-overlapping k x k patch extraction: [N, H, W, C] -> [N, S, k*k*C] with
// patches flattened in (dy, dx, c) order.
template <typename T>
int build_patch_extract(Graph<T>& g, int latent, int k) {
    const Shape& s = g.shape(latent);
    if (s.size() != 4) throw std::invalid_argument("patch_extract: latent must be rank 4");
    const int n = s[0], h = s[1], w = s[2], c = s[3];
    if (h % k != 0 || w % k != 0)
        throw std::invalid_argument("patch_extract: latent dims not divisible by patch size");
    const int gh = h / k, gw = w / k;
    int x = g.reshape(latent, {n, gh, k, gw, k, c});
    x = g.transpose(x, {0, 1, 3, 2, 4, 5});          // [N, gh, gw, k, k, C]
    return g.reshape(x, {n, gh * gw, k * k * c});    // [N, S, k^2 C]
}

// Patchify: extraction followed by the linear projection to L.
template <typename T>
int build_patchify(Graph<T>& g, int latent, int k, int weights, int bias = -1) {
    int tokens = g.matmul(build_patch_extract(g, latent, k), weights);
    if (bias >= 0) tokens = g.add(tokens, bias);
    return tokens;
}

// Inverse of patch extraction: [N, S, k*k*C] -> [N, H, W, C].
template <typename T>
int build_unpatch(Graph<T>& g, int tokens, int k, int latent_h, int latent_w, int channels) {
    const Shape& s = g.shape(tokens);
    if (s.size() != 3) throw std::invalid_argument("unpatch: tokens must be rank 3");
    const int n = s[0];
    const int gh = latent_h / k, gw = latent_w / k;
    int x = g.reshape(tokens, {n, gh, gw, k, k, channels});
    x = g.transpose(x, {0, 1, 3, 2, 4, 5});  // [N, gh, k, gw, k, C]
    return g.reshape(x, {n, latent_h, latent_w, channels});
}

// Spatial view: frames as batch, locations as sequence (identity layout).
template <typename T>
int build_spatial_reshape(Graph<T>& g, int tokens) {
    const Shape& s = g.shape(tokens);
    if (s.size() != 3) throw std::invalid_argument("spatial_reshape: tokens must be rank 3");
    return g.reshape(tokens, Shape(s));
}

// Temporal view: locations as batch, frames as sequence.
template <typename T>
int build_temporal_reshape(Graph<T>& g, int tokens) {
    const Shape& s = g.shape(tokens);
    if (s.size() != 3) throw std::invalid_argument("temporal_reshape: tokens must be rank 3");
    return g.transpose(tokens, {1, 0, 2});
}

// Sinusoidal timestep embedding of width `dim` (even).
inline std::vector<double> timestep_embedding(int t, int dim) {
    std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
    const int half = dim / 2;
    for (int i = 0; i < half; ++i) {
        const double freq = std::exp(-std::log(10000.0) * static_cast<double>(i) / half);
        e[static_cast<std::size_t>(i)] = std::sin(t * freq);
        e[static_cast<std::size_t>(i + half)] = std::cos(t * freq);
    }
    return e;
}

// ---- parameters ------------------------------------------------------------

template <typename T>
struct ParamStore {
    struct Entry {
        std::string name;
        Shape shape;
        std::vector<T> value;
        std::vector<T> adam_m;
        std::vector<T> adam_v;
    };
    std::vector<Entry> entries;

    int add(std::string name, Shape shape) {
        Entry e;
        e.name = std::move(name);
        e.shape = std::move(shape);
        e.value.assign(numel(e.shape), T(0));
        e.adam_m.assign(e.value.size(), T(0));
        e.adam_v.assign(e.value.size(), T(0));
        entries.push_back(std::move(e));
        return static_cast<int>(entries.size()) - 1;
    }

    Entry& operator[](int i) { return entries[static_cast<std::size_t>(i)]; }
    const Entry& operator[](int i) const { return entries[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return entries.size(); }
};

// Records attention softmax node ids of one forward build, for audits.
struct ForwardTrace {
    std::vector<int> spatial_softmax;
    std::vector<int> temporal_softmax;
};

// ---- the model --------------------------------------------------------------

// Factorized spatial/temporal diffusion transformer with additive timestep and
// condition injection. Parameter layout is fixed by registration order.
template <typename T>
class DitModel {
public:
    DitConfig cfg;
    ParamStore<T> params;

    explicit DitModel(const DitConfig& config) : cfg(config) {
        cfg.validate();
        register_params();
        init_weights();
    }

    // Emits one graph input node per parameter; index-aligned with `params`.
    std::vector<int> emit_params(Graph<T>& g) const {
        std::vector<int> nodes;
        nodes.reserve(params.size());
        for (const auto& e : params.entries) nodes.push_back(g.input(e.shape, e.value));
        return nodes;
    }

    // Condition tokens from encoded pose/ID latents (shape-aligned with the
    // visual tokens). id_latent is ignored unless cond == sparse_id.
    int build_cond_tokens(Graph<T>& g, const std::vector<int>& p, int pose_latent,
                          int id_latent) const {
        if (cfg.cond == CondMode::none)
            throw std::logic_error("build_cond_tokens called on an unconditioned model");
        int pose = build_patch_extract(g, pose_latent, cfg.patch);
        pose = g.add(g.matmul(pose, p[at("cond.pose.w1")]), p[at("cond.pose.b1")]);
        pose = g.gelu(pose);
        pose = g.add(g.matmul(pose, p[at("cond.pose.w2")]), p[at("cond.pose.b2")]);

        int fused;
        if (cfg.cond == CondMode::sparse_id) {
            int idt = build_patch_extract(g, id_latent, cfg.patch);
            idt = g.add(g.matmul(idt, p[at("cond.id.w1")]), p[at("cond.id.b1")]);
            idt = g.gelu(idt);
            idt = g.add(g.matmul(idt, p[at("cond.id.w2")]), p[at("cond.id.b2")]);
            // fusion on the concatenation, expressed as a split weight matrix
            fused = g.add(g.add(g.matmul(pose, p[at("cond.fuse.wp")]),
                                g.matmul(idt, p[at("cond.fuse.wi")])),
                          p[at("cond.fuse.b1")]);
        } else {
            fused = g.add(g.matmul(pose, p[at("cond.fuse.wp")]), p[at("cond.fuse.b1")]);
        }
        fused = g.gelu(fused);
        return g.add(g.matmul(fused, p[at("cond.fuse.w2")]), p[at("cond.fuse.b2")]);
    }

    // Noise prediction: latent [N, H', W', C] -> predicted noise, same shape.
    int build_noise_pred(Graph<T>& g, const std::vector<int>& p, int noisy_latent, int t,
                         std::optional<int> cond_tokens, ForwardTrace* trace = nullptr) const {
        if (t < 1 || t > cfg.diffusion_steps)
            throw std::invalid_argument("dit_forward: t out of range [1, " +
                                        std::to_string(cfg.diffusion_steps) + "]");
        int x = build_patchify(g, noisy_latent, cfg.patch, p[at("patchify.w")],
                               p[at("patchify.b")]);

        // timestep embedding projected to L, added to every token
        const auto emb = timestep_embedding(t, cfg.embed);
        std::vector<T> emb_t(emb.size());
        for (std::size_t i = 0; i < emb.size(); ++i) emb_t[i] = static_cast<T>(emb[i]);
        int e = g.input({1, cfg.embed}, std::move(emb_t));
        e = g.add(g.matmul(e, p[at("time.w")]), p[at("time.b")]);
        e = g.reshape(e, {cfg.embed});
        x = g.add(x, e);

        if (cond_tokens) x = g.add(x, *cond_tokens);

        for (int b = 0; b < cfg.blocks; ++b) {
            const std::string base = "block" + std::to_string(b);
            // pre-norm spatial attention
            int h = affine_norm(g, p, x, base + ".sp.ln");
            h = attention(g, p, h, base + ".sp", trace ? &trace->spatial_softmax : nullptr);
            x = g.add(x, h);
            // pre-norm temporal attention
            int xt = build_temporal_reshape(g, x);
            int ht = affine_norm(g, p, xt, base + ".tm.ln");
            ht = attention(g, p, ht, base + ".tm", trace ? &trace->temporal_softmax : nullptr);
            xt = g.add(xt, ht);
            x = g.transpose(xt, {1, 0, 2});
            // pre-norm MLP
            int m = affine_norm(g, p, x, base + ".mlp.ln");
            m = g.add(g.matmul(m, p[at(base + ".mlp.w1")]), p[at(base + ".mlp.b1")]);
            m = g.gelu(m);
            m = g.add(g.matmul(m, p[at(base + ".mlp.w2")]), p[at(base + ".mlp.b2")]);
            x = g.add(x, m);
        }

        x = g.add(g.matmul(x, p[at("out.w")]), p[at("out.b")]);
        return build_unpatch(g, x, cfg.patch, cfg.latent_h(), cfg.latent_w(), cfg.channels);
    }

    int param_index(const std::string& name) const { return at(name); }

private:
    std::map<std::string, int> index_;

    int at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::logic_error("unknown parameter " + name);
        return it->second;
    }

    int reg(const std::string& name, Shape shape) {
        const int idx = params.add(name, std::move(shape));
        index_[name] = idx;
        return idx;
    }

    void register_params() {
        const int L = cfg.embed;
        const int pd = cfg.patch_dim();
        reg("patchify.w", {pd, L});
        reg("patchify.b", {L});
        reg("time.w", {L, L});
        reg("time.b", {L});
        if (cfg.cond != CondMode::none) {
            reg("cond.pose.w1", {pd, L});
            reg("cond.pose.b1", {L});
            reg("cond.pose.w2", {L, L});
            reg("cond.pose.b2", {L});
            if (cfg.cond == CondMode::sparse_id) {
                reg("cond.id.w1", {pd, L});
                reg("cond.id.b1", {L});
                reg("cond.id.w2", {L, L});
                reg("cond.id.b2", {L});
                reg("cond.fuse.wi", {L, L});
            }
            reg("cond.fuse.wp", {L, L});
            reg("cond.fuse.b1", {L});
            reg("cond.fuse.w2", {L, L});
            reg("cond.fuse.b2", {L});
        }
        for (int b = 0; b < cfg.blocks; ++b) {
            const std::string base = "block" + std::to_string(b);
            for (const char* part : {".sp", ".tm"}) {
                reg(base + part + ".ln.g", {L});
                reg(base + part + ".ln.b", {L});
                reg(base + part + ".wq", {L, L});
                reg(base + part + ".bq", {L});
                reg(base + part + ".wk", {L, L});
                reg(base + part + ".bk", {L});
                reg(base + part + ".wv", {L, L});
                reg(base + part + ".bv", {L});
                reg(base + part + ".wo", {L, L});
                reg(base + part + ".bo", {L});
            }
            reg(base + ".mlp.ln.g", {L});
            reg(base + ".mlp.ln.b", {L});
            reg(base + ".mlp.w1", {L, 4 * L});
            reg(base + ".mlp.b1", {4 * L});
            reg(base + ".mlp.w2", {4 * L, L});
            reg(base + ".mlp.b2", {L});
        }
        reg("out.w", {L, pd});
        reg("out.b", {pd});
    }

    void init_weights() {
        Rng rng(derive_stream(cfg.seed, "init"));
        for (auto& e : params.entries) {
            const bool is_gain = e.name.size() > 5 && e.name.rfind(".ln.g") == e.name.size() - 5;
            const bool is_bias = e.shape.size() == 1 && !is_gain;
            const bool is_final = e.name == "out.w" || e.name == "out.b";
            if (is_final || is_bias) {
                e.value.assign(e.value.size(), T(0));
            } else if (is_gain) {
                e.value.assign(e.value.size(), T(1));
            } else {
                for (auto& v : e.value) v = static_cast<T>(0.02 * rng.normal());
            }
        }
    }

    int affine_norm(Graph<T>& g, const std::vector<int>& p, int x,
                    const std::string& base) const {
        int h = g.layer_norm(x);
        h = g.multiply(h, p[at(base + ".g")]);
        return g.add(h, p[at(base + ".b")]);
    }

    // Multi-head self-attention over [B, S, L].
    int attention(Graph<T>& g, const std::vector<int>& p, int x, const std::string& base,
                  std::vector<int>* softmax_nodes) const {
        const Shape s = g.shape(x);
        const int B = s[0], S = s[1], L = s[2];
        const int H = cfg.heads, Dh = L / cfg.heads;
        auto heads_view = [&](int v) {
            return g.transpose(g.reshape(v, {B, S, H, Dh}), {0, 2, 1, 3});  // [B, H, S, Dh]
        };
        int q = heads_view(g.add(g.matmul(x, p[at(base + ".wq")]), p[at(base + ".bq")]));
        int k = heads_view(g.add(g.matmul(x, p[at(base + ".wk")]), p[at(base + ".bk")]));
        int v = heads_view(g.add(g.matmul(x, p[at(base + ".wv")]), p[at(base + ".bv")]));
        int scores = g.scale(g.matmul(q, g.transpose(k, {0, 1, 3, 2})),
                             1.0 / std::sqrt(static_cast<double>(Dh)));
        int probs = g.softmax(scores);
        if (softmax_nodes) softmax_nodes->push_back(probs);
        int ctx = g.matmul(probs, v);                     // [B, H, S, Dh]
        ctx = g.reshape(g.transpose(ctx, {0, 2, 1, 3}), {B, S, L});
        return g.add(g.matmul(ctx, p[at(base + ".wo")]), p[at(base + ".bo")]);
    }
};

// ---- optimizer ----------------------------------------------------------------

template <typename T>
class AdamOptimizer {
public:
    explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                           double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(ParamStore<T>& params, const std::vector<std::vector<T>>& grads) {
        if (grads.size() != params.size())
            throw std::invalid_argument("optimizer: gradient count mismatch");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t i = 0; i < params.size(); ++i) {
            auto& e = params.entries[i];
            const auto& grad = grads[i];
            for (std::size_t j = 0; j < e.value.size(); ++j) {
                const double gj = static_cast<double>(grad[j]);
                const double m = beta1_ * e.adam_m[j] + (1.0 - beta1_) * gj;
                const double v = beta2_ * e.adam_v[j] + (1.0 - beta2_) * gj * gj;
                e.adam_m[j] = static_cast<T>(m);
                e.adam_v[j] = static_cast<T>(v);
                const double mh = m / bc1;
                const double vh = v / bc2;
                e.value[j] = static_cast<T>(e.value[j] - lr_ * mh / (std::sqrt(vh) + eps_));
            }
        }
    }

    long steps_taken() const { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

// ---- training -----------------------------------------------------------------

struct TrainSample {
    const LatentVideo* video = nullptr;
    const LatentVideo* pose = nullptr;  // required unless cond == none
    const LatentVideo* id = nullptr;    // required when cond == sparse_id
};

template <typename T>
class Trainer {
public:
    Trainer(DitModel<T>& model, NoiseSchedule schedule, std::uint64_t seed)
        : model_(model), sched_(std::move(schedule)),
          rng_(derive_stream(seed, "train")), adam_(model.cfg.lr) {}

    // One optimization step over a batch: per sample draw t ~ U[1, T] and
    // unit-normal eps, noise the latent, regress eps. Returns the batch loss.
    double step(const std::vector<TrainSample>& batch) {
        if (batch.empty()) throw std::invalid_argument("training step: empty batch");
        const auto& cfg = model_.cfg;
        Graph<T> g;
        const auto pnodes = model_.emit_params(g);

        int total = -1;
        for (const auto& sample : batch) {
            if (!sample.video) throw std::invalid_argument("training step: missing video latent");
            check_latent(*sample.video);
            const int t = 1 + static_cast<int>(rng_.below(
                                  static_cast<std::uint64_t>(cfg.diffusion_steps)));
            std::vector<T> eps(sample.video->size());
            for (auto& v : eps) v = static_cast<T>(rng_.normal());
            std::vector<T> zt(eps.size());
            const double ab = sched_.alpha_bar[static_cast<std::size_t>(t)];
            const double sa = std::sqrt(ab), sn = std::sqrt(1.0 - ab);
            for (std::size_t i = 0; i < zt.size(); ++i)
                zt[i] = static_cast<T>(sa * sample.video->data[i] + sn * eps[i]);

            const Shape latent_shape{cfg.frames, cfg.latent_h(), cfg.latent_w(), cfg.channels};
            const int noisy = g.input(latent_shape, std::move(zt));
            std::optional<int> cond;
            if (cfg.cond != CondMode::none) {
                if (!sample.pose)
                    throw std::invalid_argument("training step: missing pose latent");
                const int pose = g.input(latent_shape, cast_vec(sample.pose->data));
                int idn = pose;
                if (cfg.cond == CondMode::sparse_id) {
                    if (!sample.id)
                        throw std::invalid_argument("training step: missing id latent");
                    idn = g.input(latent_shape, cast_vec(sample.id->data));
                }
                cond = model_.build_cond_tokens(g, pnodes, pose, idn);
            }
            const int pred = model_.build_noise_pred(g, pnodes, noisy, t, cond);
            const int eps_node = g.input(latent_shape, std::move(eps));
            const int loss = g.mean_square_error(pred, eps_node);
            total = total < 0 ? loss : g.add(total, loss);
        }
        if (batch.size() > 1) total = g.scale(total, 1.0 / static_cast<double>(batch.size()));

        g.backward(total);
        const double loss_value = static_cast<double>(g.value(total)[0]);
        ++step_index_;
        if (!std::isfinite(loss_value))
            throw std::runtime_error("divergence at step " + std::to_string(step_index_));

        std::vector<std::vector<T>> grads;
        grads.reserve(pnodes.size());
        for (const int n : pnodes) grads.push_back(g.grad(n));
        adam_.step(model_.params, grads);
        return loss_value;
    }

    const NoiseSchedule& schedule() const { return sched_; }

private:
    DitModel<T>& model_;
    NoiseSchedule sched_;
    Rng rng_;
    AdamOptimizer<T> adam_;
    long step_index_ = 0;

    void check_latent(const LatentVideo& l) const {
        const auto& cfg = model_.cfg;
        if (l.frames != cfg.frames || l.height != cfg.latent_h() || l.width != cfg.latent_w() ||
            l.channels != cfg.channels)
            throw std::invalid_argument("training step: latent shape mismatch");
    }

    static std::vector<T> cast_vec(const std::vector<double>& src) {
        std::vector<T> out(src.size());
        for (std::size_t i = 0; i < src.size(); ++i) out[i] = static_cast<T>(src[i]);
        return out;
    }
};

// ---- sampling -----------------------------------------------------------------

struct CondLatents {
    LatentVideo pose;
    LatentVideo id;
};

// Ancestral denoising from pure noise, decoded through the stub VAE and
// clamped to [0, 1]. Deterministic for a fixed (params, cond, seed).
template <typename T>
std::vector<ImageF> sample_video(const DitModel<T>& model, const NoiseSchedule& sched,
                                 const CondLatents* cond, std::uint64_t seed) {
    const auto& cfg = model.cfg;
    if (sched.steps != cfg.diffusion_steps)
        throw std::invalid_argument("sample: schedule step count differs from model config");
    if (cfg.cond != CondMode::none && cond == nullptr)
        throw std::invalid_argument("sample: conditioned model needs condition latents");

    Rng rng(derive_stream(seed, "sample"));
    const Shape latent_shape{cfg.frames, cfg.latent_h(), cfg.latent_w(), cfg.channels};
    const std::size_t count = numel(latent_shape);
    std::vector<double> z(count);
    for (auto& v : z) v = rng.normal();

    for (int t = sched.steps; t >= 1; --t) {
        Graph<T> g;
        const auto pnodes = model.emit_params(g);
        std::vector<T> zt(count);
        for (std::size_t i = 0; i < count; ++i) zt[i] = static_cast<T>(z[i]);
        const int noisy = g.input(latent_shape, std::move(zt));
        std::optional<int> cond_tokens;
        if (cfg.cond != CondMode::none) {
            std::vector<T> pose(cond->pose.data.size());
            for (std::size_t i = 0; i < pose.size(); ++i)
                pose[i] = static_cast<T>(cond->pose.data[i]);
            const int pose_node = g.input(latent_shape, std::move(pose));
            int id_node = pose_node;
            if (cfg.cond == CondMode::sparse_id) {
                std::vector<T> idv(cond->id.data.size());
                for (std::size_t i = 0; i < idv.size(); ++i)
                    idv[i] = static_cast<T>(cond->id.data[i]);
                id_node = g.input(latent_shape, std::move(idv));
            }
            cond_tokens = model.build_cond_tokens(g, pnodes, pose_node, id_node);
        }
        const int pred = model.build_noise_pred(g, pnodes, noisy, t, cond_tokens);
        const auto& eps_hat = g.value(pred);

        const double beta = sched.betas[static_cast<std::size_t>(t)];
        const double alpha = 1.0 - beta;
        const double ab = sched.alpha_bar[static_cast<std::size_t>(t)];
        const double ab_prev = sched.alpha_bar[static_cast<std::size_t>(t - 1)];
        const double inv_sqrt_alpha = 1.0 / std::sqrt(alpha);
        const double eps_coef = beta / std::sqrt(1.0 - ab);
        const double sigma_t = t > 1 ? std::sqrt((1.0 - ab_prev) / (1.0 - ab) * beta) : 0.0;

        for (std::size_t i = 0; i < count; ++i) {
            double next = inv_sqrt_alpha * (z[i] - eps_coef * static_cast<double>(eps_hat[i]));
            if (t > 1) next += sigma_t * rng.normal();
            z[i] = next;
            if (!std::isfinite(next))
                throw std::runtime_error("non-finite latent at sampling step " + std::to_string(t));
        }
    }

    LatentVideo latent(cfg.frames, cfg.latent_h(), cfg.latent_w(), cfg.channels);
    latent.data = std::move(z);
    auto frames = vae_stub_decode(latent, cfg.pool);
    for (auto& f : frames)
        for (auto& v : f.data) v = std::clamp(v, 0.0, 1.0);
    return frames;
}

// ---- checkpoint I/O --------------------------------------------------------------

// Layout: magic "ITGN", u32 version, u32 config length + bytes (key = value
// lines), then per tensor: u32 name length, name, u32 rank, u64 dims, u64
// value count, f32 values. All integers little-endian.
template <typename T>
void save_checkpoint(const DitModel<T>& model, const std::string& path);

template <typename T>
DitModel<T> load_checkpoint(const std::string& path);

namespace detail {

template <typename U>
void write_raw(std::ostream& out, U v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(U));
}

template <typename U>
U read_raw(std::istream& in) {
    U v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(U));
    if (!in) throw std::runtime_error("checkpoint: unexpected end of file");
    return v;
}

}  // namespace detail

template <typename T>
void save_checkpoint(const DitModel<T>& model, const std::string& path) {
    std::ostringstream out(std::ios::binary);
    out.write("ITGN", 4);
    detail::write_raw<std::uint32_t>(out, 1);
    const std::string cfg = model.cfg.to_kv().dump();
    detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(cfg.size()));
    out.write(cfg.data(), static_cast<std::streamsize>(cfg.size()));
    for (const auto& e : model.params.entries) {
        detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
        out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
        detail::write_raw<std::uint32_t>(out, static_cast<std::uint32_t>(e.shape.size()));
        for (const int d : e.shape) detail::write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(d));
        detail::write_raw<std::uint64_t>(out, static_cast<std::uint64_t>(e.value.size()));
        for (const T v : e.value) detail::write_raw<float>(out, static_cast<float>(v));
    }
    const std::string bytes = out.str();
    // write through a .partial file so failures never leave a torn checkpoint
    const std::string partial = path + ".partial";
    {
        std::ofstream f(partial, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + partial);
        f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!f) throw std::runtime_error("short write to " + partial);
    }
    if (std::rename(partial.c_str(), path.c_str()) != 0)
        throw std::runtime_error("cannot rename " + partial);
}

template <typename T>
DitModel<T> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "ITGN", 4) != 0)
        throw std::runtime_error(path + ": not a checkpoint (bad magic)");
    const auto version = detail::read_raw<std::uint32_t>(in);
    if (version != 1) throw std::runtime_error(path + ": unsupported checkpoint version");
    const auto cfg_len = detail::read_raw<std::uint32_t>(in);
    std::string cfg_text(cfg_len, '\0');
    in.read(cfg_text.data(), cfg_len);
    if (!in) throw std::runtime_error(path + ": truncated config block");

    DitModel<T> model(DitConfig::from_kv(KeyValueConfig::parse(cfg_text)));
    for (auto& e : model.params.entries) {
        const auto name_len = detail::read_raw<std::uint32_t>(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        if (!in || name != e.name)
            throw std::runtime_error(path + ": tensor order mismatch, expected " + e.name);
        const auto rank = detail::read_raw<std::uint32_t>(in);
        if (rank != e.shape.size()) throw std::runtime_error(path + ": rank mismatch for " + name);
        for (const int d : e.shape) {
            const auto dim = detail::read_raw<std::uint64_t>(in);
            if (dim != static_cast<std::uint64_t>(d))
                throw std::runtime_error(path + ": dim mismatch for " + name);
        }
        const auto count = detail::read_raw<std::uint64_t>(in);
        if (count != e.value.size())
            throw std::runtime_error(path + ": element count mismatch for " + name);
        for (auto& v : e.value) v = static_cast<T>(detail::read_raw<float>(in));
    }
    return model;
}

}  // namespace intragen
