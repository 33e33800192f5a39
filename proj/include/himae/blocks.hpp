#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "himae/ops.hpp"
#include "himae/rng.hpp"

namespace himae {

enum class Variant { full, no_skip, plain_cnn };

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::full: return "full";
        case Variant::no_skip: return "no-skip";
        case Variant::plain_cnn: return "plain-cnn";
    }
    return "?";
}

inline Variant parse_variant(const std::string& s) {
    if (s == "full") return Variant::full;
    if (s == "no-skip" || s == "no_skip" || s == "noskip") return Variant::no_skip;
    if (s == "plain-cnn" || s == "plain_cnn" || s == "cnn") return Variant::plain_cnn;
    throw config_error("unknown variant: " + s);
}

struct Parameter {
    std::string name;
    Var var;
};

using ParamVisitor = std::function<void(const std::string&, Var&)>;
using StateVisitor = std::function<void(const std::string&, Tensor3&)>;

// Deterministic initialization: conv weights fan-in-scaled uniform with
// bound sqrt(1 / (kernel * in_channels)), biases zero, BN gamma 1 beta 0.
struct InitPolicy {
    std::uint64_t seed = 0;
};

namespace detail {

inline Tensor3 uniform_weight(int d0, int d1, int d2, int fan_in, Rng& rng) {
    const real_t bound = std::sqrt(1.0 / static_cast<real_t>(fan_in));
    std::uniform_real_distribution<real_t> dist(-bound, bound);
    Tensor3 w(d0, d1, d2);
    for (real_t& v : w.data) v = dist(rng);
    return w;
}

}  // namespace detail

inline real_t fan_in_bound(int kernel, int in_channels) {
    return std::sqrt(1.0 / (static_cast<real_t>(kernel) * in_channels));
}

struct Conv1dLayer {
    ConvSpec spec;
    Var w, b;

    Conv1dLayer() = default;
    Conv1dLayer(int ci, int co, int k, int s, int p, Rng& rng) {
        spec = ConvSpec{k, s, p, 0, ci, co};
        w = make_var(detail::uniform_weight(co, ci, k, k * ci, rng), true);
        b = make_var(Tensor3(co, 1, 1, 0.0), true);
    }
    Var operator()(const Var& x) const { return conv1d(x, w, b, spec); }
    void visit_params(const std::string& prefix, const ParamVisitor& fn) {
        fn(prefix + ".w", w);
        fn(prefix + ".b", b);
    }
};

struct ConvTranspose1dLayer {
    ConvSpec spec;
    Var w, b;

    ConvTranspose1dLayer() = default;
    ConvTranspose1dLayer(int ci, int co, int k, int s, int p, int op, Rng& rng) {
        spec = ConvSpec{k, s, p, op, ci, co};
        w = make_var(detail::uniform_weight(ci, co, k, k * ci, rng), true);
        b = make_var(Tensor3(co, 1, 1, 0.0), true);
    }
    Var operator()(const Var& x) const { return conv_transpose1d(x, w, b, spec); }
    void visit_params(const std::string& prefix, const ParamVisitor& fn) {
        fn(prefix + ".w", w);
        fn(prefix + ".b", b);
    }
};

struct BatchNorm1dLayer {
    int channels = 0;
    real_t eps = 1e-5;
    real_t momentum = 0.1;
    Var gamma, beta;
    BatchNormState state;

    BatchNorm1dLayer() = default;
    explicit BatchNorm1dLayer(int c) : channels(c), state(c) {
        gamma = make_var(Tensor3(1, c, 1, 1.0), true);
        beta = make_var(Tensor3(1, c, 1, 0.0), true);
    }
    Var operator()(const Var& x, Mode m) {
        return batch_norm1d(x, gamma, beta, state, m, eps, momentum);
    }
    void visit_params(const std::string& prefix, const ParamVisitor& fn) {
        fn(prefix + ".gamma", gamma);
        fn(prefix + ".beta", beta);
    }
    void visit_state(const std::string& prefix, const StateVisitor& fn) {
        fn(prefix + ".running_mean", state.running_mean);
        fn(prefix + ".running_var", state.running_var);
    }
};

// Downsampling stage. Full / no-skip: two k-convs (first strided), with a
// projection shortcut (1x conv, strided) in the full variant only. The
// plain variant is a single strided conv.
struct EncoderBlock {
    Variant variant = Variant::full;
    Conv1dLayer conv1, conv2, proj;
    BatchNorm1dLayer bn1, bn2, bnp;

    EncoderBlock() = default;
    EncoderBlock(int ci, int co, int k, int s, Variant v, Rng& rng) : variant(v) {
        const int p = k / 2;
        conv1 = Conv1dLayer(ci, co, k, s, p, rng);
        bn1 = BatchNorm1dLayer(co);
        if (variant != Variant::plain_cnn) {
            conv2 = Conv1dLayer(co, co, k, 1, p, rng);
            bn2 = BatchNorm1dLayer(co);
        }
        if (variant == Variant::full) {
            proj = Conv1dLayer(ci, co, 1, s, 0, rng);
            bnp = BatchNorm1dLayer(co);
        }
    }

    int out_length(int t_in) const { return conv1.spec.out_length(t_in); }

    Var forward(const Var& x, Mode m) {
        if (variant == Variant::plain_cnn) return gelu(bn1(conv1(x), m));
        Var h = gelu(bn1(conv1(x), m));
        h = bn2(conv2(h), m);
        if (variant == Variant::full) {
            Var r = bnp(proj(x), m);
            return gelu(add(h, r));
        }
        return gelu(h);
    }

    void visit_params(const std::string& prefix, const ParamVisitor& fn) {
        conv1.visit_params(prefix + ".conv1", fn);
        bn1.visit_params(prefix + ".bn1", fn);
        if (variant != Variant::plain_cnn) {
            conv2.visit_params(prefix + ".conv2", fn);
            bn2.visit_params(prefix + ".bn2", fn);
        }
        if (variant == Variant::full) {
            proj.visit_params(prefix + ".proj", fn);
            bnp.visit_params(prefix + ".bnp", fn);
        }
    }
    void visit_state(const std::string& prefix, const StateVisitor& fn) {
        bn1.visit_state(prefix + ".bn1", fn);
        if (variant != Variant::plain_cnn) bn2.visit_state(prefix + ".bn2", fn);
        if (variant == Variant::full) bnp.visit_state(prefix + ".bnp", fn);
    }
};

// Upsampling stage. Transposed conv doubles the length (up to the crop
// rule), then the skip is concatenated [upsampled; skip] and two stride-1
// convs refine. no-skip drops the concat; plain is deconv+BN+GELU only.
struct DecoderBlock {
    Variant variant = Variant::full;
    ConvTranspose1dLayer up;
    Conv1dLayer conv1, conv2;
    BatchNorm1dLayer bn1, bn2;

    DecoderBlock() = default;
    DecoderBlock(int ci, int co, int k, int s, Variant v, Rng& rng) : variant(v) {
        const int p = k / 2;
        up = ConvTranspose1dLayer(ci, co, k, s, p, s - 1, rng);
        if (variant != Variant::plain_cnn) {
            const int c1_in = (variant == Variant::full) ? 2 * co : co;
            conv1 = Conv1dLayer(c1_in, co, k, 1, p, rng);
            bn1 = BatchNorm1dLayer(co);
            conv2 = Conv1dLayer(co, co, k, 1, p, rng);
            bn2 = BatchNorm1dLayer(co);
        } else {
            bn1 = BatchNorm1dLayer(co);
        }
    }

    // target_length is the mirror encoder level's length; the upsampled
    // tensor is tail-cropped to it before any concat.
    Var forward(const Var& x, const Var& skip, int target_length, Mode m) {
        if (target_length < 1) throw contract_error("decoder: skip/target length < 1");
        Var h = up(x);
        h = crop_tail(h, target_length);
        if (variant == Variant::plain_cnn) return gelu(bn1(h, m));
        if (variant == Variant::full) {
            if (!skip) throw contract_error("decoder: missing skip input");
            h = concat_channels(h, skip);
        }
        h = gelu(bn1(conv1(h), m));
        return gelu(bn2(conv2(h), m));
    }

    void visit_params(const std::string& prefix, const ParamVisitor& fn) {
        up.visit_params(prefix + ".up", fn);
        if (variant != Variant::plain_cnn) {
            conv1.visit_params(prefix + ".conv1", fn);
            bn1.visit_params(prefix + ".bn1", fn);
            conv2.visit_params(prefix + ".conv2", fn);
            bn2.visit_params(prefix + ".bn2", fn);
        } else {
            bn1.visit_params(prefix + ".bn1", fn);
        }
    }
    void visit_state(const std::string& prefix, const StateVisitor& fn) {
        bn1.visit_state(prefix + ".bn1", fn);
        if (variant != Variant::plain_cnn) bn2.visit_state(prefix + ".bn2", fn);
    }
};

template <typename Block>
inline std::size_t count_parameters(Block& block) {
    std::size_t n = 0;
    block.visit_params("", [&](const std::string&, Var& v) { n += v->value.size(); });
    return n;
}

}  // namespace himae
