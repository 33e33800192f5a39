#pragma once

#include <string>
#include <utility>
#include <vector>

#include "himae/blocks.hpp"

namespace himae {

struct HimaeConfig {
    std::vector<int> widths{16, 32, 64, 128, 256};
    int in_channels = 1;
    int input_length = 1000;
    int patch = 5;
    int kernel = 5;
    int stride = 2;
    Variant variant = Variant::full;

    int depth() const { return static_cast<int>(widths.size()); }

    void validate() const {
        if (widths.empty()) throw config_error("config: widths must be non-empty");
        for (int w : widths)
            if (w < 1) throw config_error("config: widths must be positive");
        if (in_channels < 1 || input_length < 1)
            throw config_error("config: bad input shape");
        if (kernel < 1 || stride < 1) throw config_error("config: bad kernel/stride");
        if (patch < 1 || input_length % patch != 0)
            throw config_error("config: patch must divide input length");
        long long min_len = 1;
        for (int i = 0; i < depth(); ++i) min_len *= stride;
        if (input_length < min_len)
            throw input_too_short("config: input length below 2^depth minimum");
    }

    // Encoder level lengths for a given input length.
    std::vector<int> level_lengths(int t_in) const {
        ConvSpec s{kernel, stride, kernel / 2, 0, 1, 1};
        std::vector<int> out;
        int t = t_in;
        for (std::size_t i = 0; i < widths.size(); ++i) {
            t = s.out_length(t);
            out.push_back(t);
        }
        return out;
    }
    std::vector<int> level_lengths() const { return level_lengths(input_length); }
};

struct ReceptiveFieldRow {
    std::string layer;
    int kernel = 0;
    int stride = 0;
    long long field = 0;  // R: input samples seen by one output unit
    long long jump = 0;   // J: input stride between adjacent output units
};

// Cumulative receptive field through the encoder main path, one row per
// convolution: R <- R + (k-1)*J_prev, J <- J_prev * s.
inline std::vector<ReceptiveFieldRow> receptive_field(const HimaeConfig& cfg) {
    cfg.validate();
    std::vector<ReceptiveFieldRow> rows;
    long long r = 1, j = 1;
    auto push = [&](const std::string& name, int k, int s) {
        r = r + static_cast<long long>(k - 1) * j;
        j = j * s;
        rows.push_back({name, k, s, r, j});
    };
    for (int i = 0; i < cfg.depth(); ++i) {
        const std::string base = "Enc" + std::to_string(i + 1);
        push(base + "-conv1", cfg.kernel, cfg.stride);
        if (cfg.variant != Variant::plain_cnn) push(base + "-conv2", cfg.kernel, 1);
    }
    return rows;
}

// (R, J) at each encoder block output, i.e. the granularity of pyramid
// level l.
inline std::vector<std::pair<long long, long long>> level_receptive_field(
    const HimaeConfig& cfg) {
    auto rows = receptive_field(cfg);
    const int per_block = cfg.variant == Variant::plain_cnn ? 1 : 2;
    std::vector<std::pair<long long, long long>> out;
    for (int i = 0; i < cfg.depth(); ++i) {
        const auto& row = rows[static_cast<std::size_t>((i + 1) * per_block - 1)];
        out.emplace_back(row.field, row.jump);
    }
    return out;
}

// Per-level feature maps at decreasing temporal resolution, plus the
// receptive field / jump each level corresponds to.
struct EmbeddingPyramid {
    std::vector<Tensor3> levels;
    std::vector<std::pair<long long, long long>> granularity;  // (R, J) per level
    int depth() const { return static_cast<int>(levels.size()); }
};

class Himae {
  public:
    HimaeConfig cfg;

    Himae(const HimaeConfig& config, const InitPolicy& policy) : cfg(config) {
        cfg.validate();
        Rng rng = make_rng(mix_seed(policy.seed, 0x11717ULL));
        int ci = cfg.in_channels;
        for (int w : cfg.widths) {
            enc_.emplace_back(ci, w, cfg.kernel, cfg.stride, cfg.variant, rng);
            ci = w;
        }
        for (int i = cfg.depth() - 1; i >= 1; --i)
            dec_.emplace_back(cfg.widths[static_cast<std::size_t>(i)],
                              cfg.widths[static_cast<std::size_t>(i - 1)], cfg.kernel,
                              cfg.stride, cfg.variant, rng);
        final_up_ = ConvTranspose1dLayer(cfg.widths.front(), cfg.in_channels, cfg.kernel,
                                         cfg.stride, cfg.kernel / 2, cfg.stride - 1, rng);
    }

    struct ForwardResult {
        Var reconstruction;
        std::vector<Var> pyramid;
    };

    ForwardResult forward(const Var& x, Mode m) {
        check_input(x->value);
        ForwardResult res;
        Var h = x;
        for (auto& blk : enc_) {
            h = blk.forward(h, m);
            res.pyramid.push_back(h);
        }
        Var d = res.pyramid.back();
        for (std::size_t i = 0; i < dec_.size(); ++i) {
            const std::size_t lvl = dec_.size() - 1 - i;  // mirror encoder level index
            const Var& skip = res.pyramid[lvl];
            d = dec_[i].forward(d, cfg.variant == Variant::full ? skip : nullptr,
                                skip->value.length, m);
        }
        Var r = final_up_(d);
        r = crop_tail(r, x->value.length);
        res.reconstruction = tanh_act(r);
        return res;
    }

    // Encoder-only walk; eval mode, pure in the parameters.
    Tensor3 extract_embeddings(const Tensor3& x, int level) {
        if (level < 1 || level > cfg.depth())
            throw contract_error("extract_embeddings: level out of range");
        check_input(x);
        Var h = constant(x);
        for (int i = 0; i < level; ++i) h = enc_[static_cast<std::size_t>(i)].forward(h, Mode::eval);
        return h->value;
    }

    EmbeddingPyramid embed_all(const Tensor3& x) {
        check_input(x);
        EmbeddingPyramid p;
        Var h = constant(x);
        for (auto& blk : enc_) {
            h = blk.forward(h, Mode::eval);
            p.levels.push_back(h->value);
        }
        p.granularity = level_receptive_field(cfg);
        return p;
    }

    void visit_params(const ParamVisitor& fn) {
        for (std::size_t i = 0; i < enc_.size(); ++i)
            enc_[i].visit_params("enc" + std::to_string(i), fn);
        for (std::size_t i = 0; i < dec_.size(); ++i)
            dec_[i].visit_params("dec" + std::to_string(i), fn);
        final_up_.visit_params("final_up", fn);
    }
    void visit_state(const StateVisitor& fn) {
        for (std::size_t i = 0; i < enc_.size(); ++i)
            enc_[i].visit_state("enc" + std::to_string(i), fn);
        for (std::size_t i = 0; i < dec_.size(); ++i)
            dec_[i].visit_state("dec" + std::to_string(i), fn);
    }

    std::vector<Parameter> parameters() {
        std::vector<Parameter> out;
        visit_params([&](const std::string& name, Var& v) { out.push_back({name, v}); });
        return out;
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        visit_params([&](const std::string&, Var& v) { n += v->value.size(); });
        return n;
    }

    void zero_grad() {
        visit_params([](const std::string&, Var& v) { v->zero_grad(); });
    }

  private:
    void check_input(const Tensor3& x) const {
        if (x.channels != cfg.in_channels)
            throw shape_error("forward: expected " + std::to_string(cfg.in_channels) +
                              " channels, got " + std::to_string(x.channels));
        long long min_len = 1;
        for (int i = 0; i < cfg.depth(); ++i) min_len *= cfg.stride;
        if (x.length < min_len)
            throw input_too_short("forward: input length " + std::to_string(x.length) +
                                  " below minimum for depth " + std::to_string(cfg.depth()));
    }

    std::vector<EncoderBlock> enc_;
    std::vector<DecoderBlock> dec_;
    ConvTranspose1dLayer final_up_;
};

inline std::size_t count_parameters(Himae& model) { return model.parameter_count(); }

inline std::size_t count_parameters(const HimaeConfig& cfg) {
    Himae m(cfg, InitPolicy{0});
    return m.parameter_count();
}

}  // namespace himae
