#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "himae/blocks.hpp"

namespace himae {

struct AdamWConfig {
    real_t lr = 1e-3;
    real_t beta1 = 0.9;
    real_t beta2 = 0.95;
    real_t eps = 1e-8;
    real_t weight_decay = 1e-3;
    real_t clip_norm = 1.0;  // <= 0 disables clipping
};

// AdamW with decoupled weight decay and optional global-norm gradient
// clipping. Weight decay multiplies the weights directly; it never enters
// the moment estimates.
class AdamW {
  public:
    AdamWConfig cfg;
    long long step_count = 0;

    AdamW() = default;
    AdamW(const std::vector<Parameter>& params, AdamWConfig c) : cfg(c) {
        for (const auto& p : params) {
            m_.emplace_back(p.var->value.batch, p.var->value.channels, p.var->value.length);
            v_.emplace_back(p.var->value.batch, p.var->value.channels, p.var->value.length);
        }
    }

    // lr_override < 0 means use cfg.lr (scheduled callers pass the current rate).
    void step(std::vector<Parameter>& params, real_t lr_override = -1.0) {
        if (params.size() != m_.size()) throw contract_error("AdamW: parameter set changed");
        const real_t lr = lr_override < 0 ? cfg.lr : lr_override;
        ++step_count;

        real_t clip_scale = 1.0;
        if (cfg.clip_norm > 0) {
            real_t sq = 0;
            for (auto& p : params) {
                if (p.var->grad.empty()) continue;
                for (real_t g : p.var->grad.data) {
                    if (!std::isfinite(g))
                        throw numeric_error("AdamW: non-finite gradient in '" + p.name + "'");
                    sq += g * g;
                }
            }
            const real_t norm = std::sqrt(sq);
            if (norm > cfg.clip_norm) clip_scale = cfg.clip_norm / norm;
        }

        const real_t bc1 = 1.0 - std::pow(cfg.beta1, static_cast<real_t>(step_count));
        const real_t bc2 = 1.0 - std::pow(cfg.beta2, static_cast<real_t>(step_count));
        for (std::size_t i = 0; i < params.size(); ++i) {
            Tensor3& w = params[i].var->value;
            Tensor3& m = m_[i];
            Tensor3& v = v_[i];
            const bool has_grad = !params[i].var->grad.empty();
            const Tensor3* grad = has_grad ? &params[i].var->grad : nullptr;
            for (std::size_t j = 0; j < w.size(); ++j) {
                real_t g = has_grad ? grad->data[j] * clip_scale : 0.0;
                if (!std::isfinite(g))
                    throw numeric_error("AdamW: non-finite gradient in '" + params[i].name + "'");
                if (cfg.weight_decay != 0) w.data[j] -= lr * cfg.weight_decay * w.data[j];
                m.data[j] = cfg.beta1 * m.data[j] + (1.0 - cfg.beta1) * g;
                v.data[j] = cfg.beta2 * v.data[j] + (1.0 - cfg.beta2) * g * g;
                const real_t mhat = m.data[j] / bc1;
                const real_t vhat = v.data[j] / bc2;
                w.data[j] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
            }
        }
    }

    std::vector<Tensor3>& moments1() { return m_; }
    std::vector<Tensor3>& moments2() { return v_; }

  private:
    std::vector<Tensor3> m_, v_;
};

// Linear warmup for the first warmup_frac of the budget, then cosine decay
// to zero. Continuous at the junction.
struct Schedule {
    long long total_steps = 1;
    real_t base_lr = 1e-3;
    real_t warmup_frac = 0.1;

    long long warmup_steps() const {
        auto w = static_cast<long long>(std::llround(warmup_frac * static_cast<real_t>(total_steps)));
        return std::max<long long>(1, w);
    }

    real_t lr_at(long long step) const {
        if (step < 0) throw contract_error("Schedule: negative step");
        if (step > total_steps) step = total_steps;
        const long long w = warmup_steps();
        if (step <= w) return base_lr * static_cast<real_t>(step) / static_cast<real_t>(w);
        const real_t progress =
            static_cast<real_t>(step - w) / static_cast<real_t>(total_steps - w);
        return base_lr * 0.5 * (1.0 + std::cos(3.14159265358979323846 * progress));
    }
};

}  // namespace himae
