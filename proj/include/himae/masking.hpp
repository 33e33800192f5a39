#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "himae/ops.hpp"
#include "himae/rng.hpp"

namespace himae {

enum class MaskRegime { random, contiguous, suffix };

inline const char* regime_name(MaskRegime r) {
    switch (r) {
        case MaskRegime::random: return "random";
        case MaskRegime::contiguous: return "contiguous";
        case MaskRegime::suffix: return "suffix";
    }
    return "?";
}

// Half-up rounding defines the masked patch count, so the ratio is exact
// per window.
inline int masked_patch_count(int n_patches, real_t ratio) {
    return static_cast<int>(std::floor(ratio * n_patches + 0.5));
}

// Patch-level binary mask m plus its time-expanded form m' (each patch
// entry repeated patch_len times). 1 = masked.
struct PatchMask {
    int patches = 0;
    int patch_len = 1;
    real_t ratio = 0;
    MaskRegime regime = MaskRegime::random;
    std::vector<std::uint8_t> m;         // length patches
    std::vector<std::uint8_t> expanded;  // length patches * patch_len

    int masked_count() const {
        return static_cast<int>(std::count(m.begin(), m.end(), std::uint8_t{1}));
    }
};

inline PatchMask sample_mask(int n_patches, int patch_len, real_t ratio, MaskRegime regime,
                             Rng& rng, int contiguous_runs = 1) {
    if (n_patches < 1 || patch_len < 1) throw config_error("sample_mask: bad sizes");
    if (!(ratio > 0.0 && ratio < 1.0)) throw numeric_error("sample_mask: ratio must be in (0,1)");
    const int k = masked_patch_count(n_patches, ratio);
    if (k < 1 || k >= n_patches)
        throw numeric_error("sample_mask: degenerate mask (round(r*N) is 0 or N)");

    PatchMask mask;
    mask.patches = n_patches;
    mask.patch_len = patch_len;
    mask.ratio = ratio;
    mask.regime = regime;
    mask.m.assign(static_cast<std::size_t>(n_patches), 0);

    switch (regime) {
        case MaskRegime::random: {
            // uniform without replacement via partial Fisher-Yates
            std::vector<int> idx(static_cast<std::size_t>(n_patches));
            std::iota(idx.begin(), idx.end(), 0);
            for (int i = 0; i < k; ++i) {
                const int j = uniform_int(rng, i, n_patches - 1);
                std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
                mask.m[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 1;
            }
            break;
        }
        case MaskRegime::contiguous: {
            const int runs = std::max(1, contiguous_runs);
            if (runs == 1) {
                const int start = uniform_int(rng, 0, n_patches - k);
                std::fill(mask.m.begin() + start, mask.m.begin() + start + k, std::uint8_t{1});
            } else {
                // split k into `runs` near-equal non-overlapping runs
                int remaining = k;
                int attempts = 0;
                for (int r = 0; r < runs && remaining > 0; ++r) {
                    const int len = (remaining + (runs - 1 - r)) / (runs - r);
                    bool placed = false;
                    while (!placed && attempts < 1000) {
                        ++attempts;
                        const int start = uniform_int(rng, 0, n_patches - len);
                        bool free = true;
                        for (int i = start; i < start + len; ++i)
                            if (mask.m[static_cast<std::size_t>(i)]) { free = false; break; }
                        if (free) {
                            std::fill(mask.m.begin() + start, mask.m.begin() + start + len,
                                      std::uint8_t{1});
                            remaining -= len;
                            placed = true;
                        }
                    }
                    if (!placed) throw numeric_error("sample_mask: cannot place contiguous runs");
                }
                break;
            }
            break;
        }
        case MaskRegime::suffix:
            std::fill(mask.m.end() - k, mask.m.end(), std::uint8_t{1});
            break;
    }

    mask.expanded.resize(static_cast<std::size_t>(n_patches) * patch_len);
    for (int i = 0; i < n_patches * patch_len; ++i)
        mask.expanded[static_cast<std::size_t>(i)] = mask.m[static_cast<std::size_t>(i / patch_len)];
    return mask;
}

inline PatchMask sample_mask(int n_patches, int patch_len, real_t ratio, MaskRegime regime,
                             std::uint64_t seed, int contiguous_runs = 1) {
    Rng rng = make_rng(seed);
    return sample_mask(n_patches, patch_len, ratio, regime, rng, contiguous_runs);
}

// Pretraining alternates regimes per optimization step.
inline MaskRegime regime_for_step(long long step, bool interleave,
                                  MaskRegime fixed = MaskRegime::random) {
    if (!interleave) return fixed;
    return (step % 2 == 1) ? MaskRegime::random : MaskRegime::contiguous;
}

// Expanded masks for a batch as a (B, 1, L) tensor.
inline Tensor3 masks_to_tensor(const std::vector<PatchMask>& masks) {
    if (masks.empty()) throw contract_error("masks_to_tensor: empty batch");
    const int L = masks[0].patches * masks[0].patch_len;
    Tensor3 out(static_cast<int>(masks.size()), 1, L);
    for (std::size_t b = 0; b < masks.size(); ++b) {
        if (static_cast<int>(masks[b].expanded.size()) != L)
            throw shape_error("masks_to_tensor: inconsistent lengths");
        real_t* r = out.row(static_cast<int>(b), 0);
        for (int t = 0; t < L; ++t) r[t] = masks[b].expanded[static_cast<std::size_t>(t)];
    }
    return out;
}

// x_tilde = x * (1 - m'), broadcast over channels.
inline Tensor3 apply_mask(const Tensor3& x, const Tensor3& mask) {
    if (mask.batch != x.batch || mask.channels != 1 || mask.length != x.length)
        throw shape_error("apply_mask: mask must be (B,1,L) matching x");
    Tensor3 out = x;
    for (int b = 0; b < x.batch; ++b) {
        const real_t* mr = mask.row(b, 0);
        for (int c = 0; c < x.channels; ++c) {
            real_t* r = out.row(b, c);
            for (int t = 0; t < x.length; ++t) r[t] *= (1.0 - mr[t]);
        }
    }
    return out;
}

inline Tensor3 apply_mask(const Tensor3& x, const PatchMask& mask) {
    return apply_mask(x, masks_to_tensor({mask}));
}

namespace detail {

inline real_t masked_denominator(const Tensor3& mask, int channels) {
    real_t s = 0;
    for (real_t v : mask.data) s += v;
    return s * channels;
}

}  // namespace detail

// || (xhat - x) .* m' ||^2 / (sum m' * C): mean squared error restricted
// to masked samples, averaged per sample per channel.
inline real_t masked_mse(const Tensor3& xhat, const Tensor3& x, const Tensor3& mask) {
    if (!xhat.same_shape(x)) throw shape_error("masked_mse: shape mismatch");
    if (mask.batch != x.batch || mask.channels != 1 || mask.length != x.length)
        throw shape_error("masked_mse: mask must be (B,1,L)");
    const real_t denom = detail::masked_denominator(mask, x.channels);
    if (denom <= 0) throw numeric_error("masked_mse: empty mask");
    real_t acc = 0;
    for (int b = 0; b < x.batch; ++b) {
        const real_t* mr = mask.row(b, 0);
        for (int c = 0; c < x.channels; ++c) {
            const real_t* xr = x.row(b, c);
            const real_t* hr = xhat.row(b, c);
            for (int t = 0; t < x.length; ++t) {
                const real_t d = (hr[t] - xr[t]) * mr[t];
                acc += d * d;
            }
        }
    }
    return acc / denom;
}

inline real_t masked_mae(const Tensor3& xhat, const Tensor3& x, const Tensor3& mask) {
    if (!xhat.same_shape(x)) throw shape_error("masked_mae: shape mismatch");
    const real_t denom = detail::masked_denominator(mask, x.channels);
    if (denom <= 0) throw numeric_error("masked_mae: empty mask");
    real_t acc = 0;
    for (int b = 0; b < x.batch; ++b) {
        const real_t* mr = mask.row(b, 0);
        for (int c = 0; c < x.channels; ++c) {
            const real_t* xr = x.row(b, c);
            const real_t* hr = xhat.row(b, c);
            for (int t = 0; t < x.length; ++t) acc += std::abs(hr[t] - xr[t]) * mr[t];
        }
    }
    return acc / denom;
}

// Tape version of the loss; gradient flows to xhat only and is exactly
// zero at observed samples.
inline Var masked_mse_loss(const Var& xhat, const Tensor3& x, const Tensor3& mask) {
    const real_t value = masked_mse(xhat->value, x, mask);
    const real_t denom = detail::masked_denominator(mask, xhat->value.channels);
    Var node = make_var(Tensor3::scalar(value), xhat->requires_grad);
    node->op = "masked_mse";
    if (xhat->requires_grad) {
        node->parents = {xhat};
        node->backprop = [xhat, x, mask, denom](Node& n) {
            Tensor3& g = xhat->grad_buffer();
            const real_t scale = 2.0 * n.grad.data[0] / denom;
            for (int b = 0; b < x.batch; ++b) {
                const real_t* mr = mask.row(b, 0);
                for (int c = 0; c < x.channels; ++c) {
                    const real_t* xr = x.row(b, c);
                    const real_t* hr = xhat->value.row(b, c);
                    real_t* gr = g.row(b, c);
                    for (int t = 0; t < x.length; ++t)
                        gr[t] += scale * (hr[t] - xr[t]) * mr[t];
                }
            }
        };
    }
    return node;
}

// ---- reference fills -------------------------------------------------------

enum class FillKind { mean, nearest, linear };

// Fill masked samples from the observed ones, per window and channel.
inline Tensor3 reference_fill(const Tensor3& x, const Tensor3& mask, FillKind kind) {
    if (mask.batch != x.batch || mask.channels != 1 || mask.length != x.length)
        throw shape_error("reference_fill: mask must be (B,1,L)");
    Tensor3 out = x;
    const int T = x.length;
    for (int b = 0; b < x.batch; ++b) {
        const real_t* mr = mask.row(b, 0);
        std::vector<int> observed;
        for (int t = 0; t < T; ++t)
            if (mr[t] == 0.0) observed.push_back(t);
        if (observed.empty()) throw numeric_error("reference_fill: no observed samples");
        for (int c = 0; c < x.channels; ++c) {
            const real_t* xr = x.row(b, c);
            real_t* o = out.row(b, c);
            if (kind == FillKind::mean) {
                real_t mean = 0;
                for (int t : observed) mean += xr[t];
                mean /= static_cast<real_t>(observed.size());
                for (int t = 0; t < T; ++t)
                    if (mr[t] != 0.0) o[t] = mean;
            } else if (kind == FillKind::nearest) {
                for (int t = 0; t < T; ++t) {
                    if (mr[t] == 0.0) continue;
                    auto it = std::lower_bound(observed.begin(), observed.end(), t);
                    int best;
                    if (it == observed.end()) best = observed.back();
                    else if (it == observed.begin()) best = observed.front();
                    else {
                        const int hi = *it, lo = *(it - 1);
                        best = (t - lo <= hi - t) ? lo : hi;  // tie goes left
                    }
                    o[t] = xr[best];
                }
            } else {
                for (int t = 0; t < T; ++t) {
                    if (mr[t] == 0.0) continue;
                    auto it = std::lower_bound(observed.begin(), observed.end(), t);
                    if (it == observed.end()) o[t] = xr[observed.back()];
                    else if (it == observed.begin()) o[t] = xr[observed.front()];
                    else {
                        const int hi = *it, lo = *(it - 1);
                        const real_t w = static_cast<real_t>(t - lo) / static_cast<real_t>(hi - lo);
                        o[t] = (1.0 - w) * xr[lo] + w * xr[hi];
                    }
                }
            }
        }
    }
    return out;
}

// R^2 = 1 - MSE(xhat) / MSE(reference), both restricted to masked samples.
inline real_t r_squared(const Tensor3& xhat, const Tensor3& x, const Tensor3& mask,
                        FillKind reference = FillKind::mean) {
    const real_t mse_model = masked_mse(xhat, x, mask);
    const Tensor3 ref = reference_fill(x, mask, reference);
    const real_t mse_ref = masked_mse(ref, x, mask);
    if (mse_ref <= 0) throw numeric_error("r_squared: reference error is zero");
    return 1.0 - mse_model / mse_ref;
}

}  // namespace himae
