#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "himae/autodiff.hpp"
#include "himae/tensor.hpp"

namespace himae {

// 1D convolution geometry. Cross-correlation convention, zero padding on
// both ends, floor division for the output length.
struct ConvSpec {
    int kernel = 1;
    int stride = 1;
    int padding = 0;
    int output_padding = 0;  // transposed only
    int in_channels = 1;
    int out_channels = 1;

    void validate() const {
        if (kernel < 1 || stride < 1 || padding < 0 || output_padding < 0 ||
            in_channels < 1 || out_channels < 1)
            throw config_error("ConvSpec: invalid geometry");
    }

    int out_length(int t_in) const {
        validate();
        const long long num = static_cast<long long>(t_in) + 2LL * padding - kernel;
        if (num < 0)
            throw input_too_short("conv1d: input length " + std::to_string(t_in) +
                                  " too short for kernel " + std::to_string(kernel));
        return static_cast<int>(num / stride) + 1;
    }

    int transposed_out_length(int t_in) const {
        validate();
        if (output_padding >= stride)
            throw config_error("conv_transpose1d: output_padding must be < stride");
        const long long t = (static_cast<long long>(t_in) - 1) * stride - 2LL * padding +
                            kernel + output_padding;
        if (t < 1) throw input_too_short("conv_transpose1d: output length < 1");
        return static_cast<int>(t);
    }
};

namespace detail {

// ---- conv1d kernels ------------------------------------------------------
// weight layout: (out_channels, in_channels, kernel)

inline void conv1d_forward(const Tensor3& x, const Tensor3& w, const Tensor3& b,
                           const ConvSpec& s, Tensor3& out) {
    const int B = x.batch, Ci = s.in_channels, Co = s.out_channels;
    const int K = s.kernel, S = s.stride, P = s.padding;
    const int Ti = x.length, To = out.length;
#pragma omp parallel for collapse(2) schedule(static)
    for (int bi = 0; bi < B; ++bi) {
        for (int oc = 0; oc < Co; ++oc) {
            real_t* o = out.row(bi, oc);
            const real_t bias = b.data[static_cast<std::size_t>(oc)];
            for (int t = 0; t < To; ++t) o[t] = bias;
            for (int ic = 0; ic < Ci; ++ic) {
                const real_t* xr = x.row(bi, ic);
                const real_t* wr = w.row(oc, ic);
                for (int kk = 0; kk < K; ++kk) {
                    const real_t wv = wr[kk];
                    if (wv == 0.0) continue;
                    const int off = kk - P;
                    int t0 = off < 0 ? (-off + S - 1) / S : 0;
                    int t1 = std::min(To - 1, (Ti - 1 - off) / S);
                    const real_t* xs = xr + off;
                    for (int t = t0; t <= t1; ++t) o[t] += wv * xs[t * S];
                }
            }
        }
    }
}

inline void conv1d_backward(const Tensor3& x, const Tensor3& w, const ConvSpec& s,
                            const Tensor3& gout, Tensor3* gx, Tensor3* gw, Tensor3* gb) {
    const int B = x.batch, Ci = s.in_channels, Co = s.out_channels;
    const int K = s.kernel, S = s.stride, P = s.padding;
    const int Ti = x.length, To = gout.length;
    if (gx) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int bi = 0; bi < B; ++bi) {
            for (int ic = 0; ic < Ci; ++ic) {
                real_t* g = gx->row(bi, ic);
                for (int oc = 0; oc < Co; ++oc) {
                    const real_t* go = gout.row(bi, oc);
                    const real_t* wr = w.row(oc, ic);
                    for (int kk = 0; kk < K; ++kk) {
                        const real_t wv = wr[kk];
                        if (wv == 0.0) continue;
                        const int off = kk - P;
                        int t0 = off < 0 ? (-off + S - 1) / S : 0;
                        int t1 = std::min(To - 1, (Ti - 1 - off) / S);
                        real_t* gs = g + off;
                        for (int t = t0; t <= t1; ++t) gs[t * S] += wv * go[t];
                    }
                }
            }
        }
    }
    if (gw) {
#pragma omp parallel for schedule(static)
        for (int oc = 0; oc < Co; ++oc) {
            for (int ic = 0; ic < Ci; ++ic) {
                real_t* gwr = gw->row(oc, ic);
                for (int kk = 0; kk < K; ++kk) {
                    const int off = kk - P;
                    real_t acc = 0;
                    for (int bi = 0; bi < B; ++bi) {
                        const real_t* go = gout.row(bi, oc);
                        const real_t* xs = x.row(bi, ic) + off;
                        int t0 = off < 0 ? (-off + S - 1) / S : 0;
                        int t1 = std::min(To - 1, (Ti - 1 - off) / S);
                        for (int t = t0; t <= t1; ++t) acc += go[t] * xs[t * S];
                    }
                    gwr[kk] += acc;
                }
            }
        }
    }
    if (gb) {
        for (int oc = 0; oc < Co; ++oc) {
            real_t acc = 0;
            for (int bi = 0; bi < B; ++bi) {
                const real_t* go = gout.row(bi, oc);
                for (int t = 0; t < To; ++t) acc += go[t];
            }
            gb->data[static_cast<std::size_t>(oc)] += acc;
        }
    }
}

// ---- transposed conv kernels ---------------------------------------------
// weight layout: (in_channels, out_channels, kernel). With the same memory
// as a conv weight (out,in,k) read transposed, this is its exact adjoint.

inline void conv_transpose1d_forward(const Tensor3& x, const Tensor3& w, const Tensor3& b,
                                     const ConvSpec& s, Tensor3& out) {
    const int B = x.batch, Ci = s.in_channels, Co = s.out_channels;
    const int K = s.kernel, S = s.stride, P = s.padding;
    const int Ti = x.length, To = out.length;
#pragma omp parallel for collapse(2) schedule(static)
    for (int bi = 0; bi < B; ++bi) {
        for (int oc = 0; oc < Co; ++oc) {
            real_t* o = out.row(bi, oc);
            const real_t bias = b.data[static_cast<std::size_t>(oc)];
            for (int t = 0; t < To; ++t) o[t] = bias;
            for (int ic = 0; ic < Ci; ++ic) {
                const real_t* xr = x.row(bi, ic);
                const real_t* wr = w.row(ic, oc);
                for (int kk = 0; kk < K; ++kk) {
                    const real_t wv = wr[kk];
                    if (wv == 0.0) continue;
                    const int off = kk - P;  // out index = t*S + off
                    int t0 = off < 0 ? (-off + S - 1) / S : 0;
                    int t1 = std::min(Ti - 1, (To - 1 - off) / S);
                    real_t* os = o + off;
                    for (int t = t0; t <= t1; ++t) os[t * S] += wv * xr[t];
                }
            }
        }
    }
}

inline void conv_transpose1d_backward(const Tensor3& x, const Tensor3& w, const ConvSpec& s,
                                      const Tensor3& gout, Tensor3* gx, Tensor3* gw,
                                      Tensor3* gb) {
    const int B = x.batch, Ci = s.in_channels, Co = s.out_channels;
    const int K = s.kernel, S = s.stride, P = s.padding;
    const int Ti = x.length, To = gout.length;
    if (gx) {
#pragma omp parallel for collapse(2) schedule(static)
        for (int bi = 0; bi < B; ++bi) {
            for (int ic = 0; ic < Ci; ++ic) {
                real_t* g = gx->row(bi, ic);
                for (int oc = 0; oc < Co; ++oc) {
                    const real_t* go = gout.row(bi, oc);
                    const real_t* wr = w.row(ic, oc);
                    for (int kk = 0; kk < K; ++kk) {
                        const real_t wv = wr[kk];
                        if (wv == 0.0) continue;
                        const int off = kk - P;
                        int t0 = off < 0 ? (-off + S - 1) / S : 0;
                        int t1 = std::min(Ti - 1, (To - 1 - off) / S);
                        const real_t* gs = go + off;
                        for (int t = t0; t <= t1; ++t) g[t] += wv * gs[t * S];
                    }
                }
            }
        }
    }
    if (gw) {
#pragma omp parallel for schedule(static)
        for (int ic = 0; ic < Ci; ++ic) {
            for (int oc = 0; oc < Co; ++oc) {
                real_t* gwr = gw->row(ic, oc);
                for (int kk = 0; kk < K; ++kk) {
                    const int off = kk - P;
                    real_t acc = 0;
                    for (int bi = 0; bi < B; ++bi) {
                        const real_t* xr = x.row(bi, ic);
                        const real_t* gs = gout.row(bi, oc) + off;
                        int t0 = off < 0 ? (-off + S - 1) / S : 0;
                        int t1 = std::min(Ti - 1, (To - 1 - off) / S);
                        for (int t = t0; t <= t1; ++t) acc += xr[t] * gs[t * S];
                    }
                    gwr[kk] += acc;
                }
            }
        }
    }
    if (gb) {
        for (int oc = 0; oc < Co; ++oc) {
            real_t acc = 0;
            for (int bi = 0; bi < B; ++bi) {
                const real_t* go = gout.row(bi, oc);
                for (int t = 0; t < To; ++t) acc += go[t];
            }
            gb->data[static_cast<std::size_t>(oc)] += acc;
        }
    }
}

inline real_t gauss_cdf(real_t x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }
inline real_t gauss_pdf(real_t x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

}  // namespace detail

// ---- tape ops -------------------------------------------------------------

inline Var conv1d(const Var& x, const Var& w, const Var& b, const ConvSpec& spec) {
    spec.validate();
    if (x->value.channels != spec.in_channels)
        throw config_error("conv1d: input has " + std::to_string(x->value.channels) +
                           " channels, spec expects " + std::to_string(spec.in_channels));
    if (w->value.batch != spec.out_channels || w->value.channels != spec.in_channels ||
        w->value.length != spec.kernel)
        throw config_error("conv1d: weight shape mismatch");
    if (b->value.batch != spec.out_channels || b->value.channels != 1 || b->value.length != 1)
        throw config_error("conv1d: bias shape mismatch");
    Tensor3 out(x->value.batch, spec.out_channels, spec.out_length(x->value.length));
    detail::conv1d_forward(x->value, w->value, b->value, spec, out);
    const bool req = x->requires_grad || w->requires_grad || b->requires_grad;
    Var node = make_var(std::move(out), req);
    node->op = "conv1d";
    if (req) {
        node->parents = {x, w, b};
        node->backprop = [x, w, b, spec](Node& n) {
            detail::conv1d_backward(x->value, w->value, spec, n.grad,
                                    x->requires_grad ? &x->grad_buffer() : nullptr,
                                    w->requires_grad ? &w->grad_buffer() : nullptr,
                                    b->requires_grad ? &b->grad_buffer() : nullptr);
        };
    }
    return node;
}

inline Var conv_transpose1d(const Var& x, const Var& w, const Var& b, const ConvSpec& spec) {
    spec.validate();
    if (x->value.channels != spec.in_channels)
        throw config_error("conv_transpose1d: input channel mismatch");
    if (w->value.batch != spec.in_channels || w->value.channels != spec.out_channels ||
        w->value.length != spec.kernel)
        throw config_error("conv_transpose1d: weight shape mismatch");
    if (b->value.batch != spec.out_channels || b->value.channels != 1 || b->value.length != 1)
        throw config_error("conv_transpose1d: bias shape mismatch");
    Tensor3 out(x->value.batch, spec.out_channels, spec.transposed_out_length(x->value.length));
    detail::conv_transpose1d_forward(x->value, w->value, b->value, spec, out);
    const bool req = x->requires_grad || w->requires_grad || b->requires_grad;
    Var node = make_var(std::move(out), req);
    node->op = "conv_transpose1d";
    if (req) {
        node->parents = {x, w, b};
        node->backprop = [x, w, b, spec](Node& n) {
            detail::conv_transpose1d_backward(x->value, w->value, spec, n.grad,
                                              x->requires_grad ? &x->grad_buffer() : nullptr,
                                              w->requires_grad ? &w->grad_buffer() : nullptr,
                                              b->requires_grad ? &b->grad_buffer() : nullptr);
        };
    }
    return node;
}

// Running statistics owned by the layer; mutated only in train mode.
struct BatchNormState {
    Tensor3 running_mean;  // (1, C, 1)
    Tensor3 running_var;   // (1, C, 1)
    explicit BatchNormState(int channels = 1)
        : running_mean(1, channels, 1, 0.0), running_var(1, channels, 1, 1.0) {}
};

inline Var batch_norm1d(const Var& x, const Var& gamma, const Var& beta, BatchNormState& state,
                        Mode mode, real_t eps = 1e-5, real_t momentum = 0.1) {
    const int B = x->value.batch, C = x->value.channels, T = x->value.length;
    if (gamma->value.channels != C || beta->value.channels != C ||
        state.running_mean.channels != C)
        throw config_error("batch_norm1d: channel mismatch");
    const long long m = static_cast<long long>(B) * T;
    Tensor3 out(B, C, T);
    Tensor3 xhat(B, C, T);
    std::vector<real_t> inv_std(C);

    if (mode == Mode::train) {
        if (m < 2) throw numeric_error("batch_norm1d: degenerate batch (B*T < 2)");
        for (int c = 0; c < C; ++c) {
            real_t mean = 0;
            for (int bi = 0; bi < B; ++bi) {
                const real_t* xr = x->value.row(bi, c);
                for (int t = 0; t < T; ++t) mean += xr[t];
            }
            mean /= static_cast<real_t>(m);
            real_t var = 0;
            for (int bi = 0; bi < B; ++bi) {
                const real_t* xr = x->value.row(bi, c);
                for (int t = 0; t < T; ++t) {
                    const real_t d = xr[t] - mean;
                    var += d * d;
                }
            }
            var /= static_cast<real_t>(m);  // biased, used for normalization
            const real_t is = 1.0 / std::sqrt(var + eps);
            inv_std[static_cast<std::size_t>(c)] = is;
            const real_t g = gamma->value.at(0, c, 0), be = beta->value.at(0, c, 0);
            for (int bi = 0; bi < B; ++bi) {
                const real_t* xr = x->value.row(bi, c);
                real_t* xh = xhat.row(bi, c);
                real_t* o = out.row(bi, c);
                for (int t = 0; t < T; ++t) {
                    xh[t] = (xr[t] - mean) * is;
                    o[t] = g * xh[t] + be;
                }
            }
            const real_t unbiased = var * static_cast<real_t>(m) / static_cast<real_t>(m - 1);
            real_t& rm = state.running_mean.at(0, c, 0);
            real_t& rv = state.running_var.at(0, c, 0);
            rm = (1.0 - momentum) * rm + momentum * mean;
            rv = (1.0 - momentum) * rv + momentum * unbiased;
        }
    } else {
        for (int c = 0; c < C; ++c) {
            const real_t mean = state.running_mean.at(0, c, 0);
            const real_t var = state.running_var.at(0, c, 0);
            const real_t is = 1.0 / std::sqrt(var + eps);
            inv_std[static_cast<std::size_t>(c)] = is;
            const real_t g = gamma->value.at(0, c, 0), be = beta->value.at(0, c, 0);
            for (int bi = 0; bi < B; ++bi) {
                const real_t* xr = x->value.row(bi, c);
                real_t* xh = xhat.row(bi, c);
                real_t* o = out.row(bi, c);
                for (int t = 0; t < T; ++t) {
                    xh[t] = (xr[t] - mean) * is;
                    o[t] = g * xh[t] + be;
                }
            }
        }
    }

    const bool req = x->requires_grad || gamma->requires_grad || beta->requires_grad;
    Var node = make_var(std::move(out), req);
    node->op = "batch_norm1d";
    if (req) {
        node->parents = {x, gamma, beta};
        const bool train = (mode == Mode::train);
        node->backprop = [x, gamma, beta, xh = std::move(xhat), is = std::move(inv_std), train,
                          B, C, T, m](Node& n) {
            for (int c = 0; c < C; ++c) {
                const real_t g = gamma->value.at(0, c, 0);
                real_t sum_g = 0, sum_gx = 0;
                for (int bi = 0; bi < B; ++bi) {
                    const real_t* go = n.grad.row(bi, c);
                    const real_t* xr = xh.row(bi, c);
                    for (int t = 0; t < T; ++t) {
                        sum_g += go[t];
                        sum_gx += go[t] * xr[t];
                    }
                }
                if (beta->requires_grad) beta->grad_buffer().at(0, c, 0) += sum_g;
                if (gamma->requires_grad) gamma->grad_buffer().at(0, c, 0) += sum_gx;
                if (x->requires_grad) {
                    Tensor3& gx = x->grad_buffer();
                    const real_t isv = is[static_cast<std::size_t>(c)];
                    if (train) {
                        const real_t inv_m = 1.0 / static_cast<real_t>(m);
                        for (int bi = 0; bi < B; ++bi) {
                            const real_t* go = n.grad.row(bi, c);
                            const real_t* xr = xh.row(bi, c);
                            real_t* gr = gx.row(bi, c);
                            for (int t = 0; t < T; ++t)
                                gr[t] += g * isv *
                                         (go[t] - inv_m * sum_g - xr[t] * inv_m * sum_gx);
                        }
                    } else {
                        for (int bi = 0; bi < B; ++bi) {
                            const real_t* go = n.grad.row(bi, c);
                            real_t* gr = gx.row(bi, c);
                            for (int t = 0; t < T; ++t) gr[t] += g * isv * go[t];
                        }
                    }
                }
            }
        };
    }
    return node;
}

// Exact Gaussian-CDF form: x * Phi(x).
inline Var gelu(const Var& x) {
    Tensor3 out(x->value.batch, x->value.channels, x->value.length);
    for (std::size_t i = 0; i < out.size(); ++i)
        out.data[i] = x->value.data[i] * detail::gauss_cdf(x->value.data[i]);
    Var node = make_var(std::move(out), x->requires_grad);
    node->op = "gelu";
    if (x->requires_grad) {
        node->parents = {x};
        node->backprop = [x](Node& n) {
            Tensor3& gx = x->grad_buffer();
            for (std::size_t i = 0; i < gx.size(); ++i) {
                const real_t v = x->value.data[i];
                gx.data[i] += n.grad.data[i] * (detail::gauss_cdf(v) + v * detail::gauss_pdf(v));
            }
        };
    }
    return node;
}

inline Var tanh_act(const Var& x) {
    Tensor3 out(x->value.batch, x->value.channels, x->value.length);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = std::tanh(x->value.data[i]);
    Var node = make_var(std::move(out), x->requires_grad);
    node->op = "tanh";
    if (x->requires_grad) {
        node->parents = {x};
        node->backprop = [x, y = node->value](Node& n) {
            Tensor3& gx = x->grad_buffer();
            for (std::size_t i = 0; i < gx.size(); ++i)
                gx.data[i] += n.grad.data[i] * (1.0 - y.data[i] * y.data[i]);
        };
    }
    return node;
}

// Stack channels a-then-b. Batch and length must agree.
inline Var concat_channels(const Var& a, const Var& b) {
    if (a->value.batch != b->value.batch || a->value.length != b->value.length)
        throw shape_error("concat_channels: batch/length mismatch");
    const int B = a->value.batch, Ca = a->value.channels, Cb = b->value.channels,
              T = a->value.length;
    Tensor3 out(B, Ca + Cb, T);
    for (int bi = 0; bi < B; ++bi) {
        for (int c = 0; c < Ca; ++c)
            std::copy_n(a->value.row(bi, c), T, out.row(bi, c));
        for (int c = 0; c < Cb; ++c)
            std::copy_n(b->value.row(bi, c), T, out.row(bi, Ca + c));
    }
    const bool req = a->requires_grad || b->requires_grad;
    Var node = make_var(std::move(out), req);
    node->op = "concat_channels";
    if (req) {
        node->parents = {a, b};
        node->backprop = [a, b, B, Ca, Cb, T](Node& n) {
            if (a->requires_grad) {
                Tensor3& ga = a->grad_buffer();
                for (int bi = 0; bi < B; ++bi)
                    for (int c = 0; c < Ca; ++c) {
                        const real_t* g = n.grad.row(bi, c);
                        real_t* gr = ga.row(bi, c);
                        for (int t = 0; t < T; ++t) gr[t] += g[t];
                    }
            }
            if (b->requires_grad) {
                Tensor3& gb = b->grad_buffer();
                for (int bi = 0; bi < B; ++bi)
                    for (int c = 0; c < Cb; ++c) {
                        const real_t* g = n.grad.row(bi, Ca + c);
                        real_t* gr = gb.row(bi, c);
                        for (int t = 0; t < T; ++t) gr[t] += g[t];
                    }
            }
        };
    }
    return node;
}

inline Var add(const Var& a, const Var& b) {
    if (!a->value.same_shape(b->value)) throw shape_error("add: shape mismatch");
    Tensor3 out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b->value.data[i];
    const bool req = a->requires_grad || b->requires_grad;
    Var node = make_var(std::move(out), req);
    node->op = "add";
    if (req) {
        node->parents = {a, b};
        node->backprop = [a, b](Node& n) {
            for (const Var& p : {a, b})
                if (p->requires_grad) {
                    Tensor3& g = p->grad_buffer();
                    for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += n.grad.data[i];
                }
        };
    }
    return node;
}

inline Var sub(const Var& a, const Var& b) {
    if (!a->value.same_shape(b->value)) throw shape_error("sub: shape mismatch");
    Tensor3 out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b->value.data[i];
    const bool req = a->requires_grad || b->requires_grad;
    Var node = make_var(std::move(out), req);
    node->op = "sub";
    if (req) {
        node->parents = {a, b};
        node->backprop = [a, b](Node& n) {
            if (a->requires_grad) {
                Tensor3& g = a->grad_buffer();
                for (std::size_t i = 0; i < g.size(); ++i) g.data[i] += n.grad.data[i];
            }
            if (b->requires_grad) {
                Tensor3& g = b->grad_buffer();
                for (std::size_t i = 0; i < g.size(); ++i) g.data[i] -= n.grad.data[i];
            }
        };
    }
    return node;
}

inline Var mul(const Var& a, const Var& b) {
    if (!a->value.same_shape(b->value)) throw shape_error("mul: shape mismatch");
    Tensor3 out = a->value;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= b->value.data[i];
    const bool req = a->requires_grad || b->requires_grad;
    Var node = make_var(std::move(out), req);
    node->op = "mul";
    if (req) {
        node->parents = {a, b};
        node->backprop = [a, b](Node& n) {
            if (a->requires_grad) {
                Tensor3& g = a->grad_buffer();
                for (std::size_t i = 0; i < g.size(); ++i)
                    g.data[i] += n.grad.data[i] * b->value.data[i];
            }
            if (b->requires_grad) {
                Tensor3& g = b->grad_buffer();
                for (std::size_t i = 0; i < g.size(); ++i)
                    g.data[i] += n.grad.data[i] * a->value.data[i];
            }
        };
    }
    return node;
}

// Drop samples from the tail; gradient zero-pads them back.
inline Var crop_tail(const Var& x, int new_length) {
    if (new_length < 1) throw contract_error("crop_tail: target length < 1");
    if (new_length > x->value.length) throw shape_error("crop_tail: target longer than input");
    if (new_length == x->value.length) return x;
    const int B = x->value.batch, C = x->value.channels;
    Tensor3 out(B, C, new_length);
    for (int bi = 0; bi < B; ++bi)
        for (int c = 0; c < C; ++c)
            std::copy_n(x->value.row(bi, c), new_length, out.row(bi, c));
    Var node = make_var(std::move(out), x->requires_grad);
    node->op = "crop_tail";
    if (x->requires_grad) {
        node->parents = {x};
        node->backprop = [x, B, C, new_length](Node& n) {
            Tensor3& g = x->grad_buffer();
            for (int bi = 0; bi < B; ++bi)
                for (int c = 0; c < C; ++c) {
                    const real_t* go = n.grad.row(bi, c);
                    real_t* gr = g.row(bi, c);
                    for (int t = 0; t < new_length; ++t) gr[t] += go[t];
                }
        };
    }
    return node;
}

inline Var sum_all(const Var& x) {
    real_t s = 0;
    for (real_t v : x->value.data) s += v;
    Var node = make_var(Tensor3::scalar(s), x->requires_grad);
    node->op = "sum";
    if (x->requires_grad) {
        node->parents = {x};
        node->backprop = [x](Node& n) {
            Tensor3& g = x->grad_buffer();
            const real_t gv = n.grad.data[0];
            for (real_t& v : g.data) v += gv;
        };
    }
    return node;
}

}  // namespace himae
