#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "himae/errors.hpp"

namespace himae {

using real_t = double;

// Dense batch x channels x time array, row-major, time fastest.
// The single value container for signals, activations and parameters
// (conv weights live as out x in x kernel).
struct Tensor3 {
    int batch = 0;
    int channels = 0;
    int length = 0;
    std::vector<real_t> data;

    Tensor3() = default;

    Tensor3(int b, int c, int t, real_t fill = 0.0)
        : batch(b), channels(c), length(t) {
        if (b <= 0 || c <= 0 || t <= 0)
            throw shape_error("Tensor3: dimensions must be positive");
        data.assign(static_cast<std::size_t>(b) * static_cast<std::size_t>(c) *
                        static_cast<std::size_t>(t),
                    fill);
    }

    static Tensor3 scalar(real_t v) {
        Tensor3 s(1, 1, 1);
        s.data[0] = v;
        return s;
    }

    std::size_t size() const { return data.size(); }
    bool empty() const { return data.empty(); }
    bool is_scalar() const { return batch == 1 && channels == 1 && length == 1; }

    bool same_shape(const Tensor3& o) const {
        return batch == o.batch && channels == o.channels && length == o.length;
    }

    real_t* row(int b, int c) {
        return data.data() +
               (static_cast<std::size_t>(b) * channels + c) * static_cast<std::size_t>(length);
    }
    const real_t* row(int b, int c) const {
        return data.data() +
               (static_cast<std::size_t>(b) * channels + c) * static_cast<std::size_t>(length);
    }

    real_t& at(int b, int c, int t) { return row(b, c)[t]; }
    real_t at(int b, int c, int t) const { return row(b, c)[t]; }

    void fill(real_t v) { std::fill(data.begin(), data.end(), v); }
};

inline bool all_finite(const Tensor3& x) {
    for (real_t v : x.data)
        if (!std::isfinite(v)) return false;
    return true;
}

inline real_t max_abs(const Tensor3& x) {
    real_t m = 0;
    for (real_t v : x.data) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace himae
