#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "wrsn/nn/tensor.hpp"

namespace wrsn::nn {

struct NonFiniteGradient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Adam over a fixed set of parameter blocks, with global-norm gradient
// clipping applied across all blocks before the moment updates.
template <class S>
struct Adam {
    double lr = 3e-4;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long t = 0;
    std::vector<std::vector<S>> m, v;

    void init(const std::vector<ParamRef<S>>& refs) {
        m.clear();
        v.clear();
        for (const auto& r : refs) {
            m.emplace_back(r.count(), S(0));
            v.emplace_back(r.count(), S(0));
        }
        t = 0;
    }

    // returns the pre-clip global gradient norm
    double step(std::vector<ParamRef<S>>& refs, double clip_norm) {
        double sq = 0.0;
        for (const auto& r : refs) {
            for (const S g : *r.g) {
                if (!std::isfinite(static_cast<double>(g)))
                    throw NonFiniteGradient("non-finite gradient in block '" + r.name + "'");
                sq += static_cast<double>(g) * static_cast<double>(g);
            }
        }
        const double norm = std::sqrt(sq);
        const double scale = (clip_norm > 0.0 && norm > clip_norm) ? clip_norm / norm : 1.0;

        ++t;
        const double bc1 = 1.0 - std::pow(beta1, t);
        const double bc2 = 1.0 - std::pow(beta2, t);
        for (std::size_t bi = 0; bi < refs.size(); ++bi) {
            auto& w = *refs[bi].w;
            auto& g = *refs[bi].g;
            for (std::size_t i = 0; i < w.size(); ++i) {
                const double gi = static_cast<double>(g[i]) * scale;
                m[bi][i] = static_cast<S>(beta1 * m[bi][i] + (1.0 - beta1) * gi);
                v[bi][i] = static_cast<S>(beta2 * v[bi][i] + (1.0 - beta2) * gi * gi);
                const double mh = m[bi][i] / bc1;
                const double vh = v[bi][i] / bc2;
                w[i] = static_cast<S>(w[i] - lr * mh / (std::sqrt(vh) + eps));
            }
        }
        return norm;
    }
};

}  // namespace wrsn::nn
