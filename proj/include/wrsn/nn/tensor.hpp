#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace wrsn::nn {

template <class S>
using MatRM = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using MapRM = Eigen::Map<MatRM<S>, 0, Eigen::OuterStride<>>;
template <class S>
using CMapRM = Eigen::Map<const MatRM<S>, 0, Eigen::OuterStride<>>;

// Channel-major feature map with an optional 1-cell zero border. The border
// doubles as the zero padding of 3x3 stride-1 convolutions, which lets those
// convolutions run as nine accumulating GEMMs over contiguous plane runs
// (two junk cells per row land in the border and are re-zeroed afterwards).
template <class S>
struct Fmap {
    int c = 0, h = 0, w = 0, pad = 0;
    std::vector<S> v;

    void resize(int c_, int h_, int w_, int pad_) {
        c = c_;
        h = h_;
        w = w_;
        pad = pad_;
        v.assign(static_cast<std::size_t>(c) * ps() + 2, S(0));  // +2 run slack
    }
    int rs() const { return w + 2 * pad; }
    int ps() const { return (h + 2 * pad) * rs(); }
    int inner_size() const { return c * h * w; }
    S* ch(int i) { return v.data() + static_cast<std::size_t>(i) * ps(); }
    const S* ch(int i) const { return v.data() + static_cast<std::size_t>(i) * ps(); }
    S& at(int ci, int y, int x) { return v[ci * ps() + (y + pad) * rs() + (x + pad)]; }
    S at(int ci, int y, int x) const { return v[ci * ps() + (y + pad) * rs() + (x + pad)]; }

    void fill_zero() { std::fill(v.begin(), v.end(), S(0)); }

    void zero_border() {
        if (pad == 0) return;
        for (int ci = 0; ci < c; ++ci) {
            S* p = ch(ci);
            for (int x = 0; x < rs(); ++x) {
                p[x] = S(0);
                p[(h + 1) * rs() + x] = S(0);
            }
            for (int y = 1; y <= h; ++y) {
                p[y * rs()] = S(0);
                p[y * rs() + w + 1] = S(0);
            }
        }
        v[c * ps()] = S(0);  // run slack
        v[c * ps() + 1] = S(0);
    }

    // contiguous copy of the inner window
    void copy_inner_to(S* dst) const {
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < h; ++y) {
                const S* row = ch(ci) + (y + pad) * rs() + pad;
                for (int x = 0; x < w; ++x) *dst++ = row[x];
            }
    }
    template <class T>
    void load_inner_from(const T* src) {
        fill_zero();
        for (int ci = 0; ci < c; ++ci)
            for (int y = 0; y < h; ++y) {
                S* row = ch(ci) + (y + pad) * rs() + pad;
                for (int x = 0; x < w; ++x) row[x] = static_cast<S>(*src++);
            }
    }
};

// named trainable block; optimizer, checkpoints and audits all go through this
template <class S>
struct ParamRef {
    std::string name;
    std::vector<S>* w = nullptr;
    std::vector<S>* g = nullptr;
    std::vector<int> shape;

    std::size_t count() const { return w->size(); }
};

template <class S>
void zero_grads(std::vector<ParamRef<S>>& refs) {
    for (auto& r : refs) std::fill(r.g->begin(), r.g->end(), S(0));
}

}  // namespace wrsn::nn
