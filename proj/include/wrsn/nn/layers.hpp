#pragma once

#include <algorithm>
#include <vector>

#include "wrsn/nn/tensor.hpp"
#include "wrsn/rng.hpp"

namespace wrsn::nn {

template <class S>
void he_init(std::vector<S>& w, int fan_in, Rng& rng) {
    const double std = std::sqrt(2.0 / fan_in);
    for (auto& x : w) x = static_cast<S>(std * rng.normal());
}

// ---- 3x3 stride-1 pad-1 convolution over bordered feature maps ----
//
// Weights are stored offset-major: w[(ky*3+kx)][oc][ic], ic running over the
// concatenated channels of all inputs, so each kernel offset is one dense
// (out x in) GEMM operand. Multiple inputs realize skip concatenations
// without materializing the concatenated tensor.
template <class S>
struct Conv3x3 {
    std::string name;
    int out_c = 0, in_c = 0;
    std::vector<S> w, gw, b, gb;

    void init(std::string nm, int in_channels, int out_channels, Rng& rng) {
        name = std::move(nm);
        in_c = in_channels;
        out_c = out_channels;
        w.resize(static_cast<std::size_t>(9) * out_c * in_c);
        gw.assign(w.size(), S(0));
        b.assign(out_c, S(0));
        gb.assign(out_c, S(0));
        he_init(w, in_c * 9, rng);
    }

    void collect(std::vector<ParamRef<S>>& refs) {
        refs.push_back({name + ".w", &w, &gw, {3, 3, out_c, in_c}});
        refs.push_back({name + ".b", &b, &gb, {out_c}});
    }

    void forward(std::vector<const Fmap<S>*> ins, Fmap<S>& out) const {
        out.resize(out_c, ins[0]->h, ins[0]->w, 1);
        const int N = out.h * out.rs();
        MapRM<S> C(out.v.data() + out.rs() + 1, out_c, N, Eigen::OuterStride<>(out.ps()));
        for (int o = 0; o < 9; ++o) {
            const int ky = o / 3, kx = o % 3;
            CMapRM<S> W(w.data() + static_cast<std::size_t>(o) * out_c * in_c, out_c, in_c,
                        Eigen::OuterStride<>(in_c));
            int col = 0;
            for (const auto* in : ins) {
                CMapRM<S> B(in->v.data() + ky * in->rs() + kx, in->c, N,
                            Eigen::OuterStride<>(in->ps()));
                C.noalias() += W.middleCols(col, in->c) * B;
                col += in->c;
            }
        }
        for (int oc = 0; oc < out_c; ++oc) {
            S* run = out.v.data() + oc * out.ps() + out.rs() + 1;
            const S bias = b[oc];
            for (int i = 0; i < N; ++i) run[i] += bias;
        }
        out.zero_border();
    }

    // dout must carry a zero border (the ReLU mask upstream guarantees it);
    // din fmaps are accumulated into and must be pre-sized and pre-zeroed
    void backward(std::vector<const Fmap<S>*> ins, Fmap<S>& dout,
                  std::vector<Fmap<S>*> dins) {
        dout.zero_border();
        const int N = dout.h * dout.rs();
        CMapRM<S> C(dout.v.data() + dout.rs() + 1, out_c, N,
                    Eigen::OuterStride<>(dout.ps()));
        for (int oc = 0; oc < out_c; ++oc) {
            const S* run = dout.v.data() + oc * dout.ps() + dout.rs() + 1;
            S acc = S(0);
            for (int i = 0; i < N; ++i) acc += run[i];
            gb[oc] += acc;
        }
        for (int o = 0; o < 9; ++o) {
            const int ky = o / 3, kx = o % 3;
            MapRM<S> GW(gw.data() + static_cast<std::size_t>(o) * out_c * in_c, out_c, in_c,
                        Eigen::OuterStride<>(in_c));
            CMapRM<S> W(w.data() + static_cast<std::size_t>(o) * out_c * in_c, out_c, in_c,
                        Eigen::OuterStride<>(in_c));
            int col = 0;
            for (std::size_t i = 0; i < ins.size(); ++i) {
                const Fmap<S>* in = ins[i];
                CMapRM<S> B(in->v.data() + ky * in->rs() + kx, in->c, N,
                            Eigen::OuterStride<>(in->ps()));
                GW.middleCols(col, in->c).noalias() += C * B.transpose();
                if (dins[i]) {
                    Fmap<S>& din = *dins[i];
                    MapRM<S> D(din.v.data() + ky * din.rs() + kx, din.c, N,
                               Eigen::OuterStride<>(din.ps()));
                    D.noalias() += W.middleCols(col, in->c).transpose() * C;
                }
                col += in->c;
            }
        }
    }
};

// relu over the whole buffer; the zero border stays zero, so the backward
// mask also zeroes border gradients before they reach a convolution
template <class S>
void relu_forward(Fmap<S>& a) {
    for (auto& x : a.v) x = x > S(0) ? x : S(0);
}
template <class S>
void relu_backward(const Fmap<S>& act, Fmap<S>& grad) {
    for (std::size_t i = 0; i < grad.v.size(); ++i)
        if (!(act.v[i] > S(0))) grad.v[i] = S(0);
}

// ---- 2x2 max pooling (stride 2) over bordered maps ----
template <class S>
struct MaxPool2 {
    std::vector<std::int32_t> argmax;  // buffer index into the input, per out cell

    void forward(const Fmap<S>& in, Fmap<S>& out) {
        out.resize(in.c, in.h / 2, in.w / 2, 1);
        argmax.resize(static_cast<std::size_t>(in.c) * out.h * out.w);
        std::size_t ai = 0;
        for (int ci = 0; ci < in.c; ++ci) {
            for (int y = 0; y < out.h; ++y)
                for (int x = 0; x < out.w; ++x) {
                    int best_idx = ci * in.ps() + (2 * y + 1) * in.rs() + (2 * x + 1);
                    S best = in.v[best_idx];
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const int idx =
                                ci * in.ps() + (2 * y + dy + 1) * in.rs() + (2 * x + dx + 1);
                            if (in.v[idx] > best) {  // first occurrence wins ties
                                best = in.v[idx];
                                best_idx = idx;
                            }
                        }
                    out.at(ci, y, x) = best;
                    argmax[ai++] = best_idx;
                }
        }
        out.zero_border();
    }

    void backward(const Fmap<S>& dout, Fmap<S>& din) const {
        std::size_t ai = 0;
        for (int ci = 0; ci < dout.c; ++ci)
            for (int y = 0; y < dout.h; ++y)
                for (int x = 0; x < dout.w; ++x) din.v[argmax[ai++]] += dout.at(ci, y, x);
    }
};

// ---- nearest-neighbour 2x upsampling over bordered maps ----
template <class S>
struct Upsample2 {
    void forward(const Fmap<S>& in, Fmap<S>& out) const {
        out.resize(in.c, in.h * 2, in.w * 2, 1);
        for (int ci = 0; ci < in.c; ++ci)
            for (int y = 0; y < out.h; ++y) {
                const S* src = in.ch(ci) + (y / 2 + 1) * in.rs() + 1;
                S* dst = out.ch(ci) + (y + 1) * out.rs() + 1;
                for (int x = 0; x < out.w; ++x) dst[x] = src[x / 2];
            }
    }
    void backward(const Fmap<S>& dout, Fmap<S>& din) const {
        for (int ci = 0; ci < dout.c; ++ci)
            for (int y = 0; y < dout.h; ++y) {
                const S* src = dout.ch(ci) + (y + 1) * dout.rs() + 1;
                S* dst = din.ch(ci) + (y / 2 + 1) * din.rs() + 1;
                for (int x = 0; x < dout.w; ++x) dst[x / 2] += src[x];
            }
    }
};

// ---- generic strided convolution via im2col (critic path) ----
template <class S>
struct ConvK {
    std::string name;
    int out_c = 0, in_c = 0, k = 0, stride = 1, padk = 0;
    std::vector<S> w, gw, b, gb;  // w[oc][ic][ky][kx]

    void init(std::string nm, int in_channels, int out_channels, int kernel, int stride_,
              int pad_, Rng& rng) {
        name = std::move(nm);
        in_c = in_channels;
        out_c = out_channels;
        k = kernel;
        stride = stride_;
        padk = pad_;
        w.resize(static_cast<std::size_t>(out_c) * in_c * k * k);
        gw.assign(w.size(), S(0));
        b.assign(out_c, S(0));
        gb.assign(out_c, S(0));
        he_init(w, in_c * k * k, rng);
    }

    void collect(std::vector<ParamRef<S>>& refs) {
        refs.push_back({name + ".w", &w, &gw, {out_c, in_c, k, k}});
        refs.push_back({name + ".b", &b, &gb, {out_c}});
    }

    int out_h(int ih) const { return (ih + 2 * padk - k) / stride + 1; }

    void im2col(const Fmap<S>& in, std::vector<S>& col) const {
        const int oh = out_h(in.h), ow = out_h(in.w);
        col.assign(static_cast<std::size_t>(in_c) * k * k * oh * ow, S(0));
        std::size_t r = 0;
        for (int ci = 0; ci < in_c; ++ci)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    for (int y = 0; y < oh; ++y) {
                        const int iy = y * stride + ky - padk;
                        for (int x = 0; x < ow; ++x) {
                            const int ix = x * stride + kx - padk;
                            col[r * oh * ow + y * ow + x] =
                                (iy >= 0 && iy < in.h && ix >= 0 && ix < in.w)
                                    ? in.at(ci, iy, ix)
                                    : S(0);
                        }
                    }
                    ++r;
                }
    }

    void forward(const Fmap<S>& in, Fmap<S>& out, std::vector<S>& col) const {
        const int oh = out_h(in.h), ow = out_h(in.w);
        out.resize(out_c, oh, ow, 0);
        im2col(in, col);
        const int kk = in_c * k * k, N = oh * ow;
        CMapRM<S> W(w.data(), out_c, kk, Eigen::OuterStride<>(kk));
        CMapRM<S> B(col.data(), kk, N, Eigen::OuterStride<>(N));
        MapRM<S> C(out.v.data(), out_c, N, Eigen::OuterStride<>(out.ps()));
        C.noalias() = W * B;
        for (int oc = 0; oc < out_c; ++oc) {
            S* p = out.ch(oc);
            for (int i = 0; i < N; ++i) p[i] += b[oc];
        }
    }

    void backward(const Fmap<S>& in, const Fmap<S>& dout, Fmap<S>* din,
                  std::vector<S>& col) {
        const int oh = dout.h, ow = dout.w, N = oh * ow, kk = in_c * k * k;
        im2col(in, col);
        CMapRM<S> C(dout.v.data(), out_c, N, Eigen::OuterStride<>(dout.ps()));
        CMapRM<S> B(col.data(), kk, N, Eigen::OuterStride<>(N));
        MapRM<S> GW(gw.data(), out_c, kk, Eigen::OuterStride<>(kk));
        GW.noalias() += C * B.transpose();
        for (int oc = 0; oc < out_c; ++oc) {
            const S* p = dout.ch(oc);
            S acc = S(0);
            for (int i = 0; i < N; ++i) acc += p[i];
            gb[oc] += acc;
        }
        if (!din) return;
        std::vector<S> dcol(static_cast<std::size_t>(kk) * N);
        MapRM<S> DC(dcol.data(), kk, N, Eigen::OuterStride<>(N));
        CMapRM<S> W(w.data(), out_c, kk, Eigen::OuterStride<>(kk));
        DC.noalias() = W.transpose() * C;
        std::size_t r = 0;
        for (int ci = 0; ci < in_c; ++ci)
            for (int ky = 0; ky < k; ++ky)
                for (int kx = 0; kx < k; ++kx) {
                    for (int y = 0; y < oh; ++y) {
                        const int iy = y * stride + ky - padk;
                        if (iy < 0 || iy >= din->h) continue;
                        for (int x = 0; x < ow; ++x) {
                            const int ix = x * stride + kx - padk;
                            if (ix >= 0 && ix < din->w)
                                din->at(ci, iy, ix) += dcol[r * N + y * ow + x];
                        }
                    }
                    ++r;
                }
    }
};

// ---- adaptive average pooling to a fixed output size ----
template <class S>
struct AdaptiveAvgPool {
    int out_hw = 8;

    static int lo(int i, int in, int out) { return (i * in) / out; }
    static int hi(int i, int in, int out) { return ((i + 1) * in + out - 1) / out; }

    void forward(const Fmap<S>& in, Fmap<S>& out) const {
        out.resize(in.c, out_hw, out_hw, 0);
        for (int ci = 0; ci < in.c; ++ci)
            for (int y = 0; y < out_hw; ++y)
                for (int x = 0; x < out_hw; ++x) {
                    const int y0 = lo(y, in.h, out_hw), y1 = hi(y, in.h, out_hw);
                    const int x0 = lo(x, in.w, out_hw), x1 = hi(x, in.w, out_hw);
                    S acc = S(0);
                    for (int yy = y0; yy < y1; ++yy)
                        for (int xx = x0; xx < x1; ++xx) acc += in.at(ci, yy, xx);
                    out.at(ci, y, x) = acc / static_cast<S>((y1 - y0) * (x1 - x0));
                }
    }
    void backward(const Fmap<S>& dout, Fmap<S>& din) const {
        for (int ci = 0; ci < dout.c; ++ci)
            for (int y = 0; y < out_hw; ++y)
                for (int x = 0; x < out_hw; ++x) {
                    const int y0 = lo(y, din.h, out_hw), y1 = hi(y, din.h, out_hw);
                    const int x0 = lo(x, din.w, out_hw), x1 = hi(x, din.w, out_hw);
                    const S share =
                        dout.at(ci, y, x) / static_cast<S>((y1 - y0) * (x1 - x0));
                    for (int yy = y0; yy < y1; ++yy)
                        for (int xx = x0; xx < x1; ++xx) din.at(ci, yy, xx) += share;
                }
    }
};

// ---- fully connected ----
template <class S>
struct Dense {
    std::string name;
    int in_n = 0, out_n = 0;
    std::vector<S> w, gw, b, gb;

    void init(std::string nm, int in, int out, Rng& rng) {
        name = std::move(nm);
        in_n = in;
        out_n = out;
        w.resize(static_cast<std::size_t>(out) * in);
        gw.assign(w.size(), S(0));
        b.assign(out, S(0));
        gb.assign(out, S(0));
        he_init(w, in, rng);
    }

    void collect(std::vector<ParamRef<S>>& refs) {
        refs.push_back({name + ".w", &w, &gw, {out_n, in_n}});
        refs.push_back({name + ".b", &b, &gb, {out_n}});
    }

    void forward(const S* x, S* y) const {
        CMapRM<S> W(w.data(), out_n, in_n, Eigen::OuterStride<>(in_n));
        Eigen::Map<const Eigen::Vector<S, Eigen::Dynamic>> X(x, in_n);
        Eigen::Map<Eigen::Vector<S, Eigen::Dynamic>> Y(y, out_n);
        Y.noalias() = W * X;
        for (int i = 0; i < out_n; ++i) y[i] += b[i];
    }

    void backward(const S* x, const S* dy, S* dx) {
        CMapRM<S> W(w.data(), out_n, in_n, Eigen::OuterStride<>(in_n));
        MapRM<S> GW(gw.data(), out_n, in_n, Eigen::OuterStride<>(in_n));
        Eigen::Map<const Eigen::Vector<S, Eigen::Dynamic>> X(x, in_n), DY(dy, out_n);
        GW.noalias() += DY * X.transpose();
        for (int i = 0; i < out_n; ++i) gb[i] += dy[i];
        if (dx) {
            Eigen::Map<Eigen::Vector<S, Eigen::Dynamic>> DX(dx, in_n);
            DX.noalias() = W.transpose() * DY;
        }
    }
};

}  // namespace wrsn::nn
