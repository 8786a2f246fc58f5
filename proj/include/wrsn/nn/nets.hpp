#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wrsn/nn/layers.hpp"

namespace wrsn::nn {

// ---- value network: conv stack -> adaptive pool -> dense head ----
template <class S>
struct CriticNet {
    ConvK<S> conv1, conv2, conv3;
    AdaptiveAvgPool<S> pool;
    Dense<S> fc1, fc2;

    struct Ws {
        Fmap<S> x0, a1, a2, a3, p;
        std::vector<S> flat, h1, col;
        std::vector<S> d_flat, d_h1;
        Fmap<S> d3, d2, d1;
    };

    void init(Rng rng) {
        conv1.init("conv1", 4, 16, 5, 2, 2, rng);
        conv2.init("conv2", 16, 32, 5, 2, 2, rng);
        conv3.init("conv3", 32, 64, 5, 2, 2, rng);
        fc1.init("fc1", 4096, 100, rng);
        fc2.init("fc2", 100, 1, rng);
    }

    std::vector<ParamRef<S>> params() {
        std::vector<ParamRef<S>> refs;
        conv1.collect(refs);
        conv2.collect(refs);
        conv3.collect(refs);
        fc1.collect(refs);
        fc2.collect(refs);
        return refs;
    }

    template <class T>
    S forward(const T* obs, int T_side, Ws& ws) const {
        ws.x0.resize(4, T_side, T_side, 0);
        ws.x0.load_inner_from(obs);
        conv1.forward(ws.x0, ws.a1, ws.col);
        relu_forward(ws.a1);
        conv2.forward(ws.a1, ws.a2, ws.col);
        relu_forward(ws.a2);
        conv3.forward(ws.a2, ws.a3, ws.col);
        relu_forward(ws.a3);
        pool.forward(ws.a3, ws.p);
        ws.flat.resize(4096);
        ws.p.copy_inner_to(ws.flat.data());
        ws.h1.resize(100);
        fc1.forward(ws.flat.data(), ws.h1.data());
        for (auto& x : ws.h1) x = x > S(0) ? x : S(0);
        S value;
        fc2.forward(ws.h1.data(), &value);
        return value;
    }

    void backward(Ws& ws, S dvalue) {
        ws.d_h1.assign(100, S(0));
        fc2.backward(ws.h1.data(), &dvalue, ws.d_h1.data());
        for (int i = 0; i < 100; ++i)
            if (!(ws.h1[i] > S(0))) ws.d_h1[i] = S(0);
        ws.d_flat.assign(4096, S(0));
        fc1.backward(ws.flat.data(), ws.d_h1.data(), ws.d_flat.data());
        Fmap<S> dp;
        dp.resize(ws.p.c, ws.p.h, ws.p.w, 0);
        dp.load_inner_from(ws.d_flat.data());
        ws.d3.resize(ws.a3.c, ws.a3.h, ws.a3.w, 0);
        ws.d3.fill_zero();
        pool.backward(dp, ws.d3);
        relu_backward(ws.a3, ws.d3);
        ws.d2.resize(ws.a2.c, ws.a2.h, ws.a2.w, 0);
        ws.d2.fill_zero();
        conv3.backward(ws.a2, ws.d3, &ws.d2, ws.col);
        relu_backward(ws.a2, ws.d2);
        ws.d1.resize(ws.a1.c, ws.a1.h, ws.a1.w, 0);
        ws.d1.fill_zero();
        conv2.backward(ws.a1, ws.d2, &ws.d1, ws.col);
        relu_backward(ws.a1, ws.d1);
        conv1.backward(ws.x0, ws.d1, nullptr, ws.col);
    }
};

// ---- probability-map actor: U-Net trunk, mean map head, scalar log-std ----
template <class S>
struct ActorNet {
    static constexpr double kLogStdLo = -5.0, kLogStdHi = 2.0;

    Conv3x3<S> inc, d1, d2, u1, u2, outc;
    std::vector<S> log_std, g_log_std;  // single learned scalar

    struct Ws {
        Fmap<S> x0, a_inc, p1, a_d1, p2, a_d2, up1, a_u1, up2, a_u2, mean;
        MaxPool2<S> pool1, pool2;
        Fmap<S> g_mean, g_u2, g_up2, g_u1, g_up1, g_d2, g_p2, g_d1, g_p1, g_inc;
    };

    void init(Rng rng) {
        inc.init("inc", 4, 64, rng);
        d1.init("down1", 64, 128, rng);
        d2.init("down2", 128, 256, rng);
        u1.init("up1", 384, 128, rng);
        u2.init("up2", 192, 64, rng);
        outc.init("out_mean", 64, 1, rng);
        log_std.assign(1, S(0));
        g_log_std.assign(1, S(0));
    }

    std::vector<ParamRef<S>> params() {
        std::vector<ParamRef<S>> refs;
        inc.collect(refs);
        d1.collect(refs);
        d2.collect(refs);
        u1.collect(refs);
        u2.collect(refs);
        outc.collect(refs);
        refs.push_back({"log_std", &log_std, &g_log_std, {1}});
        return refs;
    }

    S clamped_log_std() const {
        return std::clamp(log_std[0], static_cast<S>(kLogStdLo), static_cast<S>(kLogStdHi));
    }

    // obs is a dense 4*T*T array; mean_out receives T*T values
    template <class T>
    void forward(const T* obs, int T_side, Ws& ws, S* mean_out, S* log_std_out) const {
        Upsample2<S> up;
        ws.x0.resize(4, T_side, T_side, 1);
        ws.x0.load_inner_from(obs);
        inc.forward({&ws.x0}, ws.a_inc);
        relu_forward(ws.a_inc);
        ws.pool1.forward(ws.a_inc, ws.p1);
        d1.forward({&ws.p1}, ws.a_d1);
        relu_forward(ws.a_d1);
        ws.pool2.forward(ws.a_d1, ws.p2);
        d2.forward({&ws.p2}, ws.a_d2);
        relu_forward(ws.a_d2);
        up.forward(ws.a_d2, ws.up1);
        u1.forward({&ws.up1, &ws.a_d1}, ws.a_u1);
        relu_forward(ws.a_u1);
        up.forward(ws.a_u1, ws.up2);
        u2.forward({&ws.up2, &ws.a_inc}, ws.a_u2);
        relu_forward(ws.a_u2);
        outc.forward({&ws.a_u2}, ws.mean);
        if (mean_out) ws.mean.copy_inner_to(mean_out);
        if (log_std_out) *log_std_out = clamped_log_std();
    }

    void backward(Ws& ws, const S* dmean, S dlog_std) {
        Upsample2<S> up;
        if (log_std[0] >= static_cast<S>(kLogStdLo) && log_std[0] <= static_cast<S>(kLogStdHi))
            g_log_std[0] += dlog_std;
        ws.g_mean.resize(1, ws.mean.h, ws.mean.w, 1);
        ws.g_mean.load_inner_from(dmean);
        auto prep = [](Fmap<S>& g, const Fmap<S>& like) {
            g.resize(like.c, like.h, like.w, 1);
        };
        prep(ws.g_u2, ws.a_u2);
        outc.backward({&ws.a_u2}, ws.g_mean, {&ws.g_u2});
        relu_backward(ws.a_u2, ws.g_u2);
        prep(ws.g_up2, ws.up2);
        prep(ws.g_inc, ws.a_inc);
        u2.backward({&ws.up2, &ws.a_inc}, ws.g_u2, {&ws.g_up2, &ws.g_inc});
        prep(ws.g_u1, ws.a_u1);
        up.backward(ws.g_up2, ws.g_u1);
        relu_backward(ws.a_u1, ws.g_u1);
        prep(ws.g_up1, ws.up1);
        prep(ws.g_d1, ws.a_d1);
        u1.backward({&ws.up1, &ws.a_d1}, ws.g_u1, {&ws.g_up1, &ws.g_d1});
        prep(ws.g_d2, ws.a_d2);
        up.backward(ws.g_up1, ws.g_d2);
        relu_backward(ws.a_d2, ws.g_d2);
        prep(ws.g_p2, ws.p2);
        d2.backward({&ws.p2}, ws.g_d2, {&ws.g_p2});
        ws.pool2.backward(ws.g_p2, ws.g_d1);  // accumulates onto the skip gradient
        relu_backward(ws.a_d1, ws.g_d1);
        prep(ws.g_p1, ws.p1);
        d1.backward({&ws.p1}, ws.g_d1, {&ws.g_p1});
        ws.pool1.backward(ws.g_p1, ws.g_inc);
        relu_backward(ws.a_inc, ws.g_inc);
        inc.backward({&ws.x0}, ws.g_inc, {nullptr});
    }
};

// ---- direct 3-vector actor (critic trunk, 3-component Gaussian head) ----
template <class S>
struct VectorActorNet {
    static constexpr double kLogStdLo = -5.0, kLogStdHi = 2.0;

    ConvK<S> conv1, conv2, conv3;
    AdaptiveAvgPool<S> pool;
    Dense<S> fc1, fc2;
    std::vector<S> log_std, g_log_std;  // one per action component

    struct Ws {
        Fmap<S> x0, a1, a2, a3, p;
        std::vector<S> flat, h1, col, d_flat, d_h1;
        Fmap<S> d3, d2, d1;
    };

    void init(Rng rng) {
        conv1.init("conv1", 4, 16, 5, 2, 2, rng);
        conv2.init("conv2", 16, 32, 5, 2, 2, rng);
        conv3.init("conv3", 32, 64, 5, 2, 2, rng);
        fc1.init("fc1", 4096, 100, rng);
        fc2.init("fc2", 100, 3, rng);
        log_std.assign(3, S(0));
        g_log_std.assign(3, S(0));
    }

    std::vector<ParamRef<S>> params() {
        std::vector<ParamRef<S>> refs;
        conv1.collect(refs);
        conv2.collect(refs);
        conv3.collect(refs);
        fc1.collect(refs);
        fc2.collect(refs);
        refs.push_back({"log_std", &log_std, &g_log_std, {3}});
        return refs;
    }

    S clamped_log_std(int i) const {
        return std::clamp(log_std[i], static_cast<S>(kLogStdLo), static_cast<S>(kLogStdHi));
    }

    template <class T>
    void forward(const T* obs, int T_side, Ws& ws, S* mean3, S* log_std3) const {
        ws.x0.resize(4, T_side, T_side, 0);
        ws.x0.load_inner_from(obs);
        conv1.forward(ws.x0, ws.a1, ws.col);
        relu_forward(ws.a1);
        conv2.forward(ws.a1, ws.a2, ws.col);
        relu_forward(ws.a2);
        conv3.forward(ws.a2, ws.a3, ws.col);
        relu_forward(ws.a3);
        pool.forward(ws.a3, ws.p);
        ws.flat.resize(4096);
        ws.p.copy_inner_to(ws.flat.data());
        ws.h1.resize(100);
        fc1.forward(ws.flat.data(), ws.h1.data());
        for (auto& x : ws.h1) x = x > S(0) ? x : S(0);
        fc2.forward(ws.h1.data(), mean3);
        for (int i = 0; i < 3; ++i) log_std3[i] = clamped_log_std(i);
    }

    void backward(Ws& ws, const S* dmean3, const S* dlog_std3) {
        for (int i = 0; i < 3; ++i)
            if (log_std[i] >= static_cast<S>(kLogStdLo) &&
                log_std[i] <= static_cast<S>(kLogStdHi))
                g_log_std[i] += dlog_std3[i];
        ws.d_h1.assign(100, S(0));
        fc2.backward(ws.h1.data(), dmean3, ws.d_h1.data());
        for (int i = 0; i < 100; ++i)
            if (!(ws.h1[i] > S(0))) ws.d_h1[i] = S(0);
        ws.d_flat.assign(4096, S(0));
        fc1.backward(ws.flat.data(), ws.d_h1.data(), ws.d_flat.data());
        Fmap<S> dp;
        dp.resize(ws.p.c, ws.p.h, ws.p.w, 0);
        dp.load_inner_from(ws.d_flat.data());
        ws.d3.resize(ws.a3.c, ws.a3.h, ws.a3.w, 0);
        ws.d3.fill_zero();
        pool.backward(dp, ws.d3);
        relu_backward(ws.a3, ws.d3);
        ws.d2.resize(ws.a2.c, ws.a2.h, ws.a2.w, 0);
        ws.d2.fill_zero();
        conv3.backward(ws.a2, ws.d3, &ws.d2, ws.col);
        relu_backward(ws.a2, ws.d2);
        ws.d1.resize(ws.a1.c, ws.a1.h, ws.a1.w, 0);
        ws.d1.fill_zero();
        conv2.backward(ws.a1, ws.d2, &ws.d1, ws.col);
        relu_backward(ws.a1, ws.d1);
        conv1.backward(ws.x0, ws.d1, nullptr, ws.col);
    }
};

// ---- Gaussian map / vector density helpers ----

template <class S>
S gaussian_log_prob(const S* mean, S log_std, const S* x, int n) {
    const S inv_var = std::exp(S(-2) * log_std);
    S quad = S(0);
    for (int i = 0; i < n; ++i) {
        const S d = x[i] - mean[i];
        quad += d * d;
    }
    return -S(0.5) * quad * inv_var -
           n * (log_std + S(0.5) * std::log(S(2) * S(M_PI)));
}

// accumulates d(logp)/d(mean) into dmean and returns d(logp)/d(log_std),
// both scaled by the upstream scalar dlogp
template <class S>
S gaussian_log_prob_grad(const S* mean, S log_std, const S* x, int n, S dlogp, S* dmean) {
    const S inv_var = std::exp(S(-2) * log_std);
    S quad = S(0);
    for (int i = 0; i < n; ++i) {
        const S d = x[i] - mean[i];
        quad += d * d;
        dmean[i] += dlogp * d * inv_var;
    }
    return dlogp * (quad * inv_var - static_cast<S>(n));
}

template <class S>
void softmax(const S* x, int n, float* pr) {
    S mx = x[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += std::exp(static_cast<double>(x[i] - mx));
    for (int i = 0; i < n; ++i)
        pr[i] = static_cast<float>(std::exp(static_cast<double>(x[i] - mx)) / sum);
}

}  // namespace wrsn::nn
