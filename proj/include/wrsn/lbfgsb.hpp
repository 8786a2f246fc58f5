#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <vector>

namespace wrsn {

// Small projected limited-memory quasi-Newton minimizer over a box.
// f(x, grad) returns the objective and fills the gradient. Deterministic;
// suited to the low-dimensional problems used here.
struct BoxLbfgs {
    int max_iter = 120;
    int memory = 8;
    double pg_tol = 1e-10;
    double armijo = 1e-4;

    struct Result {
        std::vector<double> x;
        double f = 0.0;
        int iterations = 0;
    };

    template <class F>
    Result minimize(F&& f, std::vector<double> x, const std::vector<double>& lo,
                    const std::vector<double>& hi) const {
        const std::size_t n = x.size();
        auto project = [&](std::vector<double>& p) {
            for (std::size_t i = 0; i < n; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
        };
        project(x);
        std::vector<double> g(n), g_new(n), d(n), x_new(n);
        double fx = f(x, g);

        std::deque<std::vector<double>> s_mem, y_mem;
        std::deque<double> rho_mem;

        Result res;
        for (int it = 0; it < max_iter; ++it) {
            // projected gradient: zero the components pinned at an active bound
            double pg_norm = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double pg = g[i];
                if (x[i] <= lo[i] && pg > 0.0) pg = 0.0;
                if (x[i] >= hi[i] && pg < 0.0) pg = 0.0;
                pg_norm = std::max(pg_norm, std::abs(pg));
            }
            if (pg_norm < pg_tol) break;

            // two-loop recursion
            d = g;
            std::vector<double> alpha(s_mem.size());
            for (int k = static_cast<int>(s_mem.size()) - 1; k >= 0; --k) {
                double sd = 0.0;
                for (std::size_t i = 0; i < n; ++i) sd += s_mem[k][i] * d[i];
                alpha[k] = rho_mem[k] * sd;
                for (std::size_t i = 0; i < n; ++i) d[i] -= alpha[k] * y_mem[k][i];
            }
            if (!s_mem.empty()) {
                double sy = 0.0, yy = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    sy += s_mem.back()[i] * y_mem.back()[i];
                    yy += y_mem.back()[i] * y_mem.back()[i];
                }
                const double scale = sy / std::max(yy, 1e-300);
                for (std::size_t i = 0; i < n; ++i) d[i] *= scale;
            }
            for (std::size_t k = 0; k < s_mem.size(); ++k) {
                double yd = 0.0;
                for (std::size_t i = 0; i < n; ++i) yd += y_mem[k][i] * d[i];
                const double b = rho_mem[k] * yd;
                for (std::size_t i = 0; i < n; ++i) d[i] += (alpha[k] - b) * s_mem[k][i];
            }
            for (std::size_t i = 0; i < n; ++i) d[i] = -d[i];

            // backtracking line search along the projected path
            double step = 1.0;
            double f_new = fx;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls) {
                for (std::size_t i = 0; i < n; ++i) x_new[i] = x[i] + step * d[i];
                project(x_new);
                double decrease = 0.0;
                for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (x_new[i] - x[i]);
                f_new = f(x_new, g_new);
                if (f_new <= fx + armijo * decrease && f_new < fx) {
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) break;

            std::vector<double> s_vec(n), y_vec(n);
            double sy = 0.0, ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s_vec[i] = x_new[i] - x[i];
                y_vec[i] = g_new[i] - g[i];
                sy += s_vec[i] * y_vec[i];
                ss += s_vec[i] * s_vec[i];
            }
            x = x_new;
            fx = f_new;
            std::swap(g, g_new);
            if (sy > 1e-12 * std::sqrt(ss)) {
                s_mem.push_back(std::move(s_vec));
                y_mem.push_back(std::move(y_vec));
                rho_mem.push_back(1.0 / sy);
                if (static_cast<int>(s_mem.size()) > memory) {
                    s_mem.pop_front();
                    y_mem.pop_front();
                    rho_mem.pop_front();
                }
            }
            res.iterations = it + 1;
        }
        res.x = std::move(x);
        res.f = fx;
        return res;
    }
};

}  // namespace wrsn
