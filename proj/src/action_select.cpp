#include "wrsn/action_select.hpp"

#include <algorithm>
#include <cmath>

#include "wrsn/lbfgsb.hpp"

namespace wrsn {

ArgmaxResult argmax_cell(std::span<const float> pr, int T) {
    ArgmaxResult r;
    float best = pr[0];
    int best_i = 0;
    for (int i = 1; i < T * T; ++i) {
        if (pr[i] > best) {
            best = pr[i];
            best_i = i;
        }
    }
    r.u = best_i / T;
    r.v = best_i % T;
    r.p_max = best;
    return r;
}

double charging_time(double p_max, const EnergyParams& p) {
    return p_max * (p.e_max - p.e_th) / (p.alpha / (p.beta * p.beta));
}

RegionD region_bounds(int u, int v, const ObservationGrid& grid) {
    const int u1 = u + 1, v1 = v + 1;  // the box formula uses 1-based indices
    RegionD r;
    r.a_lo = u1 == 1 ? grid.h0 : grid.h0 + (grid.h1 - grid.h0) * (u1 - 0.5) / grid.T;
    r.a_hi = std::min(grid.h1, grid.h0 + (grid.h1 - grid.h0) * (u1 + 0.5) / grid.T);
    r.b_lo = v1 == 1 ? grid.w0 : grid.w0 + (grid.w1 - grid.w0) * (v1 - 0.5) / grid.T;
    r.b_hi = std::min(grid.w1, grid.w0 + (grid.w1 - grid.w0) * (v1 + 0.5) / grid.T);
    return r;
}

namespace {

struct WeightedSensor {
    Vec2 pos;
    double w;  // p / (e - e_th), floored
};

std::vector<WeightedSensor> weighted_alive_sensors(const NetworkState& st) {
    std::vector<WeightedSensor> out;
    const EnergyParams& P = st.inst->params;
    for (const auto& s : st.sensors) {
        if (!s.alive) continue;
        out.push_back({s.pos, s.p_rate / std::max(s.energy - P.e_th, st.cfg.e_floor)});
    }
    return out;
}

double true_objective(const std::vector<WeightedSensor>& ws, Vec2 p, const EnergyParams& P) {
    double v = 0.0;
    for (const auto& s : ws) v += s.w * charge_rate(dist(p, s.pos), P);
    return v;
}

// The cutoff at r_charge makes the true objective discontinuous; the search
// runs on a smooth surrogate where the cutoff becomes a logistic gate, so
// quasi-Newton steps near the boundary still see a usable gradient.
constexpr double kGateWidth = 2.0;  // m

double soft_objective(const std::vector<WeightedSensor>& ws, const double* x,
                      const EnergyParams& P, double* grad) {
    double v = 0.0;
    grad[0] = grad[1] = 0.0;
    for (const auto& s : ws) {
        const double dx = x[0] - s.pos.x, dy = x[1] - s.pos.y;
        const double d = std::sqrt(dx * dx + dy * dy);
        const double db = d + P.beta;
        const double rate = P.alpha / (db * db);
        const double gate = 1.0 / (1.0 + std::exp((d - P.r_charge) / kGateWidth));
        v += s.w * rate * gate;
        // d/dd [rate * gate] = -2 rate/db * gate - rate * gate(1-gate)/kGateWidth
        const double dv_dd =
            s.w * (-2.0 * rate / db * gate - rate * gate * (1.0 - gate) / kGateWidth);
        if (d > 1e-12) {
            grad[0] += dv_dd * dx / d;
            grad[1] += dv_dd * dy / d;
        }
    }
    return v;
}

double box_point_distance(const RegionD& r, Vec2 p) {
    const double dx = std::max({r.a_lo - p.x, 0.0, p.x - r.a_hi});
    const double dy = std::max({r.b_lo - p.y, 0.0, p.y - r.b_hi});
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

OptimizeResult optimize_location(const NetworkState& st, const RegionD& region) {
    const EnergyParams& P = st.inst->params;
    const auto ws = weighted_alive_sensors(st);
    const Vec2 center{0.5 * (region.a_lo + region.a_hi), 0.5 * (region.b_lo + region.b_hi)};

    bool reachable = false;
    for (const auto& s : ws) {
        if (box_point_distance(region, s.pos) <= P.r_charge) {
            reachable = true;
            break;
        }
    }
    OptimizeResult res;
    if (!reachable) {
        res.point = center;
        res.objective = 0.0;
        res.zero_gain = true;
        return res;
    }

    // multi-start: 3x3 grid over the box plus the center
    std::vector<Vec2> starts;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            starts.push_back({region.a_lo + (region.a_hi - region.a_lo) * (0.25 + 0.25 * i),
                              region.b_lo + (region.b_hi - region.b_lo) * (0.25 + 0.25 * j)});
    starts.push_back(center);

    BoxLbfgs opt;
    const std::vector<double> lo{region.a_lo, region.b_lo};
    const std::vector<double> hi{region.a_hi, region.b_hi};
    auto neg_soft = [&](const std::vector<double>& x, std::vector<double>& g) {
        double grad[2];
        const double v = soft_objective(ws, x.data(), P, grad);
        g[0] = -grad[0];
        g[1] = -grad[1];
        return -v;
    };

    Vec2 best_point = center;
    double best_obj = true_objective(ws, center, P);
    auto consider = [&](Vec2 p) {
        const double obj = true_objective(ws, p, P);
        if (obj > best_obj) {
            best_obj = obj;
            best_point = p;
        }
    };
    for (const auto& s0 : starts) {
        consider(s0);  // a start itself can outrank its refined endpoint
        const auto r = opt.minimize(neg_soft, {s0.x, s0.y}, lo, hi);
        consider({r.x[0], r.x[1]});
    }
    res.point = best_point;
    res.objective = best_obj;
    res.zero_gain = best_obj <= 0.0;
    return res;
}

MacroAction select_action(std::span<const float> pr, const NetworkState& st,
                          const ObservationGrid& grid, ArgmaxResult* argmax_out,
                          RegionD* region_out, OptimizeResult* opt_out) {
    const ArgmaxResult am = argmax_cell(pr, grid.T);
    const RegionD region = region_bounds(am.u, am.v, grid);
    const OptimizeResult opt = optimize_location(st, region);
    if (argmax_out) *argmax_out = am;
    if (region_out) *region_out = region;
    if (opt_out) *opt_out = opt;
    return {opt.point.x, opt.point.y, charging_time(am.p_max, st.inst->params)};
}

}  // namespace wrsn
