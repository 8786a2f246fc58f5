#include "wrsn/observation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace wrsn {

double kernel(Vec2 x, Vec2 xp, double h) {
    return std::exp(-dist2(x, xp) / (2.0 * h * h));
}

namespace {

// weighted kernel sources of one field for one agent
struct Source {
    Vec2 pos;
    double w;
};

std::vector<Source> f1_sources(const NetworkState& st) {
    const EnergyParams& P = st.inst->params;
    std::vector<Source> out;
    for (const auto& s : st.sensors) {
        if (!s.alive) continue;
        const double denom = std::max(s.energy - P.e_th, st.cfg.e_floor);
        out.push_back({s.pos, s.p_rate / (P.beta * P.beta) * (P.e_max - P.e_th) / denom});
    }
    return out;
}

std::vector<Source> f2_sources(const NetworkState& st, int agent) {
    const auto& mc = st.chargers.at(agent);
    return {{mc.pos, mc.energy / st.inst->params.E_max}};
}

std::vector<Source> f3_sources(const NetworkState& st, int agent) {
    const EnergyParams& P = st.inst->params;
    std::vector<Source> out;
    for (const auto& mc : st.chargers) {
        if (mc.id == agent || mc.mode != ChargerMode::Charging) continue;
        out.push_back({mc.pos, mc.t_charge / (P.e_max - P.e_th)});
    }
    return out;
}

std::vector<Source> f4_sources(const NetworkState& st, int agent, F4Anchor anchor) {
    std::vector<Source> out;
    for (const auto& mc : st.chargers) {
        if (mc.id == agent) continue;
        if (mc.mode != ChargerMode::Moving && mc.mode != ChargerMode::Returning) continue;
        const Vec2 leg_dest =
            mc.mode == ChargerMode::Returning ? st.inst->base_station : mc.macro_dest;
        const double remaining = dist(mc.pos, leg_dest);
        const Vec2 at = anchor == F4Anchor::Destination ? leg_dest : mc.pos;
        out.push_back({at, remaining / st.inst->d_avg});
    }
    return out;
}

double eval_sources(const std::vector<Source>& src, Vec2 x, double h) {
    double v = 0.0;
    for (const auto& s : src) v += s.w * kernel(x, s.pos, h);
    return v;
}

// separable accumulation: K(cell, p) = exp(-dx^2/2h^2) * exp(-dy^2/2h^2)
void splat(const std::vector<Source>& src, const ObservationGrid& g, double h,
           float* channel) {
    const int T = g.T;
    std::vector<double> ex(T), ey(T), acc(static_cast<std::size_t>(T) * T, 0.0);
    const double inv = 1.0 / (2.0 * h * h);
    for (const auto& s : src) {
        for (int u = 0; u < T; ++u) {
            const double d = g.cx(u) - s.pos.x;
            ex[u] = std::exp(-d * d * inv);
        }
        for (int v = 0; v < T; ++v) {
            const double d = g.cy(v) - s.pos.y;
            ey[v] = std::exp(-d * d * inv);
        }
        for (int u = 0; u < T; ++u) {
            const double wu = s.w * ex[u];
            double* row = acc.data() + static_cast<std::size_t>(u) * T;
            for (int v = 0; v < T; ++v) row[v] += wu * ey[v];
        }
    }
    for (int i = 0; i < T * T; ++i) channel[i] = static_cast<float>(acc[i]);
}

}  // namespace

double field_f1(const NetworkState& st, Vec2 x, double h) {
    return eval_sources(f1_sources(st), x, h);
}
double field_f2(const NetworkState& st, int agent, Vec2 x, double h) {
    return eval_sources(f2_sources(st, agent), x, h);
}
double field_f3(const NetworkState& st, int agent, Vec2 x, double h) {
    return eval_sources(f3_sources(st, agent), x, h);
}
double field_f4(const NetworkState& st, int agent, Vec2 x, double h, F4Anchor anchor) {
    return eval_sources(f4_sources(st, agent, anchor), x, h);
}

Observation render(const NetworkState& st, int agent, const ObservationGrid& grid,
                   const ObsConfig& cfg) {
    Observation obs;
    obs.T = grid.T;
    obs.agent_id = agent;
    obs.timestamp = st.clock;
    obs.data.assign(static_cast<std::size_t>(4) * grid.T * grid.T, 0.0f);
    const bool f1_on = cfg.mask != ObsMask::No1;
    const bool rest_on = cfg.mask != ObsMask::No234;
    const int plane = grid.T * grid.T;
    if (f1_on) splat(f1_sources(st), grid, cfg.h, obs.data.data());
    if (rest_on) {
        splat(f2_sources(st, agent), grid, cfg.h, obs.data.data() + plane);
        splat(f3_sources(st, agent), grid, cfg.h, obs.data.data() + 2 * plane);
        splat(f4_sources(st, agent, cfg.f4_anchor), grid, cfg.h, obs.data.data() + 3 * plane);
    }
    return obs;
}

void write_channel_pgm(const Observation& obs, int ch, const std::string& path) {
    const int T = obs.T;
    float mx = 0.0f;
    for (int i = 0; i < T * T; ++i) mx = std::max(mx, obs.data[ch * T * T + i]);
    std::ofstream out(path);
    out << "P2\n" << T << " " << T << "\n255\n";
    for (int u = 0; u < T; ++u) {
        for (int v = 0; v < T; ++v) {
            const float val = obs.at(ch, u, v);
            const int g = mx > 0.0f ? static_cast<int>(std::lround(255.0 * val / mx)) : 0;
            out << g << (v + 1 < T ? ' ' : '\n');
        }
    }
}

void write_channel_csv(const Observation& obs, int ch, const std::string& path) {
    std::ofstream out(path);
    char buf[32];
    for (int u = 0; u < obs.T; ++u) {
        for (int v = 0; v < obs.T; ++v) {
            std::snprintf(buf, sizeof(buf), "%.6g", static_cast<double>(obs.at(ch, u, v)));
            out << buf << (v + 1 < obs.T ? "," : "\n");
        }
    }
}

}  // namespace wrsn
