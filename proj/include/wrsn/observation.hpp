#pragma once

#include <string>
#include <vector>

#include "wrsn/energy_sim.hpp"

namespace wrsn {

// T x T cell grid over the sensor bounding box; cell centers at
// H0 + (i + 0.5) * (H1 - H0) / T for 0-based i (and likewise on the y axis).
struct ObservationGrid {
    int T = 100;
    double h0 = 0, h1 = 0, w0 = 0, w1 = 0;

    static ObservationGrid from_instance(const ScenarioInstance& inst, int T) {
        return {T, inst.h0, inst.h1, inst.w0, inst.w1};
    }
    double cell_w_x() const { return (h1 - h0) / T; }
    double cell_w_y() const { return (w1 - w0) / T; }
    double cx(int u) const { return h0 + (u + 0.5) * cell_w_x(); }
    double cy(int v) const { return w0 + (v + 0.5) * cell_w_y(); }
};

enum class ObsMask { Full, No1, No234 };
enum class F4Anchor { Destination, Current };

struct ObsConfig {
    int T = 100;
    double h = 80.0;  // kernel width; defaults to r_c
    ObsMask mask = ObsMask::Full;
    F4Anchor f4_anchor = F4Anchor::Destination;
};

// 4 stacked T x T fields in layer order (F1, F2, F3, F4); data[(ch*T + u)*T + v]
// with u on the x (H) axis and v on the y (W) axis.
struct Observation {
    int T = 0;
    int agent_id = 0;
    double timestamp = 0.0;
    std::vector<float> data;

    float at(int ch, int u, int v) const { return data[(ch * T + u) * T + v]; }
};

double kernel(Vec2 x, Vec2 xp, double h);

// reference field evaluations at an arbitrary point
double field_f1(const NetworkState& st, Vec2 x, double h);
double field_f2(const NetworkState& st, int agent, Vec2 x, double h);
double field_f3(const NetworkState& st, int agent, Vec2 x, double h);
double field_f4(const NetworkState& st, int agent, Vec2 x, double h, F4Anchor anchor);

Observation render(const NetworkState& st, int agent, const ObservationGrid& grid,
                   const ObsConfig& cfg);

void write_channel_pgm(const Observation& obs, int ch, const std::string& path);
void write_channel_csv(const Observation& obs, int ch, const std::string& path);

}  // namespace wrsn
