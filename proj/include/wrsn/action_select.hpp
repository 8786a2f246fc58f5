#pragma once

#include <span>

#include "wrsn/energy_sim.hpp"
#include "wrsn/macro_action.hpp"
#include "wrsn/observation.hpp"

namespace wrsn {

// footprint of the argmax cell; the box constraint for the location optimizer
struct RegionD {
    double a_lo = 0, a_hi = 0, b_lo = 0, b_hi = 0;
};

struct ArgmaxResult {
    int u = 0, v = 0;  // 0-based cell indices
    double p_max = 0.0;
};

// maximum entry of a probability map; ties go to the first cell in row-major
// scan order
ArgmaxResult argmax_cell(std::span<const float> pr, int T);

// c = p_max * (e_max - e_th) / (alpha / beta^2)
double charging_time(double p_max, const EnergyParams& p);

// Box around the argmax cell. With 1-based indices the box on the first axis
// is [H0 + (H1-H0)(u-0.5)/T, H0 + (H1-H0)(u+0.5)/T]; edge cells are clamped
// into the bounds, and the first cell absorbs the otherwise unreachable
// half-cell margin at the lower edge.
RegionD region_bounds(int u, int v, const ObservationGrid& grid);

struct OptimizeResult {
    Vec2 point;
    double objective = 0.0;  // true (cutoff) objective at the returned point
    bool zero_gain = false;  // no sensor within r_charge of any point in the box
};

// Maximizes sum_j P_charge(d(L_j, [a,b])) * p_j / (e_j - e_th) over the box,
// via multi-start projected quasi-Newton on a smoothed objective; results are
// ranked by the true objective.
OptimizeResult optimize_location(const NetworkState& st, const RegionD& region);

// full pipeline: argmax cell -> charging time -> region -> location
MacroAction select_action(std::span<const float> pr, const NetworkState& st,
                          const ObservationGrid& grid, ArgmaxResult* argmax_out = nullptr,
                          RegionD* region_out = nullptr, OptimizeResult* opt_out = nullptr);

}  // namespace wrsn
