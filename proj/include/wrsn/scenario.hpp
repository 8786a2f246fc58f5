#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "wrsn/geometry.hpp"

namespace wrsn {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvariantViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Radio / charging / mobility constants. Defaults follow the base parameter
// set of the energy model; d0 is derived from the amplifier constants.
struct EnergyParams {
    double eps_elec = 50e-9;    // J/bit
    double eps_fs = 10e-12;     // J/bit/m^2
    double eps_mp = 1.3e-15;    // J/bit/m^4
    double d0 = 0.0;            // m, crossover distance; sqrt(eps_fs/eps_mp)
    double b_packet = 4000.0;   // bits per generated packet
    double packet_period = 1.0; // s between packets of one sensor
    double r_c = 80.0;          // m, communication radius
    double r_s = 40.0;          // m, sensing radius
    double e_th = 540.0;        // J, sensor death threshold
    double e_max = 10800.0;     // J, sensor battery capacity
    double E_max = 108000.0;    // J, charger battery capacity
    double r_charge = 27.0;     // m, charging range
    double alpha = 4500.0;      // J*m^2/s
    double beta = 30.0;         // m
    double P_M = 1.0;           // J/m, charger movement cost
    double V = 5.0;             // m/s, charger speed
    double t_sm = 604800.0;     // s, episode cap

    // fills d0 when unset and checks positivity / ordering invariants
    void finalize();
};

struct ScenarioInstance {
    Vec2 base_station;
    std::vector<Vec2> sensors;
    std::vector<Vec2> targets;
    EnergyParams params;

    // derived at construction, never read from files
    double h0 = 0, h1 = 0;  // x-axis bounds of sensor positions
    double w0 = 0, w1 = 0;  // y-axis bounds of sensor positions
    double d_avg = 0;       // mean pairwise sensor distance

    std::vector<std::vector<int>> monitors;           // per target: sensors within r_s
    std::vector<std::vector<int>> monitored_targets;  // per sensor: targets within r_s

    int num_sensors() const { return static_cast<int>(sensors.size()); }
    int num_targets() const { return static_cast<int>(targets.size()); }
    double sensor_bs_dist(int j) const { return dist(sensors[j], base_station); }
};

struct RoutingTable {
    static constexpr int kToBase = -1;
    static constexpr int kDeadEnd = -2;
    std::vector<int> next_hop;  // sensor -> sensor index, kToBase, or kDeadEnd
    std::vector<int> hop_load;  // sensors whose chain passes through this one
};

// Computes bounds / d_avg / monitor sets and checks coverage + connectivity.
// Throws ValidationError naming the offending entity.
ScenarioInstance finalize_instance(Vec2 base_station, std::vector<Vec2> sensors,
                                   std::vector<Vec2> targets, EnergyParams params);

ScenarioInstance load_instance(const std::string& path);
ScenarioInstance parse_instance_json(const std::string& text);
std::string instance_to_json(const ScenarioInstance& inst);

// Deterministic synthetic scenario: BS at area center, uniform targets,
// uniform sensors followed by greedy repair (insert relays on straight lines
// toward the BS until coverage and connectivity hold).
ScenarioInstance generate_instance(std::uint64_t seed, double area_w, double area_h,
                                   int n_targets, int n_sensors,
                                   const EnergyParams& params);

RoutingTable build_routing(const ScenarioInstance& inst);

}  // namespace wrsn
