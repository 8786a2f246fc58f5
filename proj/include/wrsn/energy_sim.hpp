#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "wrsn/geometry.hpp"
#include "wrsn/macro_action.hpp"
#include "wrsn/scenario.hpp"

namespace wrsn {

// ---- energy model primitives (Eqs of the radio / charging model) ----

double receive_cost(double bits, const EnergyParams& p);
double transmit_cost(double bits, double d, const EnergyParams& p);
double charge_rate(double d, const EnergyParams& p);  // J/s received at distance d

// ---- simulation state ----

struct SimConfig {
    double p_min = 1e-6;     // J/s floor for the estimated consumption rate
    double window_s = 100.0; // averaging window for p
    double e_floor = 1.0;    // J floor for (e - e_th) denominators
};

struct SensorState {
    int id = 0;
    Vec2 pos;
    double energy = 0.0;
    bool alive = true;
    // (time, joules) records of the last window_s seconds of consumption
    std::deque<std::pair<double, double>> window;
    double window_sum = 0.0;
    double p_rate = 0.0;          // refreshed every step
    double consumed_this_step = 0.0;
};

enum class ChargerMode { Idle, Returning, Moving, Charging };

struct ChargerState {
    int id = 0;
    Vec2 pos;
    double energy = 0.0;
    ChargerMode mode = ChargerMode::Idle;
    Vec2 macro_dest;          // the (a, b) of the active macro action
    double charge_c = 0.0;    // planned charging duration of the active macro
    double t_charge = 0.0;    // remaining charging time while Charging
};

enum class EventKind {
    SensorDied,
    ChargerArrived,
    ChargingFinished,
    TargetDisconnected,
    NetworkDied,
};

struct SimEvent {
    double t = 0.0;
    EventKind kind{};
    int entity = 0;
    double x = 0.0;  // payload (position / energy, kind-dependent)
    double y = 0.0;
};

const char* event_kind_name(EventKind k);

struct StepStats {
    double traffic_drain = 0.0;
    double movement_cost = 0.0;
    double charge_delivered = 0.0;  // sum of sensor gains from charging
    double charge_debited = 0.0;    // sum of charger debits for charging
    // per-charger increment of the exclusive-reward integrand
    std::vector<double> exclusive;
};

struct NetworkState {
    const ScenarioInstance* inst = nullptr;
    const RoutingTable* routing = nullptr;
    SimConfig cfg;

    double clock = 0.0;
    std::int64_t step_count = 0;
    bool dead = false;
    std::vector<SensorState> sensors;
    std::vector<ChargerState> chargers;
    std::vector<std::uint8_t> mnt;  // per-target connectivity status
    double next_packet_time = 0.0;

    // static caches
    std::vector<std::vector<int>> neighbors;  // sensor adjacency at r_c
    std::vector<double> tx_cost_hop;          // per-packet transmit cost to next hop
    double rx_cost_packet = 0.0;

    std::vector<SimEvent>* log = nullptr;  // optional event sink

    int num_alive() const;
};

NetworkState make_network_state(const ScenarioInstance& inst, const RoutingTable& routing,
                                int n_chargers, const SimConfig& cfg = {});

// MNT_i = 1 iff some alive sensor within r_s of target i reaches the BS over
// alive sensors with r_c edges; also sets state.dead. Returns the new array.
std::vector<std::uint8_t> refresh_connectivity(NetworkState& state);

// windowed consumption-rate estimate for one sensor at time t
double consumption_rate(const SensorState& s, double t, const SimConfig& cfg);

// One fixed step: traffic -> charger movement -> charging -> deaths -> p/MNT
// bookkeeping. Returns the events raised during the step (also appended to
// state.log when set). Throws InvariantViolation on charger energy underflow.
std::vector<SimEvent> step(NetworkState& state, double dt, StepStats* stats = nullptr);

// ---- macro-action planning (deterministic low-level schedule) ----

struct MacroSchedule {
    bool via_bs = false;  // prefix with a return-to-BS + instant recharge leg
    Vec2 dest;
    double c = 0.0;
    double required_energy = 0.0;  // move + full-rate charge bound + return reserve
};

MacroSchedule plan_macro(const NetworkState& state, int charger, const MacroAction& u);
void install_macro(NetworkState& state, int charger, const MacroSchedule& sched);

// ---- lifetime runs ----

struct LifetimeResult {
    double F0 = 0.0;
    bool censored = false;
    std::uint64_t seed = 0;
    double dt = 1.0;
};

// chargers absent; yields F_B
LifetimeResult simulate_unattended(const ScenarioInstance& inst, const RoutingTable& routing,
                                   std::uint64_t seed, double dt, double t_max,
                                   const SimConfig& cfg = {},
                                   std::vector<SimEvent>* log = nullptr);

std::string lifetime_to_json(const LifetimeResult& r);
std::string event_to_json(const SimEvent& e);

}  // namespace wrsn
