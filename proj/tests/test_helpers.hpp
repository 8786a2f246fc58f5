#pragma once

#include <json.hpp>

#include "wrsn/energy_sim.hpp"
#include "wrsn/scenario.hpp"

namespace wrsn::test {

// scenario builder for hand-placed fixtures
inline ScenarioInstance make_instance(std::vector<Vec2> sensors, std::vector<Vec2> targets,
                                      EnergyParams params = {}, Vec2 bs = {0.0, 0.0}) {
    return finalize_instance(bs, std::move(sensors), std::move(targets), params);
}

// single sensor next to the BS covering a single target; drain is one packet
// per second whose transmit cost is ~1 J, so the sensor loses ~1 J/s
inline EnergyParams unit_drain_params() {
    EnergyParams p;
    p.b_packet = 1.0 / (p.eps_elec + p.eps_fs * 100.0);  // transmit over 10 m costs 1 J
    return p;
}

inline ScenarioInstance unit_drain_instance() {
    return make_instance({{10.0, 0.0}}, {{10.0, 0.0}}, unit_drain_params());
}

struct Fixture {
    ScenarioInstance inst;
    RoutingTable routing;
    NetworkState state;

    Fixture(ScenarioInstance i, int chargers = 0, SimConfig cfg = {})
        : inst(std::move(i)), routing(build_routing(inst)),
          state(make_network_state(inst, routing, chargers, cfg)) {}
};

}  // namespace wrsn::test
