#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_helpers.hpp"
#include "wrsn/energy_sim.hpp"
#include "wrsn/rng.hpp"

using namespace wrsn;
using wrsn::test::Fixture;
using wrsn::test::make_instance;

namespace {
EnergyParams base_params() {
    EnergyParams p;
    p.finalize();
    return p;
}
}  // namespace

TEST_CASE("radio costs reproduce the worked values") {
    const EnergyParams p = base_params();
    CHECK(receive_cost(0, p) == 0.0);
    CHECK(receive_cost(1, p) == doctest::Approx(5.0e-8).epsilon(1e-12));
    CHECK(receive_cost(4000, p) == doctest::Approx(2.0e-4).epsilon(1e-12));
    CHECK(transmit_cost(1, 0, p) == doctest::Approx(5.0e-8).epsilon(1e-12));
    CHECK(transmit_cost(1, 10, p) == doctest::Approx(5.1e-8).epsilon(1e-12));
    CHECK(transmit_cost(1, 100, p) == doctest::Approx(1.8e-7).epsilon(1e-12));
}

TEST_CASE("charge rate has the cutoff at r_charge") {
    const EnergyParams p = base_params();
    CHECK(charge_rate(0, p) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(charge_rate(27, p) == doctest::Approx(4500.0 / 3249.0).epsilon(1e-12));
    CHECK(charge_rate(27.001, p) == 0.0);
}

TEST_CASE("no load leaves energies unchanged") {
    EnergyParams p;
    p.packet_period = 1e9;  // nothing ever transmits
    Fixture fx(make_instance({{10.0, 0.0}}, {{10.0, 0.0}}, p));
    const double e0 = fx.state.sensors[0].energy;
    for (int i = 0; i < 25; ++i) step(fx.state, 1.0);
    CHECK(fx.state.sensors[0].energy == e0);
}

TEST_CASE("charging at distance zero transfers exactly what the charger loses") {
    EnergyParams p;
    p.packet_period = 1e9;
    // sensor at the BS position so an idle charger already sits on top of it
    Fixture fx(make_instance({{0.0, 0.0}}, {{0.0, 0.0}}, p), 1);
    fx.state.sensors[0].energy = 5000.0;
    const MacroSchedule sched = plan_macro(fx.state, 0, {0.0, 0.0, 1.0});
    CHECK_FALSE(sched.via_bs);
    install_macro(fx.state, 0, sched);
    StepStats stats;
    const auto events = step(fx.state, 1.0, &stats);
    CHECK(fx.state.sensors[0].energy == doctest::Approx(5005.0).epsilon(1e-12));
    CHECK(fx.state.chargers[0].energy ==
          doctest::Approx(fx.inst.params.E_max - 5.0).epsilon(1e-12));
    CHECK(stats.charge_delivered == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(stats.charge_debited == stats.charge_delivered);
    bool finished = false;
    for (const auto& e : events)
        if (e.kind == EventKind::ChargingFinished) finished = true;
    CHECK(finished);
}

TEST_CASE("charging clips at e_max and the surplus stays with the charger") {
    EnergyParams p;
    p.packet_period = 1e9;
    Fixture fx(make_instance({{0.0, 0.0}}, {{0.0, 0.0}}, p), 1);
    fx.state.sensors[0].energy = p.e_max - 1.0;  // room for 1 J only
    install_macro(fx.state, 0, plan_macro(fx.state, 0, {0.0, 0.0, 1.0}));
    step(fx.state, 1.0);
    CHECK(fx.state.sensors[0].energy == doctest::Approx(p.e_max).epsilon(1e-12));
    CHECK(fx.state.chargers[0].energy == doctest::Approx(p.E_max - 1.0).epsilon(1e-12));
}

TEST_CASE("a sensor crossing e_th dies at step end and drops packets") {
    EnergyParams p = wrsn::test::unit_drain_params();
    // s0 covers t0 and also relays for s2 via s1; t1 is covered by s0 and s1
    // so s1's death is survivable and post-death traffic can be observed
    Fixture fx(make_instance({{10.0, 0.0}, {20.0, 0.0}, {95.0, 0.0}},
                             {{10.0, 0.0}, {20.0, 0.0}}, p));
    REQUIRE(fx.routing.next_hop[2] == 1);  // s2 -> s1 -> BS
    REQUIRE(fx.routing.next_hop[1] == RoutingTable::kToBase);
    fx.state.sensors[1].energy = p.e_th + 0.01;  // dies within the next step
    const auto events = step(fx.state, 1.0);
    CHECK_FALSE(fx.state.sensors[1].alive);
    bool died = false;
    for (const auto& e : events)
        if (e.kind == EventKind::SensorDied && e.entity == 1) died = true;
    CHECK(died);
    CHECK_FALSE(fx.state.dead);  // t1 still covered by s0

    // next step: s2 still transmits but its packet drops at the dead hop
    const double e1_before = fx.state.sensors[1].energy;
    const double e2_before = fx.state.sensors[2].energy;
    step(fx.state, 1.0);
    CHECK(fx.state.sensors[1].energy == e1_before);  // dead hop pays nothing
    CHECK(fx.state.sensors[2].energy <
          e2_before);  // the sender keeps paying the transmit cost
}

TEST_CASE("consumption rate follows the windowed average") {
    SimConfig cfg;
    SensorState s;
    s.id = 0;
    SUBCASE("steady 2 J/s for at least the window") {
        for (int t = 1; t <= 150; ++t) {
            s.window.emplace_back(t, 2.0);
            s.window_sum += 2.0;
        }
        while (!s.window.empty() && s.window.front().first <= 150.0 - cfg.window_s) {
            s.window_sum -= s.window.front().second;
            s.window.pop_front();
        }
        CHECK(consumption_rate(s, 150.0, cfg) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("no consumption gives the floor") {
        CHECK(consumption_rate(s, 0.0, cfg) == cfg.p_min);
        CHECK(consumption_rate(s, 500.0, cfg) == cfg.p_min);
    }
    SUBCASE("a 10 J burst 50 s ago averages to 0.1 J/s") {
        s.window.emplace_back(150.0 - 50.0, 10.0);
        s.window_sum = 10.0;
        CHECK(consumption_rate(s, 150.0, cfg) == doctest::Approx(0.1).epsilon(1e-12));
    }
}

TEST_CASE("connectivity refresh matches an independent BFS") {
    EnergyParams p;
    p.packet_period = 1e9;
    // t0 monitored by s2 which reaches the BS only through relay s1 -> s0
    Fixture fx(make_instance({{60.0, 0.0}, {120.0, 0.0}, {180.0, 0.0}},
                             {{180.0, 0.0}}, p));
    CHECK(fx.state.mnt == std::vector<std::uint8_t>{1});
    SUBCASE("killing the sole monitor disconnects the target") {
        fx.state.sensors[2].alive = false;
        refresh_connectivity(fx.state);
        CHECK(fx.state.mnt == std::vector<std::uint8_t>{0});
        CHECK(fx.state.dead);
    }
    SUBCASE("killing a pure relay on the only path disconnects the target") {
        fx.state.sensors[1].alive = false;
        refresh_connectivity(fx.state);
        CHECK(fx.state.mnt == std::vector<std::uint8_t>{0});
        CHECK(fx.state.dead);
    }
}

TEST_CASE("closed-form lifetime of a single constant-drain sensor") {
    const auto inst = wrsn::test::unit_drain_instance();
    const auto rt = build_routing(inst);
    const auto r = simulate_unattended(inst, rt, 1, 1.0, inst.params.t_sm);
    CHECK_FALSE(r.censored);
    CHECK(std::abs(r.F0 - 10260.0) <= 1.0 + 1e-9);
    // deterministic regardless of seed (no stochastic controller)
    const auto r2 = simulate_unattended(inst, rt, 999, 1.0, inst.params.t_sm);
    CHECK(r.F0 == r2.F0);
}

TEST_CASE("lifetime is right-censored at t_max") {
    EnergyParams p;
    p.packet_period = 1e9;
    const auto inst = make_instance({{10.0, 0.0}}, {{10.0, 0.0}}, p);
    const auto rt = build_routing(inst);
    const auto r = simulate_unattended(inst, rt, 1, 1.0, 100.0);
    CHECK(r.censored);
    CHECK(r.F0 == doctest::Approx(100.0));
}

TEST_CASE("macro planning prefixes a BS detour when energy is short") {
    EnergyParams p;
    p.packet_period = 1e9;
    Fixture fx(make_instance({{300.0, 0.0}}, {{300.0, 0.0}}, p), 1);
    fx.state.chargers[0].energy = 0.1 * p.E_max;  // 10800 J
    // full charge bound: 2052 s * 5 J/s = 10260 J, plus 300 J out + 300 J back
    const auto sched = plan_macro(fx.state, 0, {300.0, 0.0, 2052.0});
    CHECK(sched.via_bs);
    CHECK(sched.required_energy > 0.1 * p.E_max);
    // ample energy: no detour
    fx.state.chargers[0].energy = p.E_max;
    CHECK_FALSE(plan_macro(fx.state, 0, {300.0, 0.0, 2052.0}).via_bs);
}

TEST_CASE("c = 0 is pure relocation finishing on arrival") {
    EnergyParams p;
    p.packet_period = 1e9;
    Fixture fx(make_instance({{10.0, 0.0}}, {{10.0, 0.0}}, p), 1);
    install_macro(fx.state, 0, plan_macro(fx.state, 0, {10.0, 0.0, 0.0}));
    // 10 m at 5 m/s: arrival within the 2nd step
    auto ev1 = step(fx.state, 1.0);
    CHECK(ev1.empty());
    auto ev2 = step(fx.state, 1.0);
    REQUIRE(ev2.size() == 2);
    CHECK(ev2[0].kind == EventKind::ChargerArrived);
    CHECK(ev2[1].kind == EventKind::ChargingFinished);
    CHECK(fx.state.chargers[0].pos == Vec2{10.0, 0.0});
    CHECK(fx.state.chargers[0].energy ==
          doctest::Approx(p.E_max - 10.0 * p.P_M).epsilon(1e-12));
}

TEST_CASE("random runs keep the conservation and monotonicity invariants") {
    const auto inst = generate_instance(7, 400, 400, 4, 15, EnergyParams{});
    const auto rt = build_routing(inst);
    auto st = make_network_state(inst, rt, 2);
    Rng rng(123);
    int dead_count = 0;
    double prev_total = -1.0;
    for (int i = 0; i < 500 && !st.dead; ++i) {
        // random macro churn
        for (int k = 0; k < 2; ++k) {
            if (st.chargers[k].mode == ChargerMode::Idle) {
                MacroAction u{rng.uniform(inst.h0, inst.h1), rng.uniform(inst.w0, inst.w1),
                              rng.uniform(0.0, 30.0)};
                install_macro(st, k, plan_macro(st, k, u));
            }
        }
        StepStats stats;
        step(st, 1.0, &stats);
        CHECK(std::abs(stats.charge_delivered - stats.charge_debited) <= 1e-9);
        int now_dead = 0;
        for (const auto& s : st.sensors) {
            CHECK(s.energy >= 0.0);
            CHECK(s.energy <= inst.params.e_max + 1e-9);
            now_dead += s.alive ? 0 : 1;
        }
        CHECK(now_dead >= dead_count);
        dead_count = now_dead;
        (void)prev_total;
    }
}

TEST_CASE("without chargers total sensor energy never increases") {
    const auto inst = generate_instance(13, 400, 400, 3, 12, EnergyParams{});
    const auto rt = build_routing(inst);
    auto st = make_network_state(inst, rt, 0);
    double prev = 0.0;
    for (const auto& s : st.sensors) prev += s.energy;
    for (int i = 0; i < 300 && !st.dead; ++i) {
        step(st, 1.0);
        double total = 0.0;
        for (const auto& s : st.sensors) total += s.energy;
        CHECK(total <= prev + 1e-9);
        prev = total;
    }
}

TEST_CASE("event and lifetime json exports") {
    const LifetimeResult r{123.0, false, 42, 1.0};
    CHECK(lifetime_to_json(r).find("\"F0\":123.0") != std::string::npos);
    const SimEvent e{5.0, EventKind::SensorDied, 3, 42.0, 0.0};
    const auto j = event_to_json(e);
    CHECK(j.find("sensor-died") != std::string::npos);
    CHECK(j.find("\"entity_id\":3") != std::string::npos);
}
