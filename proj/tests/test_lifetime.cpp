#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <limits>

#include "test_helpers.hpp"
#include "wrsn/lifetime.hpp"
#include "wrsn/rng.hpp"

using namespace wrsn;
using wrsn::test::make_instance;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LifetimeGraph graph_of(std::vector<double> weights, std::vector<std::pair<int, int>> edges) {
    LifetimeGraph g;
    g.weight = std::move(weights);
    g.weight[0] = kInf;
    g.adj.assign(g.weight.size(), {});
    g.sensor_of_node.assign(g.weight.size(), -1);
    for (auto [a, b] : edges) {
        g.adj[a].push_back(b);
        g.adj[b].push_back(a);
    }
    return g;
}

LifetimeGraph random_graph(Rng& rng, int max_nodes = 12) {
    const int n = 2 + static_cast<int>(rng.uniform_int(max_nodes - 1));
    std::vector<double> w(n);
    for (auto& x : w) x = rng.uniform(0.0, 100.0);
    const double p = rng.uniform(0.15, 0.5);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < p) edges.emplace_back(i, j);
    return graph_of(std::move(w), std::move(edges));
}

}  // namespace

TEST_CASE("chain and diamond connection times") {
    {
        const auto g = graph_of({0.0, 10.0, 4.0}, {{0, 1}, {1, 2}});
        const auto ct = connection_times(g);
        CHECK(ct[0] == kInf);
        CHECK(ct[1] == 10.0);
        CHECK(ct[2] == 4.0);
        CHECK(brute_force_ct(g) == ct);
    }
    {
        // x0-a(3)-c(9) and x0-b(7)-c(9): the bottleneck path through b wins
        const auto g = graph_of({0.0, 3.0, 7.0, 9.0}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
        const auto ct = connection_times(g);
        CHECK(ct[3] == 7.0);
        CHECK(brute_force_ct(g) == ct);
    }
}

TEST_CASE("unreachable nodes keep the initialization value 0") {
    const auto g = graph_of({0.0, 5.0, 8.0}, {{0, 1}});
    const auto ct = connection_times(g);
    CHECK(ct[2] == 0.0);
    const auto bf = brute_force_ct(g);
    CHECK(bf[2] == 0.0);
    CHECK(bf[0] == kInf);
}

TEST_CASE("single source node") {
    const auto g = graph_of({0.0}, {});
    CHECK(connection_times(g)[0] == kInf);
    CHECK(brute_force_ct(g)[0] == kInf);
}

TEST_CASE("oracle equivalence on random graphs") {
    Rng rng(2026);
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = random_graph(rng);
        CHECK(connection_times(g) == brute_force_ct(g));
    }
}

TEST_CASE("self-bottleneck bound and weight monotonicity") {
    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        auto g = random_graph(rng);
        const auto ct = connection_times(g);
        for (int i = 1; i < g.size(); ++i) CHECK(ct[i] <= g.weight[i]);
        // raising one weight never lowers any connection time
        const int pick = 1 + static_cast<int>(rng.uniform_int(g.size() - 1));
        auto g2 = g;
        g2.weight[pick] += rng.uniform(0.1, 50.0);
        const auto ct2 = connection_times(g2);
        for (int i = 0; i < g.size(); ++i) CHECK(ct2[i] >= ct[i]);
    }
}

TEST_CASE("finalized d values never change (instrumented)") {
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto g = random_graph(rng);
        CtTrace trace;
        connection_times(g, &trace);
        CHECK_FALSE(trace.finalized_changed);
        CHECK(trace.extraction_order.size() == static_cast<std::size_t>(g.size()));
        CHECK(trace.extraction_order[0] == 0);  // the source has d = inf
    }
}

TEST_CASE("remaining lifetime is the min-max over target monitors") {
    EnergyParams p;
    p.packet_period = 1e9;
    SUBCASE("one target, monitors with CT 100 and 40") {
        // both sensors adjacent to the BS; CT equals the own weight
        auto inst = make_instance({{30.0, 0.0}, {-30.0, 0.0}}, {{0.0, 0.0}}, p);
        auto rt = build_routing(inst);
        auto st = make_network_state(inst, rt, 0);
        st.sensors[0].energy = p.e_th + 100.0;
        st.sensors[0].p_rate = 1.0;
        st.sensors[1].energy = p.e_th + 40.0;
        st.sensors[1].p_rate = 1.0;
        CHECK(estimate_remaining_lifetime(st) == doctest::Approx(100.0).epsilon(1e-12));
    }
    SUBCASE("two targets take the minimum of their best monitors") {
        // 60 m between sensors so each target is covered by one sensor only
        auto inst = make_instance({{30.0, 0.0}, {-30.0, 0.0}},
                                  {{30.0, 0.0}, {-30.0, 0.0}}, p);
        auto rt = build_routing(inst);
        auto st = make_network_state(inst, rt, 0);
        st.sensors[0].energy = p.e_th + 100.0;
        st.sensors[0].p_rate = 1.0;
        st.sensors[1].energy = p.e_th + 30.0;
        st.sensors[1].p_rate = 1.0;
        CHECK(estimate_remaining_lifetime(st) == doctest::Approx(30.0).epsilon(1e-12));
    }
    SUBCASE("a dead network estimates 0") {
        auto inst = make_instance({{10.0, 0.0}}, {{10.0, 0.0}}, p);
        auto rt = build_routing(inst);
        auto st = make_network_state(inst, rt, 0);
        st.sensors[0].alive = false;
        refresh_connectivity(st);
        CHECK(estimate_remaining_lifetime(st) == 0.0);
    }
}

TEST_CASE("estimate equals the brute-force min-max on random instances") {
    Rng rng(5);
    for (std::uint64_t seed : {21u, 22u, 23u}) {
        const auto inst = generate_instance(seed, 300, 300, 3, 7, EnergyParams{});
        if (inst.num_sensors() > 11) continue;  // keep the oracle tractable
        const auto rt = build_routing(inst);
        auto st = make_network_state(inst, rt, 0);
        for (auto& s : st.sensors) {
            s.energy = inst.params.e_th + rng.uniform(1.0, 5000.0);
            s.p_rate = rng.uniform(0.5, 3.0);
            if (rng.uniform() < 0.2) s.alive = false;
        }
        refresh_connectivity(st);
        if (st.dead) continue;
        const auto g = build_lifetime_graph(st);
        const auto bf = brute_force_ct(g);
        std::vector<double> ct_sensor(inst.num_sensors(), 0.0);
        for (int node = 1; node < g.size(); ++node)
            ct_sensor[g.sensor_of_node[node]] = bf[node];
        double expect = kInf;
        for (int i = 0; i < inst.num_targets(); ++i) {
            double best = 0.0;
            for (int j : inst.monitors[i]) best = std::max(best, ct_sensor[j]);
            expect = std::min(expect, best);
        }
        CHECK(estimate_remaining_lifetime(st) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("estimate drift is bounded by elapsed time under steady drain") {
    const auto inst = generate_instance(31, 300, 300, 3, 10, EnergyParams{});
    const auto rt = build_routing(inst);
    auto st = make_network_state(inst, rt, 0);
    const double dt = 1.0;
    // warm up the p windows to steady state
    for (int i = 0; i < 150 && !st.dead; ++i) step(st, dt);
    REQUIRE_FALSE(st.dead);
    const double f0 = estimate_remaining_lifetime(st);
    double max_drain = 0.0;
    for (const auto& s : st.sensors) max_drain = std::max(max_drain, s.p_rate);
    const double delta = 200.0;
    for (int i = 0; i < 200 && !st.dead; ++i) step(st, dt);
    REQUIRE_FALSE(st.dead);
    const double f1 = estimate_remaining_lifetime(st);
    CHECK(f1 >= f0 - delta - 2.0 * dt * max_drain - 1e-6);
}

TEST_CASE("brute force refuses oversized graphs") {
    std::vector<double> w(13, 1.0);
    LifetimeGraph g;
    g.weight = w;
    g.adj.assign(13, {});
    g.sensor_of_node.assign(13, -1);
    CHECK_THROWS_AS(brute_force_ct(g), InvariantViolation);
}
