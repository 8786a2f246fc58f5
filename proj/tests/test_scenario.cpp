#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "wrsn/scenario.hpp"

using namespace wrsn;
using nlohmann::json;

namespace {

std::string minimal_scenario(double target_x) {
    json j;
    j["base_station"] = {0.0, 0.0};
    j["sensors"] = {{10.0, 0.0}};
    j["targets"] = {{target_x, 0.0}};
    j["params"] = {{"r_s", 40.0}};
    return j.dump();
}

}  // namespace

TEST_CASE("energy params defaults and derived d0") {
    EnergyParams p;
    p.finalize();
    CHECK(p.d0 == doctest::Approx(87.7058019).epsilon(1e-6));
    CHECK(p.e_th < p.e_max);
    EnergyParams bad;
    bad.e_th = bad.e_max = 100.0;
    CHECK_THROWS_AS(bad.finalize(), ValidationError);
    EnergyParams wrong_d0;
    wrong_d0.d0 = 50.0;
    CHECK_THROWS_AS(wrong_d0.finalize(), ValidationError);
}

TEST_CASE("minimal instance loads and validates") {
    const auto inst = parse_instance_json(minimal_scenario(30.0));
    CHECK(inst.num_sensors() == 1);
    CHECK(inst.monitors[0] == std::vector<int>{0});
    CHECK(inst.params.r_s == 40.0);
    // defaults filled for everything else
    CHECK(inst.params.e_max == 10800.0);
}

TEST_CASE("uncovered target is named") {
    try {
        parse_instance_json(minimal_scenario(100.0));
        FAIL("expected validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("target 0 uncovered") != std::string::npos);
    }
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(parse_instance_json(R"({"base_station":[0,0],"sensors":[[1,1]],
        "targets":[[1,1]],"bogus":1})"),
                    ParseError);
    CHECK_THROWS_AS(parse_instance_json(R"({"base_station":[0,0],"sensors":[[1,1]],
        "targets":[[1,1]],"params":{"nope":1}})"),
                    ParseError);
}

TEST_CASE("disconnected monitor is rejected") {
    json j;
    j["base_station"] = {0.0, 0.0};
    j["sensors"] = {{500.0, 0.0}};  // far outside r_c
    j["targets"] = {{500.0, 0.0}};
    CHECK_THROWS_AS(parse_instance_json(j.dump()), ValidationError);
}

TEST_CASE("d_avg equals the direct pairwise mean") {
    const auto inst = generate_instance(42, 1000, 1000, 5, 50, EnergyParams{});
    const int n = inst.num_sensors();
    double sum = 0.0;
    int pairs = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            sum += dist(inst.sensors[i], inst.sensors[j]);
            ++pairs;
        }
    CHECK(inst.d_avg == doctest::Approx(sum / pairs).epsilon(1e-9));
}

TEST_CASE("generate is deterministic and seed-sensitive") {
    const auto a = generate_instance(1, 1000, 1000, 5, 20, EnergyParams{});
    const auto b = generate_instance(1, 1000, 1000, 5, 20, EnergyParams{});
    CHECK(instance_to_json(a) == instance_to_json(b));
    const auto c = generate_instance(2, 1000, 1000, 5, 20, EnergyParams{});
    CHECK(instance_to_json(a) != instance_to_json(c));
    bool target_differs = false;
    for (int i = 0; i < 5; ++i)
        if (!(a.targets[i] == c.targets[i])) target_differs = true;
    CHECK(target_differs);
}

TEST_CASE("generated instances pass the load validator") {
    for (std::uint64_t seed : {3u, 7u, 11u, 1234u}) {
        const auto inst = generate_instance(seed, 800, 600, 6, 15, EnergyParams{});
        CHECK_NOTHROW(parse_instance_json(instance_to_json(inst)));
    }
}

TEST_CASE("generate reports infeasible setups") {
    EnergyParams tiny;
    tiny.r_s = 1.0;
    tiny.r_c = 2.0;  // cannot connect a 10 km area with the repair budget
    CHECK_THROWS_AS(generate_instance(1, 10000, 10000, 50, 1, tiny), ValidationError);
}

TEST_CASE("routing chain and tie rule") {
    EnergyParams p;
    p.r_c = 80.0;
    {
        json j;
        j["base_station"] = {0.0, 0.0};
        j["sensors"] = {{50.0, 0.0}, {100.0, 0.0}};
        j["targets"] = {{100.0, 0.0}};
        j["params"] = {{"r_c", 80.0}};
        const auto inst = parse_instance_json(j.dump());
        const auto rt = build_routing(inst);
        CHECK(rt.next_hop[1] == 0);
        CHECK(rt.next_hop[0] == RoutingTable::kToBase);
        CHECK(rt.hop_load[0] == 1);
    }
    {
        // s2 equidistant from s0 and s1, both strictly nearer the BS
        json j;
        j["base_station"] = {0.0, 0.0};
        j["sensors"] = {{30.0, 10.0}, {30.0, -10.0}, {60.0, 0.0}};
        j["targets"] = {{60.0, 0.0}};
        j["params"] = {{"r_c", 80.0}};
        const auto inst = parse_instance_json(j.dump());
        const auto rt = build_routing(inst);
        CHECK(rt.next_hop[2] == 0);  // lower index wins the tie
    }
}

TEST_CASE("routing dead ends are flagged, not fatal") {
    // an isolated non-monitor sensor has no neighbor nearer the BS
    json j;
    j["base_station"] = {0.0, 0.0};
    j["sensors"] = {{50.0, 0.0}, {5000.0, 5000.0}};
    j["targets"] = {{50.0, 0.0}};
    const auto inst = parse_instance_json(j.dump());
    const auto rt = build_routing(inst);
    CHECK(rt.next_hop[0] == RoutingTable::kToBase);
    CHECK(rt.next_hop[1] == RoutingTable::kDeadEnd);
}

TEST_CASE("hop loads match a path-walk recount and chains reach the BS") {
    const auto inst = generate_instance(99, 700, 700, 4, 20, EnergyParams{});
    const auto rt = build_routing(inst);
    const int n = inst.num_sensors();
    std::vector<int> recount(n, 0);
    for (int j = 0; j < n; ++j) {
        int cur = rt.next_hop[j];
        int steps = 0;
        while (cur >= 0) {
            recount[cur] += 1;
            cur = rt.next_hop[cur];
            REQUIRE(++steps <= n);
        }
    }
    CHECK(recount == rt.hop_load);
    // next hops strictly decrease the distance to the BS
    for (int j = 0; j < n; ++j) {
        if (rt.next_hop[j] < 0) continue;
        CHECK(inst.sensor_bs_dist(rt.next_hop[j]) < inst.sensor_bs_dist(j));
    }
}
