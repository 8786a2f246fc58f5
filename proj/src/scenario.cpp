#include "wrsn/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "wrsn/rng.hpp"

namespace wrsn {

using nlohmann::json;

void EnergyParams::finalize() {
    const double derived_d0 = std::sqrt(eps_fs / eps_mp);
    if (d0 <= 0.0) {
        d0 = derived_d0;
    } else if (std::abs(d0 - derived_d0) > 1e-9 * derived_d0) {
        throw ValidationError("params: d0 must equal sqrt(eps_fs/eps_mp)");
    }
    const struct {
        const char* name;
        double v;
    } positive[] = {
        {"eps_elec", eps_elec}, {"eps_fs", eps_fs},     {"eps_mp", eps_mp},
        {"b_packet", b_packet}, {"packet_period", packet_period},
        {"r_c", r_c},           {"r_s", r_s},           {"e_th", e_th},
        {"e_max", e_max},       {"E_max", E_max},       {"r_charge", r_charge},
        {"alpha", alpha},       {"beta", beta},         {"P_M", P_M},
        {"V", V},               {"t_sm", t_sm},
    };
    for (const auto& p : positive) {
        if (!(p.v > 0.0) || !std::isfinite(p.v)) {
            throw ValidationError(std::string("params: ") + p.name +
                                  " must be strictly positive");
        }
    }
    if (!(e_th < e_max)) throw ValidationError("params: e_th must be < e_max");
}

namespace {

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

// x/y bounds of the sensor cloud; a near-degenerate axis is widened so the
// observation grid always has positive cell sizes
void compute_bounds(ScenarioInstance& inst) {
    double x0 = inst.sensors[0].x, x1 = x0, y0 = inst.sensors[0].y, y1 = y0;
    for (const auto& s : inst.sensors) {
        x0 = std::min(x0, s.x);
        x1 = std::max(x1, s.x);
        y0 = std::min(y0, s.y);
        y1 = std::max(y1, s.y);
    }
    const double min_extent = 2.0 * inst.params.r_charge;
    if (x1 - x0 < min_extent) {
        const double pad = 0.5 * (min_extent - (x1 - x0));
        x0 -= pad;
        x1 += pad;
    }
    if (y1 - y0 < min_extent) {
        const double pad = 0.5 * (min_extent - (y1 - y0));
        y0 -= pad;
        y1 += pad;
    }
    inst.h0 = x0;
    inst.h1 = x1;
    inst.w0 = y0;
    inst.w1 = y1;
}

void compute_d_avg(ScenarioInstance& inst) {
    const int n = inst.num_sensors();
    if (n < 2) {
        inst.d_avg = 1.0;
        return;
    }
    double sum = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = j + 1; k < n; ++k) sum += dist(inst.sensors[j], inst.sensors[k]);
    inst.d_avg = sum / (0.5 * n * (n - 1));
}

void compute_monitor_sets(ScenarioInstance& inst) {
    inst.monitors.assign(inst.num_targets(), {});
    inst.monitored_targets.assign(inst.num_sensors(), {});
    for (int i = 0; i < inst.num_targets(); ++i) {
        for (int j = 0; j < inst.num_sensors(); ++j) {
            if (dist(inst.targets[i], inst.sensors[j]) <= inst.params.r_s) {
                inst.monitors[i].push_back(j);
                inst.monitored_targets[j].push_back(i);
            }
        }
    }
}

// BFS reachability from the BS over {BS} + sensors with r_c edges
std::vector<char> bs_reachable(const Vec2& bs, const std::vector<Vec2>& sensors,
                               double r_c) {
    const int n = static_cast<int>(sensors.size());
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    for (int j = 0; j < n; ++j) {
        if (dist(bs, sensors[j]) <= r_c) {
            seen[j] = 1;
            q.push(j);
        }
    }
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v = 0; v < n; ++v) {
            if (!seen[v] && dist(sensors[u], sensors[v]) <= r_c) {
                seen[v] = 1;
                q.push(v);
            }
        }
    }
    return seen;
}

}  // namespace

ScenarioInstance finalize_instance(Vec2 base_station, std::vector<Vec2> sensors,
                                   std::vector<Vec2> targets, EnergyParams params) {
    params.finalize();
    ScenarioInstance inst;
    inst.base_station = base_station;
    inst.sensors = std::move(sensors);
    inst.targets = std::move(targets);
    inst.params = params;

    if (inst.sensors.empty()) throw ValidationError("instance has no sensors");
    if (!finite(inst.base_station)) throw ValidationError("base station position not finite");
    for (int j = 0; j < inst.num_sensors(); ++j)
        if (!finite(inst.sensors[j]))
            throw ValidationError("sensor " + std::to_string(j) + " position not finite");
    for (int i = 0; i < inst.num_targets(); ++i)
        if (!finite(inst.targets[i]))
            throw ValidationError("target " + std::to_string(i) + " position not finite");

    compute_bounds(inst);
    compute_d_avg(inst);
    compute_monitor_sets(inst);

    for (int i = 0; i < inst.num_targets(); ++i)
        if (inst.monitors[i].empty())
            throw ValidationError("target " + std::to_string(i) + " uncovered");

    const auto seen = bs_reachable(inst.base_station, inst.sensors, inst.params.r_c);
    for (int j = 0; j < inst.num_sensors(); ++j) {
        if (!inst.monitored_targets[j].empty() && !seen[j]) {
            throw ValidationError("sensor " + std::to_string(j) +
                                  " monitors a target but is disconnected from the BS");
        }
    }
    return inst;
}

namespace {

Vec2 parse_point(const json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ParseError(what + ": expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

EnergyParams parse_params(const json& j) {
    EnergyParams p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw ParseError("params: expected an object");
    const struct {
        const char* name;
        double* field;
    } fields[] = {
        {"eps_elec", &p.eps_elec}, {"eps_fs", &p.eps_fs},
        {"eps_mp", &p.eps_mp},     {"d0", &p.d0},
        {"b_packet", &p.b_packet}, {"packet_period", &p.packet_period},
        {"r_c", &p.r_c},           {"r_s", &p.r_s},
        {"e_th", &p.e_th},         {"e_max", &p.e_max},
        {"E_max", &p.E_max},       {"r_charge", &p.r_charge},
        {"alpha", &p.alpha},       {"beta", &p.beta},
        {"P_M", &p.P_M},           {"V", &p.V},
        {"t_sm", &p.t_sm},
    };
    for (const auto& item : j.items()) {
        bool known = false;
        for (const auto& f : fields) {
            if (item.key() == f.name) {
                if (!item.value().is_number())
                    throw ParseError("params." + item.key() + ": expected a number");
                *f.field = item.value().get<double>();
                known = true;
                break;
            }
        }
        if (!known) throw ParseError("params: unknown key '" + item.key() + "'");
    }
    return p;
}

}  // namespace

ScenarioInstance parse_instance_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("scenario: expected a JSON object");
    for (const auto& item : j.items()) {
        const std::string& k = item.key();
        if (k != "base_station" && k != "sensors" && k != "targets" && k != "params")
            throw ParseError("scenario: unknown key '" + k + "'");
    }
    if (!j.contains("base_station") || !j.contains("sensors") || !j.contains("targets"))
        throw ParseError("scenario: base_station, sensors and targets are required");

    const Vec2 bs = parse_point(j["base_station"], "base_station");
    std::vector<Vec2> sensors, targets;
    if (!j["sensors"].is_array()) throw ParseError("sensors: expected an array");
    if (!j["targets"].is_array()) throw ParseError("targets: expected an array");
    for (std::size_t i = 0; i < j["sensors"].size(); ++i)
        sensors.push_back(parse_point(j["sensors"][i], "sensor " + std::to_string(i)));
    for (std::size_t i = 0; i < j["targets"].size(); ++i)
        targets.push_back(parse_point(j["targets"][i], "target " + std::to_string(i)));

    EnergyParams p = parse_params(j.contains("params") ? j["params"] : json());
    return finalize_instance(bs, std::move(sensors), std::move(targets), p);
}

ScenarioInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance_json(ss.str());
}

std::string instance_to_json(const ScenarioInstance& inst) {
    json j;
    j["base_station"] = {inst.base_station.x, inst.base_station.y};
    json sensors = json::array();
    for (const auto& s : inst.sensors) sensors.push_back({s.x, s.y});
    json targets = json::array();
    for (const auto& t : inst.targets) targets.push_back({t.x, t.y});
    j["sensors"] = sensors;
    j["targets"] = targets;
    const EnergyParams& p = inst.params;
    j["params"] = {
        {"eps_elec", p.eps_elec}, {"eps_fs", p.eps_fs},   {"eps_mp", p.eps_mp},
        {"d0", p.d0},             {"b_packet", p.b_packet},
        {"packet_period", p.packet_period},
        {"r_c", p.r_c},           {"r_s", p.r_s},         {"e_th", p.e_th},
        {"e_max", p.e_max},       {"E_max", p.E_max},     {"r_charge", p.r_charge},
        {"alpha", p.alpha},       {"beta", p.beta},       {"P_M", p.P_M},
        {"V", p.V},               {"t_sm", p.t_sm},
    };
    return j.dump(2) + "\n";
}

ScenarioInstance generate_instance(std::uint64_t seed, double area_w, double area_h,
                                   int n_targets, int n_sensors,
                                   const EnergyParams& params_in) {
    if (n_targets < 1 || n_sensors < 1)
        throw ValidationError("generate: counts must be >= 1");
    if (!(area_w > 0.0) || !(area_h > 0.0))
        throw ValidationError("generate: area must be positive");
    EnergyParams params = params_in;
    params.finalize();

    Rng rng = Rng(seed).fork(0xa3c0);
    const Vec2 bs{0.5 * area_w, 0.5 * area_h};

    std::vector<Vec2> targets(n_targets);
    for (auto& t : targets) t = {rng.uniform(0.0, area_w), rng.uniform(0.0, area_h)};
    std::vector<Vec2> sensors(n_sensors);
    for (auto& s : sensors) s = {rng.uniform(0.0, area_w), rng.uniform(0.0, area_h)};

    // greedy repair: cover each target, then walk straight lines toward the
    // BS inserting relays until every monitor reaches the BS
    const int budget = 4 * (n_targets + n_sensors) + 64;
    int inserted = 0;
    auto insert_sensor = [&](Vec2 p) {
        sensors.push_back(p);
        ++inserted;
    };

    for (int i = 0; i < n_targets; ++i) {
        bool covered = false;
        for (const auto& s : sensors)
            if (dist(s, targets[i]) <= params.r_s) {
                covered = true;
                break;
            }
        if (!covered) {
            if (inserted >= budget)
                throw ValidationError("generate: repair budget exhausted after " +
                                      std::to_string(inserted) + " insertions (" +
                                      std::to_string(n_targets) + " targets, " +
                                      std::to_string(sensors.size()) + " sensors)");
            insert_sensor(targets[i]);
        }
    }

    const double hop = 0.9 * params.r_c;
    for (int pass = 0; pass < budget; ++pass) {
        const auto seen = bs_reachable(bs, sensors, params.r_c);
        int broken = -1;
        for (int j = 0; j < static_cast<int>(sensors.size()); ++j) {
            if (seen[j]) continue;
            bool monitor = false;
            for (const auto& t : targets)
                if (dist(sensors[j], t) <= params.r_s) {
                    monitor = true;
                    break;
                }
            if (monitor) {
                broken = j;
                break;
            }
        }
        if (broken < 0) break;
        if (inserted >= budget)
            throw ValidationError("generate: repair budget exhausted after " +
                                  std::to_string(inserted) + " insertions (" +
                                  std::to_string(n_targets) + " targets, " +
                                  std::to_string(sensors.size()) + " sensors)");
        // one relay per pass, stepping from the broken monitor toward the BS
        insert_sensor(advance_toward(sensors[broken], bs, hop));
    }

    return finalize_instance(bs, std::move(sensors), std::move(targets), params);
}

RoutingTable build_routing(const ScenarioInstance& inst) {
    const int n = inst.num_sensors();
    RoutingTable rt;
    rt.next_hop.assign(n, RoutingTable::kDeadEnd);
    rt.hop_load.assign(n, 0);
    for (int j = 0; j < n; ++j) {
        const double dj = inst.sensor_bs_dist(j);
        int best = RoutingTable::kDeadEnd;
        double best_d = dj;  // next hop must strictly decrease distance to BS
        if (dist(inst.sensors[j], inst.base_station) <= inst.params.r_c) {
            best = RoutingTable::kToBase;
            best_d = 0.0;
        }
        for (int k = 0; k < n; ++k) {
            if (k == j) continue;
            if (dist(inst.sensors[j], inst.sensors[k]) > inst.params.r_c) continue;
            const double dk = inst.sensor_bs_dist(k);
            if (dk < dj && dk < best_d) {
                best = k;
                best_d = dk;
            }
            // ties on distance-to-BS go to the lowest sensor index; the scan
            // order already guarantees that for sensor/sensor ties, and the BS
            // (distance 0) can never tie a strictly-closer sensor
        }
        rt.next_hop[j] = best;
    }
    // hop_load by walking each chain; chains are finite because every hop
    // strictly decreases the distance to the BS
    for (int j = 0; j < n; ++j) {
        int cur = rt.next_hop[j];
        int guard = 0;
        while (cur >= 0) {
            rt.hop_load[cur] += 1;
            cur = rt.next_hop[cur];
            if (++guard > n)
                throw InvariantViolation("routing produced a cycle at sensor " +
                                         std::to_string(j));
        }
    }
    return rt;
}

}  // namespace wrsn
