#include "wrsn/energy_sim.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

#include <json.hpp>

namespace wrsn {

double receive_cost(double bits, const EnergyParams& p) { return bits * p.eps_elec; }

double transmit_cost(double bits, double d, const EnergyParams& p) {
    if (d < p.d0) return bits * p.eps_elec + bits * p.eps_fs * d * d;
    return bits * p.eps_elec + bits * p.eps_mp * d * d * d * d;
}

double charge_rate(double d, const EnergyParams& p) {
    if (d > p.r_charge) return 0.0;
    const double s = d + p.beta;
    return p.alpha / (s * s);
}

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::SensorDied: return "sensor-died";
        case EventKind::ChargerArrived: return "charger-arrived";
        case EventKind::ChargingFinished: return "charging-finished";
        case EventKind::TargetDisconnected: return "target-disconnected";
        case EventKind::NetworkDied: return "network-died";
    }
    return "?";
}

int NetworkState::num_alive() const {
    int n = 0;
    for (const auto& s : sensors) n += s.alive ? 1 : 0;
    return n;
}

NetworkState make_network_state(const ScenarioInstance& inst, const RoutingTable& routing,
                                int n_chargers, const SimConfig& cfg) {
    NetworkState st;
    st.inst = &inst;
    st.routing = &routing;
    st.cfg = cfg;
    const int n = inst.num_sensors();
    st.sensors.resize(n);
    for (int j = 0; j < n; ++j) {
        auto& s = st.sensors[j];
        s.id = j;
        s.pos = inst.sensors[j];
        s.energy = inst.params.e_max;
        s.p_rate = cfg.p_min;
    }
    st.chargers.resize(n_chargers);
    for (int k = 0; k < n_chargers; ++k) {
        auto& c = st.chargers[k];
        c.id = k;
        c.pos = inst.base_station;
        c.energy = inst.params.E_max;
    }
    st.next_packet_time = inst.params.packet_period;

    st.neighbors.assign(n, {});
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            if (k != j && dist(inst.sensors[j], inst.sensors[k]) <= inst.params.r_c)
                st.neighbors[j].push_back(k);
    st.tx_cost_hop.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const int hop = routing.next_hop[j];
        if (hop == RoutingTable::kDeadEnd) continue;
        const double d = hop == RoutingTable::kToBase
                             ? dist(inst.sensors[j], inst.base_station)
                             : dist(inst.sensors[j], inst.sensors[hop]);
        st.tx_cost_hop[j] = transmit_cost(inst.params.b_packet, d, inst.params);
    }
    st.rx_cost_packet = receive_cost(inst.params.b_packet, inst.params);

    // Seed p with the structural all-alive consumption rate (origination +
    // relay load under the static routing). The windowed estimate converges
    // to the same value after one step; seeding avoids a cold-start estimate
    // of p_min that would inflate lifetime estimates at t=0.
    for (int j = 0; j < n; ++j) {
        const bool forwards = routing.next_hop[j] != RoutingTable::kDeadEnd;
        const double per_period =
            (forwards ? st.tx_cost_hop[j] : 0.0) + routing.hop_load[j] * st.rx_cost_packet +
            (forwards ? routing.hop_load[j] * st.tx_cost_hop[j] : 0.0);
        st.sensors[j].p_rate = std::max(per_period / inst.params.packet_period, cfg.p_min);
    }

    refresh_connectivity(st);
    return st;
}

std::vector<std::uint8_t> refresh_connectivity(NetworkState& state) {
    const ScenarioInstance& inst = *state.inst;
    const int n = inst.num_sensors();
    std::vector<char> seen(n, 0);
    std::queue<int> q;
    for (int j = 0; j < n; ++j) {
        if (state.sensors[j].alive &&
            dist(inst.sensors[j], inst.base_station) <= inst.params.r_c) {
            seen[j] = 1;
            q.push(j);
        }
    }
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (int v : state.neighbors[u])
            if (!seen[v] && state.sensors[v].alive) {
                seen[v] = 1;
                q.push(v);
            }
    }
    std::vector<std::uint8_t> mnt(inst.num_targets(), 0);
    for (int i = 0; i < inst.num_targets(); ++i)
        for (int j : inst.monitors[i])
            if (state.sensors[j].alive && seen[j]) {
                mnt[i] = 1;
                break;
            }
    state.mnt = mnt;
    state.dead = false;
    for (auto v : mnt)
        if (!v) state.dead = true;
    if (inst.num_targets() == 0) state.dead = false;
    return mnt;
}

double consumption_rate(const SensorState& s, double t, const SimConfig& cfg) {
    const double span = std::min(t, cfg.window_s);
    if (span <= 0.0 || s.window_sum <= 0.0) return cfg.p_min;
    return std::max(s.window_sum / span, cfg.p_min);
}

namespace {

void drain(SensorState& s, double amount, double* sink) {
    const double actual = std::min(amount, s.energy);
    s.energy -= actual;
    s.consumed_this_step += actual;
    if (sink) *sink += actual;
}

void deliver_packets(NetworkState& st, double t_end, double* traffic_drain) {
    const auto& inst = *st.inst;
    const auto& rt = *st.routing;
    const int n = inst.num_sensors();
    while (st.next_packet_time <= t_end + 1e-9) {
        for (int j = 0; j < n; ++j) {
            SensorState& origin = st.sensors[j];
            if (!origin.alive) continue;
            if (rt.next_hop[j] == RoutingTable::kDeadEnd) continue;  // transmits nothing
            int cur = j;
            while (true) {
                drain(st.sensors[cur], st.tx_cost_hop[cur], traffic_drain);
                const int hop = rt.next_hop[cur];
                if (hop == RoutingTable::kToBase) break;  // delivered
                if (!st.sensors[hop].alive) break;        // dropped at dead hop
                drain(st.sensors[hop], st.rx_cost_packet, traffic_drain);
                if (rt.next_hop[hop] == RoutingTable::kDeadEnd) break;  // stranded
                cur = hop;
            }
        }
        st.next_packet_time += inst.params.packet_period;
    }
}

}  // namespace

std::vector<SimEvent> step(NetworkState& st, double dt, StepStats* stats) {
    if (!(dt > 0.0)) throw InvariantViolation("step: dt must be > 0");
    if (st.dead) throw InvariantViolation("step: network is dead");
    const auto& inst = *st.inst;
    const EnergyParams& P = inst.params;
    const double t_end = st.clock + dt;

    std::vector<SimEvent> events;
    StepStats local;
    StepStats& S = stats ? *stats : local;
    S.traffic_drain = S.movement_cost = S.charge_delivered = S.charge_debited = 0.0;
    S.exclusive.assign(st.chargers.size(), 0.0);

    // (1) data traffic
    deliver_packets(st, t_end, &S.traffic_drain);

    // (2) charger movement
    for (auto& mc : st.chargers) {
        if (mc.mode != ChargerMode::Returning && mc.mode != ChargerMode::Moving) continue;
        double budget = P.V * dt;
        while (budget > 0.0) {
            const Vec2 target =
                mc.mode == ChargerMode::Returning ? inst.base_station : mc.macro_dest;
            double moved = 0.0;
            mc.pos = advance_toward(mc.pos, target, budget, &moved);
            budget -= moved;
            const double cost = P.P_M * moved;
            mc.energy -= cost;
            S.movement_cost += cost;
            if (mc.energy < -1e-9) {
                throw InvariantViolation(
                    "charger " + std::to_string(mc.id) + " energy underflow while moving (E=" +
                    std::to_string(mc.energy) + " J at t=" + std::to_string(t_end) + ")");
            }
            if (!(mc.pos == target)) break;  // budget exhausted mid-leg
            if (mc.mode == ChargerMode::Returning) {
                mc.energy = P.E_max;  // battery replacement, no waiting time
                mc.mode = ChargerMode::Moving;
                continue;
            }
            // arrived at the macro destination
            events.push_back({t_end, EventKind::ChargerArrived, mc.id, mc.pos.x, mc.pos.y});
            if (mc.charge_c > 0.0) {
                mc.mode = ChargerMode::Charging;
                mc.t_charge = mc.charge_c;
            } else {
                mc.mode = ChargerMode::Idle;
                events.push_back({t_end, EventKind::ChargingFinished, mc.id, 0.0, 0.0});
            }
            break;
        }
    }

    // (3) wireless charging
    for (auto& mc : st.chargers) {
        if (mc.mode != ChargerMode::Charging) continue;
        const double dt_eff = std::min(dt, mc.t_charge);
        double debit = 0.0;
        for (auto& s : st.sensors) {
            if (!s.alive) continue;
            const double d = dist(s.pos, mc.pos);
            const double rate = charge_rate(d, P);
            if (rate <= 0.0) continue;
            const double gain = std::min(rate * dt_eff, P.e_max - s.energy);
            const double denom = std::max(s.energy - P.e_th, st.cfg.e_floor);
            S.exclusive[mc.id] += rate * dt_eff * s.p_rate / denom;
            s.energy += gain;
            debit += gain;
        }
        mc.energy -= debit;
        S.charge_delivered += debit;
        S.charge_debited += debit;
        if (mc.energy < -1e-9) {
            throw InvariantViolation(
                "charger " + std::to_string(mc.id) + " energy underflow while charging (E=" +
                std::to_string(mc.energy) + " J, debit=" + std::to_string(debit) + " J)");
        }
        if (mc.energy < 0.0) mc.energy = 0.0;
        mc.t_charge -= dt_eff;
        if (mc.t_charge <= 1e-12) {
            mc.t_charge = 0.0;
            mc.mode = ChargerMode::Idle;
            events.push_back({t_end, EventKind::ChargingFinished, mc.id, 0.0, 0.0});
        }
    }

    // (4) deaths at step end
    for (auto& s : st.sensors) {
        if (s.alive && s.energy < P.e_th) {
            s.alive = false;
            events.push_back({t_end, EventKind::SensorDied, s.id, s.energy, 0.0});
        }
    }

    // (5) bookkeeping: p windows, MNT, clock
    for (auto& s : st.sensors) {
        if (s.consumed_this_step > 0.0) {
            s.window.emplace_back(t_end, s.consumed_this_step);
            s.window_sum += s.consumed_this_step;
            s.consumed_this_step = 0.0;
        }
        const double cutoff = t_end - st.cfg.window_s;
        while (!s.window.empty() && s.window.front().first <= cutoff + 1e-9) {
            s.window_sum -= s.window.front().second;
            s.window.pop_front();
        }
        if (s.window.empty()) s.window_sum = 0.0;
        s.p_rate = consumption_rate(s, t_end, st.cfg);
    }
    const auto old_mnt = st.mnt;
    refresh_connectivity(st);
    for (std::size_t i = 0; i < st.mnt.size(); ++i) {
        if (old_mnt[i] && !st.mnt[i])
            events.push_back({t_end, EventKind::TargetDisconnected, static_cast<int>(i), 0, 0});
    }
    if (st.dead) events.push_back({t_end, EventKind::NetworkDied, 0, 0.0, 0.0});

    st.clock = t_end;
    st.step_count += 1;

    if (st.log)
        for (const auto& e : events) st.log->push_back(e);
    return events;
}

MacroSchedule plan_macro(const NetworkState& st, int charger, const MacroAction& u) {
    const auto& inst = *st.inst;
    const EnergyParams& P = inst.params;
    const ChargerState& mc = st.chargers.at(charger);
    MacroSchedule sched;
    sched.dest = {u.a, u.b};
    sched.c = std::max(0.0, u.c);

    // full-rate bound on the charging debit at the destination
    double rate_sum = 0.0;
    for (const auto& s : st.sensors) {
        if (!s.alive) continue;
        rate_sum += charge_rate(dist(s.pos, sched.dest), P);
    }
    const double move_cost = P.P_M * dist(mc.pos, sched.dest);
    const double return_reserve = P.P_M * dist(sched.dest, inst.base_station);
    sched.required_energy = move_cost + sched.c * rate_sum + return_reserve;
    sched.via_bs = mc.energy < sched.required_energy;
    return sched;
}

void install_macro(NetworkState& st, int charger, const MacroSchedule& sched) {
    ChargerState& mc = st.chargers.at(charger);
    mc.macro_dest = sched.dest;
    mc.charge_c = sched.c;
    mc.t_charge = 0.0;
    mc.mode = sched.via_bs ? ChargerMode::Returning : ChargerMode::Moving;
}

LifetimeResult simulate_unattended(const ScenarioInstance& inst, const RoutingTable& routing,
                                   std::uint64_t seed, double dt, double t_max,
                                   const SimConfig& cfg, std::vector<SimEvent>* log) {
    NetworkState st = make_network_state(inst, routing, 0, cfg);
    st.log = log;
    LifetimeResult r;
    r.seed = seed;
    r.dt = dt;
    while (!st.dead && st.clock < t_max - 1e-9) {
        step(st, dt);
    }
    r.F0 = st.clock;
    r.censored = !st.dead;
    return r;
}

std::string lifetime_to_json(const LifetimeResult& r) {
    nlohmann::json j{{"F0", r.F0}, {"censored", r.censored}, {"seed", r.seed}, {"dt", r.dt}};
    return j.dump();
}

std::string event_to_json(const SimEvent& e) {
    nlohmann::json payload = nlohmann::json::object();
    switch (e.kind) {
        case EventKind::SensorDied: payload["energy"] = e.x; break;
        case EventKind::ChargerArrived: payload["pos"] = {e.x, e.y}; break;
        default: break;
    }
    nlohmann::json j{{"t", e.t},
                     {"kind", event_kind_name(e.kind)},
                     {"entity_id", e.entity},
                     {"payload", payload}};
    return j.dump();
}

}  // namespace wrsn
