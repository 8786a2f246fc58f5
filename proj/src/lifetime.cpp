#include "wrsn/lifetime.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wrsn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LifetimeGraph build_lifetime_graph(const NetworkState& st) {
    const auto& inst = *st.inst;
    LifetimeGraph g;
    g.weight.push_back(kInf);
    g.sensor_of_node.push_back(-1);
    std::vector<int> node_of_sensor(inst.num_sensors(), -1);
    for (const auto& s : st.sensors) {
        if (!s.alive) continue;
        node_of_sensor[s.id] = g.size();
        g.weight.push_back(std::max(0.0, s.energy - inst.params.e_th) / s.p_rate);
        g.sensor_of_node.push_back(s.id);
    }
    g.adj.assign(g.size(), {});
    for (const auto& s : st.sensors) {
        if (!s.alive) continue;
        const int u = node_of_sensor[s.id];
        if (dist(s.pos, inst.base_station) <= inst.params.r_c) {
            g.adj[0].push_back(u);
            g.adj[u].push_back(0);
        }
        for (int k : st.neighbors[s.id]) {
            if (k > s.id && st.sensors[k].alive) {
                const int v = node_of_sensor[k];
                g.adj[u].push_back(v);
                g.adj[v].push_back(u);
            }
        }
    }
    return g;
}

std::vector<double> connection_times(const LifetimeGraph& g, CtTrace* trace) {
    const int n = g.size();
    std::vector<double> d(n, 0.0);
    if (n == 0) return d;
    d[0] = kInf;
    std::vector<char> in_frontier(n, 1);
    for (int it = 0; it < n; ++it) {
        int x = -1;
        for (int i = 0; i < n; ++i) {
            if (in_frontier[i] && (x < 0 || d[i] > d[x])) x = i;  // ties: lowest id
        }
        in_frontier[x] = 0;
        if (trace) trace->extraction_order.push_back(x);
        for (int y : g.adj[x]) {
            const double cand = std::min(d[x], g.weight[y]);
            if (cand > d[y]) {
                if (trace && !in_frontier[y]) trace->finalized_changed = true;
                d[y] = cand;
            }
        }
    }
    return d;
}

namespace {

void dfs_paths(const LifetimeGraph& g, int u, double bottleneck, std::vector<char>& visited,
               std::vector<double>& best) {
    for (int v : g.adj[u]) {
        if (visited[v]) continue;
        const double m = std::min(bottleneck, g.weight[v]);
        if (m > best[v]) best[v] = m;
        // descend even when m did not improve best[v]; a weaker prefix can
        // still open a stronger path to nodes beyond v
        visited[v] = 1;
        dfs_paths(g, v, m, visited, best);
        visited[v] = 0;
    }
}

}  // namespace

std::vector<double> brute_force_ct(const LifetimeGraph& g) {
    if (g.size() > 12)
        throw InvariantViolation("brute_force_ct: graph larger than 12 nodes");
    std::vector<double> best(g.size(), 0.0);
    if (g.size() == 0) return best;
    best[0] = kInf;
    std::vector<char> visited(g.size(), 0);
    visited[0] = 1;
    dfs_paths(g, 0, kInf, visited, best);
    return best;
}

double estimate_remaining_lifetime(const NetworkState& st) {
    if (st.dead) return 0.0;
    const auto& inst = *st.inst;
    const LifetimeGraph g = build_lifetime_graph(st);
    std::vector<double> ct_of_sensor(inst.num_sensors(), 0.0);
    const auto ct = connection_times(g);
    for (int node = 1; node < g.size(); ++node)
        ct_of_sensor[g.sensor_of_node[node]] = ct[node];
    double estimate = kInf;
    for (int i = 0; i < inst.num_targets(); ++i) {
        double best = 0.0;
        for (int j : inst.monitors[i]) best = std::max(best, ct_of_sensor[j]);
        estimate = std::min(estimate, best);
    }
    if (inst.num_targets() == 0) return 0.0;
    return estimate;
}

}  // namespace wrsn
