#pragma once

#include <vector>

#include "wrsn/energy_sim.hpp"

namespace wrsn {

// Node 0 is the base station (weight +inf); the rest are alive sensors.
struct LifetimeGraph {
    std::vector<double> weight;            // per node, seconds
    std::vector<std::vector<int>> adj;     // undirected adjacency
    std::vector<int> sensor_of_node;       // node -> sensor id (-1 for the BS)

    int size() const { return static_cast<int>(weight.size()); }
};

LifetimeGraph build_lifetime_graph(const NetworkState& state);

struct CtTrace {
    std::vector<int> extraction_order;
    bool finalized_changed = false;  // a relaxation altered d[] of a finalized node
};

// CT(x0, x) for every node: the max over x0->x paths of the min node weight
// on the path, via the max-selection relaxation loop. Unreachable nodes keep
// their initial value 0. Ties on the frontier maximum go to the lowest id.
std::vector<double> connection_times(const LifetimeGraph& g, CtTrace* trace = nullptr);

// exhaustive simple-path enumeration; oracle for graphs of <= 12 nodes
std::vector<double> brute_force_ct(const LifetimeGraph& g);

// min over targets of the best monitor connection time; 0 on a dead network
double estimate_remaining_lifetime(const NetworkState& state);

}  // namespace wrsn
