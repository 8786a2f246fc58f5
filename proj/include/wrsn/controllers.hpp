#pragma once

#include <deque>
#include <memory>
#include <vector>

#include "wrsn/action_select.hpp"
#include "wrsn/macro_env.hpp"
#include "wrsn/nn/nets.hpp"
#include "wrsn/rng.hpp"

namespace wrsn {

struct Decision {
    MacroAction action;
    std::vector<float> latent;  // sampled x (map or 3-vector); empty if non-learned
    float log_prob = 0.0f;
};

class Controller {
public:
    virtual ~Controller() = default;
    virtual Decision decide(const Observation& obs, const NetworkState& st,
                            const ObservationGrid& grid, int agent, Rng& rng) = 0;
};

// uniform macro actions over the grid bounds; c uniform in [0, c_full]
class RandomController : public Controller {
public:
    Decision decide(const Observation&, const NetworkState& st, const ObservationGrid& grid,
                    int, Rng& rng) override;
};

// fixed per-agent action sequences (test and diagnostic use)
class ScriptedController : public Controller {
public:
    explicit ScriptedController(std::vector<std::deque<MacroAction>> scripts)
        : scripts_(std::move(scripts)) {}
    Decision decide(const Observation&, const NetworkState&, const ObservationGrid&,
                    int agent, Rng&) override;

private:
    std::vector<std::deque<MacroAction>> scripts_;
};

// U-Net actor: sample a Gaussian map, softmax it, then argmax cell ->
// charging time -> region -> location optimization
class MapPolicyController : public Controller {
public:
    explicit MapPolicyController(std::vector<nn::ActorNet<float>*> actors)
        : actors_(std::move(actors)) {}
    Decision decide(const Observation& obs, const NetworkState& st,
                    const ObservationGrid& grid, int agent, Rng& rng) override;

private:
    std::vector<nn::ActorNet<float>*> actors_;  // one per agent, or a single shared one
    nn::ActorNet<float>::Ws ws_;
};

// direct 3-vector actor; (a, b) clamped into the grid bounds, c into [0, c_full]
class VectorPolicyController : public Controller {
public:
    explicit VectorPolicyController(std::vector<nn::VectorActorNet<float>*> actors)
        : actors_(std::move(actors)) {}
    Decision decide(const Observation& obs, const NetworkState& st,
                    const ObservationGrid& grid, int agent, Rng& rng) override;

private:
    std::vector<nn::VectorActorNet<float>*> actors_;
    nn::VectorActorNet<float>::Ws ws_;
};

// Runs simulation until network death (or t_max, right-censored). With a null
// controller the run is chargerless and yields F_B.
LifetimeResult simulate_lifetime(const ScenarioInstance& inst, const RoutingTable& routing,
                                 Controller* controller, const EnvConfig& cfg,
                                 std::uint64_t seed, double t_max = 0.0,
                                 std::vector<SimEvent>* log = nullptr);

}  // namespace wrsn
