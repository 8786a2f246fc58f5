#include "wrsn/controllers.hpp"

#include <algorithm>

namespace wrsn {

Decision RandomController::decide(const Observation&, const NetworkState& st,
                                  const ObservationGrid& grid, int, Rng& rng) {
    Decision d;
    d.action.a = rng.uniform(grid.h0, grid.h1);
    d.action.b = rng.uniform(grid.w0, grid.w1);
    d.action.c = rng.uniform(0.0, charging_time(1.0, st.inst->params));
    return d;
}

Decision ScriptedController::decide(const Observation&, const NetworkState&,
                                    const ObservationGrid&, int agent, Rng&) {
    auto& q = scripts_.at(agent);
    if (q.empty()) throw InvariantViolation("scripted controller exhausted for agent " +
                                            std::to_string(agent));
    Decision d;
    d.action = q.front();
    q.pop_front();
    return d;
}

Decision MapPolicyController::decide(const Observation& obs, const NetworkState& st,
                                     const ObservationGrid& grid, int agent, Rng& rng) {
    nn::ActorNet<float>* net = actors_.size() == 1 ? actors_[0] : actors_.at(agent);
    const int n = obs.T * obs.T;
    std::vector<float> mean(n);
    float log_std = 0.0f;
    net->forward(obs.data.data(), obs.T, ws_, mean.data(), &log_std);

    Decision d;
    d.latent.resize(n);
    const float std = std::exp(log_std);
    for (int i = 0; i < n; ++i)
        d.latent[i] = mean[i] + std * static_cast<float>(rng.normal());
    d.log_prob = nn::gaussian_log_prob(mean.data(), log_std, d.latent.data(), n);

    std::vector<float> pr(n);
    nn::softmax(d.latent.data(), n, pr.data());
    d.action = select_action(pr, st, grid);
    return d;
}

Decision VectorPolicyController::decide(const Observation& obs, const NetworkState& st,
                                        const ObservationGrid& grid, int agent, Rng& rng) {
    nn::VectorActorNet<float>* net = actors_.size() == 1 ? actors_[0] : actors_.at(agent);
    float mean[3], log_std[3];
    net->forward(obs.data.data(), obs.T, ws_, mean, log_std);

    Decision d;
    d.latent.resize(3);
    d.log_prob = 0.0f;
    for (int i = 0; i < 3; ++i) {
        d.latent[i] = mean[i] + std::exp(log_std[i]) * static_cast<float>(rng.normal());
        d.log_prob += nn::gaussian_log_prob(&mean[i], log_std[i], &d.latent[i], 1);
    }
    d.action.a = std::clamp(static_cast<double>(d.latent[0]), grid.h0, grid.h1);
    d.action.b = std::clamp(static_cast<double>(d.latent[1]), grid.w0, grid.w1);
    d.action.c = std::clamp(static_cast<double>(d.latent[2]), 0.0,
                            charging_time(1.0, st.inst->params));
    return d;
}

LifetimeResult simulate_lifetime(const ScenarioInstance& inst, const RoutingTable& routing,
                                 Controller* controller, const EnvConfig& cfg,
                                 std::uint64_t seed, double t_max,
                                 std::vector<SimEvent>* log) {
    const double cap = t_max > 0.0 ? t_max : inst.params.t_sm;
    if (!controller || cfg.n_chargers == 0) {
        return simulate_unattended(inst, routing, seed, cfg.dt, cap, cfg.sim, log);
    }
    EnvConfig ec = cfg;
    ec.t_max = cap;
    MacroEnv env(inst, routing, ec);
    env.set_event_log(log);
    Rng rng = Rng(seed).fork(0xac7101);
    while (auto dp = env.next_decision()) {
        Decision d = controller->decide(*dp->obs, env.state(), env.grid(), dp->agent, rng);
        env.submit(dp->agent, d.action, std::move(d.latent), d.log_prob);
    }
    LifetimeResult r;
    r.F0 = env.lifetime();
    r.censored = env.censored();
    r.seed = seed;
    r.dt = cfg.dt;
    return r;
}

}  // namespace wrsn
