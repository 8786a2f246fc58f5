#include "wrsn/macro_env.hpp"

#include <algorithm>

namespace wrsn {

double reward_general(double t1, double t2, double fhat1, double fhat2,
                      const RewardConfig& cfg) {
    // The printed form rewards a falling lifetime estimate; the corrected
    // form is its negation: zero for doing nothing, positive when charging
    // extends the estimated death time.
    const double corrected = (fhat2 - fhat1) + (t2 - t1);
    return (cfg.sign_as_printed ? -corrected : corrected) / cfg.r_scale;
}

double total_reward(double general, double exclusive, RewardMode mode) {
    switch (mode) {
        case RewardMode::Full: return general + exclusive;
        case RewardMode::NoEx: return general;
        case RewardMode::NoGe: return exclusive;
    }
    return 0.0;
}

MacroEnv::MacroEnv(const ScenarioInstance& inst, const RoutingTable& routing, EnvConfig cfg)
    : inst_(inst), routing_(routing), cfg_(cfg),
      grid_(ObservationGrid::from_instance(inst, cfg.obs.T)) {
    if (cfg_.t_max <= 0.0) cfg_.t_max = inst.params.t_sm;
    reset();
}

void MacroEnv::reset() {
    state_ = make_network_state(inst_, routing_, cfg_.n_chargers, cfg_.sim);
    open_.assign(cfg_.n_chargers, {});
    last_obs_.assign(cfg_.n_chargers, nullptr);
    pending_.clear();
    for (int k = 0; k < cfg_.n_chargers; ++k) pending_.push_back(k);
    terminal_frames_.clear();
    over_ = false;
    censored_ = false;
    fhat_cache_t_ = -1.0;
}

double MacroEnv::fhat_now() {
    if (fhat_cache_t_ != state_.clock) {
        fhat_cache_v_ = estimate_remaining_lifetime(state_);
        fhat_cache_t_ = state_.clock;
    }
    return fhat_cache_v_;
}

std::shared_ptr<const Observation> MacroEnv::render_now(int agent) {
    return std::make_shared<Observation>(render(state_, agent, grid_, cfg_.obs));
}

TransitionFrame MacroEnv::close_frame(int agent, double f_end,
                                      std::shared_ptr<const Observation> o_end,
                                      bool terminal) {
    OpenMacro& om = open_[agent];
    TransitionFrame fr;
    fr.agent = agent;
    fr.t_start = om.t_start;
    fr.t_end = state_.clock;
    fr.o_start = om.o_start;
    fr.o_end = std::move(o_end);
    fr.action = om.action;
    fr.latent = std::move(om.latent);
    fr.log_prob_old = om.log_prob;
    fr.reward_general = reward_general(om.t_start, state_.clock, om.f_start, f_end,
                                       cfg_.reward);
    fr.reward_exclusive = om.excl_accum / cfg_.reward.r_scale_ex;
    fr.reward = total_reward(fr.reward_general, fr.reward_exclusive, cfg_.reward.mode);
    fr.terminal = terminal;
    om = {};
    return fr;
}

void MacroEnv::finish_episode(bool death) {
    over_ = true;
    censored_ = !death;
    const double f_end = death ? 0.0 : fhat_now();
    for (int k = 0; k < cfg_.n_chargers; ++k) {
        if (open_[k].open)
            terminal_frames_.push_back(close_frame(k, f_end, render_now(k), death));
    }
    pending_.clear();
}

std::optional<DecisionPoint> MacroEnv::next_decision() {
    while (true) {
        if (over_) return std::nullopt;
        if (!pending_.empty()) {
            const int agent = pending_.front();
            pending_.pop_front();
            DecisionPoint dp;
            dp.agent = agent;
            dp.t = state_.clock;
            dp.obs = render_now(agent);
            last_obs_[agent] = dp.obs;
            if (open_[agent].open)
                dp.finished = close_frame(agent, fhat_now(), dp.obs, false);
            return dp;
        }
        if (state_.clock >= cfg_.t_max - 1e-9) {
            finish_episode(false);
            return std::nullopt;
        }
        StepStats stats;
        const auto events = step(state_, cfg_.dt, &stats);
        for (int k = 0; k < cfg_.n_chargers; ++k)
            if (open_[k].open) open_[k].excl_accum += stats.exclusive[k];
        if (state_.dead) {
            finish_episode(true);
            return std::nullopt;
        }
        std::vector<int> done;
        for (const auto& e : events)
            if (e.kind == EventKind::ChargingFinished) done.push_back(e.entity);
        std::sort(done.begin(), done.end());
        for (int k : done) pending_.push_back(k);
    }
}

void MacroEnv::submit(int agent, const MacroAction& action, std::vector<float> latent,
                      float log_prob) {
    if (over_) throw InvariantViolation("submit on a finished episode");
    if (open_[agent].open)
        throw InvariantViolation("agent " + std::to_string(agent) +
                                 " already has an active macro action");
    const MacroSchedule sched = plan_macro(state_, agent, action);
    install_macro(state_, agent, sched);
    OpenMacro om;
    om.open = true;
    // reuse the decision-point observation: the agent's own commit cannot
    // change its observation (F3/F4 exclude self), so re-rendering here
    // would produce identical bytes
    om.o_start = last_obs_[agent] ? last_obs_[agent] : render_now(agent);
    last_obs_[agent] = nullptr;
    om.t_start = state_.clock;
    om.f_start = fhat_now();
    om.action = action;
    om.latent = std::move(latent);
    om.log_prob = log_prob;
    om.excl_accum = 0.0;
    open_[agent] = std::move(om);
    return;
}

}  // namespace wrsn
