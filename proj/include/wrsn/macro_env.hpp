#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "wrsn/energy_sim.hpp"
#include "wrsn/lifetime.hpp"
#include "wrsn/observation.hpp"

namespace wrsn {

enum class RewardMode { Full, NoEx, NoGe };

struct RewardConfig {
    RewardMode mode = RewardMode::Full;
    double r_scale = 1000.0;     // normalization of the general term
    double r_scale_ex = 1.0;     // normalization of the exclusive term
    bool sign_as_printed = false;  // restore the literal (inverted) general form
};

// change in estimated absolute death time over the macro interval
double reward_general(double t1, double t2, double fhat1, double fhat2,
                      const RewardConfig& cfg);
double total_reward(double general, double exclusive, RewardMode mode);

// one completed macro action, as a learning record
struct TransitionFrame {
    int agent = 0;
    double t_start = 0.0, t_end = 0.0;
    std::shared_ptr<const Observation> o_start, o_end;
    MacroAction action;
    std::vector<float> latent;   // the sampled x the action was derived from
    float log_prob_old = 0.0f;
    double reward_general = 0.0;
    double reward_exclusive = 0.0;
    double reward = 0.0;
    double advantage = 0.0;
    bool terminal = false;  // closed by network death
};

struct DecisionPoint {
    int agent = 0;
    double t = 0.0;
    std::shared_ptr<const Observation> obs;
    // frame closed by the macro action that just terminated (absent at episode start)
    std::optional<TransitionFrame> finished;
};

struct EnvConfig {
    int n_chargers = 3;
    double dt = 1.0;
    double t_max = 0.0;  // 0 -> params.t_sm
    ObsConfig obs;
    SimConfig sim;
    RewardConfig reward;
};

// The Dec-POSMDP charging environment. Drive it with:
//   reset(); while (auto dp = next_decision()) submit(dp->agent, ...);
// Simultaneous macro terminations surface in ascending agent id, and each
// agent's observation is rendered after earlier same-time submissions, so
// later deciders see the freshly committed plans of earlier ones.
class MacroEnv {
public:
    MacroEnv(const ScenarioInstance& inst, const RoutingTable& routing, EnvConfig cfg);

    void reset();
    std::optional<DecisionPoint> next_decision();
    void submit(int agent, const MacroAction& action, std::vector<float> latent = {},
                float log_prob = 0.0f);

    bool episode_over() const { return over_; }
    double lifetime() const { return state_.clock; }
    bool censored() const { return censored_; }
    // frames of macro actions still running when the episode ended
    const std::vector<TransitionFrame>& terminal_frames() const { return terminal_frames_; }

    const NetworkState& state() const { return state_; }
    NetworkState& mutable_state() { return state_; }
    const ObservationGrid& grid() const { return grid_; }
    const EnvConfig& config() const { return cfg_; }
    void set_event_log(std::vector<SimEvent>* log) { state_.log = log; }

    double fhat_now();

private:
    struct OpenMacro {
        bool open = false;
        std::shared_ptr<const Observation> o_start;
        double t_start = 0.0;
        double f_start = 0.0;
        MacroAction action;
        std::vector<float> latent;
        float log_prob = 0.0f;
        double excl_accum = 0.0;
    };

    std::shared_ptr<const Observation> render_now(int agent);
    TransitionFrame close_frame(int agent, double f_end,
                                std::shared_ptr<const Observation> o_end, bool terminal);
    void finish_episode(bool death);

    const ScenarioInstance& inst_;
    const RoutingTable& routing_;
    EnvConfig cfg_;
    ObservationGrid grid_;
    NetworkState state_;
    std::vector<OpenMacro> open_;
    std::vector<std::shared_ptr<const Observation>> last_obs_;
    std::deque<int> pending_;  // agents awaiting a decision, ascending in time
    std::vector<TransitionFrame> terminal_frames_;
    bool over_ = false;
    bool censored_ = false;
    double fhat_cache_t_ = -1.0;
    double fhat_cache_v_ = 0.0;
};

}  // namespace wrsn
