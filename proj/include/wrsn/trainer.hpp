#pragma once

#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wrsn/controllers.hpp"
#include "wrsn/macro_env.hpp"
#include "wrsn/nn/adam.hpp"
#include "wrsn/nn/checkpoint.hpp"
#include "wrsn/nn/nets.hpp"

namespace wrsn {

enum class Algo { AMAPPO, PPO, IPPO };

const char* algo_name(Algo a);
Algo algo_from_name(const std::string& s);

// Table 5.3 variant selection
struct AblationSpec {
    ObsMask mask = ObsMask::Full;
    RewardMode reward = RewardMode::Full;
    bool no_pm = false;
};
AblationSpec ablation_from_name(const std::string& name);
std::string ablation_name(const AblationSpec& a);

struct TrainerConfig {
    Algo algo = Algo::AMAPPO;
    double clip_eps = 0.2;
    double gamma = 0.99;
    int epochs = 5;
    double lr = 3e-4;
    double clip_norm = 0.5;
    int buffer_capacity = 512;
    int minibatch = 64;
    long max_frames = 20000;
    std::uint64_t seed = 1;
    bool adv_norm = true;
    double entropy_coef = 0.0;
    int checkpoint_every = 10;
    AblationSpec ablation;
    EnvConfig env;

    void resolve() {
        env.obs.mask = ablation.mask;
        env.reward.mode = ablation.reward;
    }
};

// ---- losses (templated so gradient checks can run in 64-bit) ----

template <class S>
struct LossFrame {
    const float* o_start = nullptr;
    const float* o_end = nullptr;
    int T = 0;
    std::vector<S> latent;
    S log_prob_old = S(0);
    S advantage = S(0);  // already normalized when normalization is on
    S reward = S(0);
    bool terminal = false;
};

struct ActorLossStats {
    double objective = 0.0;  // the maximized clipped surrogate
    double mean_ratio = 0.0;
    double clip_fraction = 0.0;
};

// Clipped-surrogate objective over a batch. When compute_grad is set,
// gradients of the *minimized* (negated) objective are accumulated into the
// actor parameters. Throws on a non-finite ratio, naming the frame.
template <class S, class ActorT>
ActorLossStats actor_loss(ActorT& net, typename ActorT::Ws& ws,
                          const std::vector<const LossFrame<S>*>& batch, double clip_eps,
                          double entropy_coef, bool compute_grad) {
    const std::size_t m = batch.size();
    ActorLossStats st;
    std::vector<S> mean, dmean;
    for (std::size_t fi = 0; fi < m; ++fi) {
        const LossFrame<S>& f = *batch[fi];
        const int n = static_cast<int>(f.latent.size());
        mean.resize(n);
        S log_std_arr[3];
        S* log_std = log_std_arr;
        int n_std = 1;
        if constexpr (std::is_same_v<ActorT, nn::ActorNet<S>>) {
            net.forward(f.o_start, f.T, ws, mean.data(), log_std);
        } else {
            net.forward(f.o_start, f.T, ws, mean.data(), log_std);
            n_std = 3;
        }
        S logp = S(0);
        if (n_std == 1) {
            logp = nn::gaussian_log_prob(mean.data(), log_std[0], f.latent.data(), n);
        } else {
            for (int i = 0; i < 3; ++i)
                logp += nn::gaussian_log_prob(&mean[i], log_std[i], &f.latent[i], 1);
        }
        const double rho = std::exp(static_cast<double>(logp - f.log_prob_old));
        if (!std::isfinite(rho))
            throw InvariantViolation("actor_loss: non-finite ratio at frame " +
                                     std::to_string(fi));
        const double adv = static_cast<double>(f.advantage);
        const double surr1 = rho * adv;
        const double clipped = std::clamp(rho, 1.0 - clip_eps, 1.0 + clip_eps);
        const double surr2 = clipped * adv;
        st.objective += std::min(surr1, surr2) / m;
        st.mean_ratio += rho / m;
        if (std::abs(rho - 1.0) > clip_eps) st.clip_fraction += 1.0 / m;

        double entropy = 0.0;
        for (int i = 0; i < n_std; ++i)
            entropy += (n / n_std) * (static_cast<double>(log_std[i]) +
                                      0.5 * std::log(2.0 * M_PI * std::exp(1.0)));
        st.objective += entropy_coef * entropy / m;

        if (!compute_grad) continue;
        // d(-objective)/d(logp); the clipped branch has zero gradient
        const double dobj_drho = surr1 <= surr2 ? adv : 0.0;
        const S dlogp = static_cast<S>(-(dobj_drho * rho) / m);
        dmean.assign(n, S(0));
        if (n_std == 1) {
            S dls = nn::gaussian_log_prob_grad(mean.data(), log_std[0], f.latent.data(), n,
                                               dlogp, dmean.data());
            dls += static_cast<S>(-entropy_coef * n / m);
            net.backward(ws, dmean.data(), dls);
        } else {
            S dls3[3];
            for (int i = 0; i < 3; ++i) {
                dls3[i] = nn::gaussian_log_prob_grad(&mean[i], log_std[i], &f.latent[i], 1,
                                                     dlogp, &dmean[i]);
                dls3[i] += static_cast<S>(-entropy_coef / m);
            }
            net.backward(ws, dmean.data(), dls3);
        }
    }
    return st;
}

// MSE of the one-step TD residual; bootstraps from the end-of-macro
// observation, with V(o_end) = 0 on terminal (network death) frames.
// Gradients flow through both evaluations when compute_grad is set.
template <class S>
double critic_loss(nn::CriticNet<S>& net, typename nn::CriticNet<S>::Ws& ws1,
                   typename nn::CriticNet<S>::Ws& ws2,
                   const std::vector<const LossFrame<S>*>& batch, double gamma,
                   bool compute_grad) {
    const std::size_t m = batch.size();
    double loss = 0.0;
    for (const auto* fp : batch) {
        const LossFrame<S>& f = *fp;
        const S v1 = net.forward(f.o_start, f.T, ws1);
        const S v2 = f.terminal ? S(0) : net.forward(f.o_end, f.T, ws2);
        const double r = static_cast<double>(f.reward) + gamma * v2 - v1;
        loss += r * r / m;
        if (!compute_grad) continue;
        if (!f.terminal) net.backward(ws2, static_cast<S>(2.0 * gamma * r / m));
        net.backward(ws1, static_cast<S>(-2.0 * r / m));
    }
    return loss;
}

// ---- training ----

struct AgentBuffer {
    int agent_id = 0;
    std::vector<TransitionFrame> frames;
};

struct TrainLogRow {
    int update = 0;
    long frames = 0;
    double mean_lifetime = 0.0;
    double improvement = 0.0;
    double actor_loss = 0.0;
    double critic_loss = 0.0;
    double mean_ratio = 0.0;
    double clip_fraction = 0.0;
};

struct CollectStats {
    int episodes = 0;
    long frames = 0;
    double mean_lifetime = 0.0;
    int degenerate_episodes = 0;  // hit t_sm without a single frame
};

class Trainer {
public:
    Trainer(const ScenarioInstance& inst, const RoutingTable& routing, TrainerConfig cfg);

    CollectStats collect();
    TrainLogRow update();
    std::vector<TrainLogRow> train(const std::string& out_dir = "");

    std::vector<LifetimeResult> evaluate(int episodes, std::uint64_t seed);

    double baseline_lifetime();  // F_B, computed once
    const std::vector<AgentBuffer>& buffers() const { return buffers_; }
    std::vector<AgentBuffer>& mutable_buffers() { return buffers_; }

    int num_actors() const { return static_cast<int>(map_actors_.size() + vec_actors_.size()); }
    int num_critics() const { return static_cast<int>(critics_.size()); }
    nn::ActorNet<float>& map_actor(int i) { return *map_actors_.at(i); }
    nn::CriticNet<float>& critic(int i) { return *critics_.at(i); }

    std::vector<nn::ParamRef<float>> checkpoint_refs();
    std::string manifest_json(const std::string& scenario_source) const;
    void save_checkpoint_file(const std::string& path, const std::string& scenario_source);
    void load_checkpoint_file(const std::string& path);

    std::unique_ptr<Controller> make_policy_controller();

    const TrainerConfig& config() const { return cfg_; }

private:
    double critic_value(int agent, const Observation& obs);
    void actor_update_pass(int actor_idx, const std::vector<TransitionFrame*>& batch,
                           Rng& rng, TrainLogRow& row, int& actor_evals);
    void critic_update_pass(int critic_idx, const std::vector<TransitionFrame*>& batch,
                            Rng& rng, TrainLogRow& row, int& critic_evals);

    const ScenarioInstance& inst_;
    const RoutingTable& routing_;
    TrainerConfig cfg_;
    MacroEnv env_;
    Rng rng_;

    std::vector<std::unique_ptr<nn::ActorNet<float>>> map_actors_;
    std::vector<std::unique_ptr<nn::VectorActorNet<float>>> vec_actors_;
    std::vector<std::unique_ptr<nn::CriticNet<float>>> critics_;
    std::vector<nn::Adam<float>> actor_adams_;
    std::vector<nn::Adam<float>> critic_adams_;
    std::vector<std::vector<nn::ParamRef<float>>> actor_refs_;
    std::vector<std::vector<nn::ParamRef<float>>> critic_refs_;

    std::vector<AgentBuffer> buffers_;
    nn::CriticNet<float>::Ws cws1_, cws2_;
    nn::ActorNet<float>::Ws aws_;
    nn::VectorActorNet<float>::Ws vws_;

    long total_frames_ = 0;
    int update_count_ = 0;
    long episode_counter_ = 0;
    double f_baseline_ = -1.0;
};

std::string train_log_csv_header();
std::string train_log_csv_row(const TrainLogRow& r);

}  // namespace wrsn
