#include "wrsn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <json.hpp>

namespace wrsn {

const char* algo_name(Algo a) {
    switch (a) {
        case Algo::AMAPPO: return "amappo";
        case Algo::PPO: return "ppo";
        case Algo::IPPO: return "ippo";
    }
    return "?";
}

Algo algo_from_name(const std::string& s) {
    if (s == "amappo") return Algo::AMAPPO;
    if (s == "ppo") return Algo::PPO;
    if (s == "ippo") return Algo::IPPO;
    throw ParseError("unknown algorithm '" + s + "' (want amappo|ppo|ippo)");
}

AblationSpec ablation_from_name(const std::string& name) {
    AblationSpec a;
    if (name == "FULL") return a;
    if (name == "NO_1") {
        a.mask = ObsMask::No1;
        return a;
    }
    if (name == "NO_2_3_4") {
        a.mask = ObsMask::No234;
        return a;
    }
    if (name == "NO_EX") {
        a.reward = RewardMode::NoEx;
        return a;
    }
    if (name == "NO_GE") {
        a.reward = RewardMode::NoGe;
        return a;
    }
    if (name == "NO_PM") {
        a.no_pm = true;
        return a;
    }
    throw ParseError("unknown ablation '" + name +
                     "' (want FULL|NO_1|NO_2_3_4|NO_EX|NO_GE|NO_PM)");
}

std::string ablation_name(const AblationSpec& a) {
    if (a.no_pm) return "NO_PM";
    if (a.mask == ObsMask::No1) return "NO_1";
    if (a.mask == ObsMask::No234) return "NO_2_3_4";
    if (a.reward == RewardMode::NoEx) return "NO_EX";
    if (a.reward == RewardMode::NoGe) return "NO_GE";
    return "FULL";
}

Trainer::Trainer(const ScenarioInstance& inst, const RoutingTable& routing, TrainerConfig cfg)
    : inst_(inst), routing_(routing), cfg_([&] {
          cfg.resolve();
          return cfg;
      }()),
      env_(inst, routing, cfg_.env), rng_(Rng(cfg_.seed).fork(1)) {
    const int M = cfg_.env.n_chargers;
    const int n_actors = cfg_.algo == Algo::PPO ? 1 : M;
    const int n_critics = cfg_.algo == Algo::IPPO ? M : 1;
    Rng seeder(cfg_.seed);
    for (int i = 0; i < n_actors; ++i) {
        if (cfg_.ablation.no_pm) {
            auto net = std::make_unique<nn::VectorActorNet<float>>();
            net->init(seeder.fork(100 + i));
            vec_actors_.push_back(std::move(net));
        } else {
            auto net = std::make_unique<nn::ActorNet<float>>();
            net->init(seeder.fork(100 + i));
            map_actors_.push_back(std::move(net));
        }
    }
    for (int i = 0; i < n_critics; ++i) {
        auto net = std::make_unique<nn::CriticNet<float>>();
        net->init(seeder.fork(200 + i));
        critics_.push_back(std::move(net));
    }
    for (int i = 0; i < n_actors; ++i) {
        actor_refs_.push_back(cfg_.ablation.no_pm ? vec_actors_[i]->params()
                                                  : map_actors_[i]->params());
        actor_adams_.emplace_back();
        actor_adams_.back().lr = cfg_.lr;
        actor_adams_.back().init(actor_refs_.back());
    }
    for (int i = 0; i < n_critics; ++i) {
        critic_refs_.push_back(critics_[i]->params());
        critic_adams_.emplace_back();
        critic_adams_.back().lr = cfg_.lr;
        critic_adams_.back().init(critic_refs_.back());
    }
    buffers_.resize(M);
    for (int k = 0; k < M; ++k) buffers_[k].agent_id = k;
}

double Trainer::baseline_lifetime() {
    if (f_baseline_ < 0.0) {
        f_baseline_ = simulate_unattended(inst_, routing_, cfg_.seed, cfg_.env.dt,
                                          inst_.params.t_sm, cfg_.env.sim)
                          .F0;
    }
    return f_baseline_;
}

std::unique_ptr<Controller> Trainer::make_policy_controller() {
    if (cfg_.ablation.no_pm) {
        std::vector<nn::VectorActorNet<float>*> nets;
        for (auto& n : vec_actors_) nets.push_back(n.get());
        return std::make_unique<VectorPolicyController>(std::move(nets));
    }
    std::vector<nn::ActorNet<float>*> nets;
    for (auto& n : map_actors_) nets.push_back(n.get());
    return std::make_unique<MapPolicyController>(std::move(nets));
}

double Trainer::critic_value(int agent, const Observation& obs) {
    const int ci = cfg_.algo == Algo::IPPO ? agent : 0;
    return critics_[ci]->forward(obs.data.data(), obs.T, cws1_);
}

CollectStats Trainer::collect() {
    CollectStats stats;
    auto controller = make_policy_controller();
    double lifetime_sum = 0.0;
    auto buffers_full = [&] {
        for (const auto& b : buffers_)
            if (static_cast<int>(b.frames.size()) < cfg_.buffer_capacity) return false;
        return true;
    };
    while (!buffers_full()) {
        env_.reset();
        Rng ep_rng = Rng(cfg_.seed).fork(5000 + static_cast<std::uint64_t>(episode_counter_));
        episode_counter_ += 1;
        // per-agent caches; advantages are computed with the current critic
        // as frames finish, and the caches join the buffers at episode end
        std::vector<std::vector<TransitionFrame>> caches(buffers_.size());
        while (auto dp = env_.next_decision()) {
            if (dp->finished) {
                TransitionFrame fr = std::move(*dp->finished);
                const double v_start = critic_value(fr.agent, *fr.o_start);
                const double v_end = fr.terminal ? 0.0 : critic_value(fr.agent, *fr.o_end);
                fr.advantage = fr.reward + cfg_.gamma * v_end - v_start;
                caches[fr.agent].push_back(std::move(fr));
            }
            Decision d =
                controller->decide(*dp->obs, env_.state(), env_.grid(), dp->agent, ep_rng);
            env_.submit(dp->agent, d.action, std::move(d.latent), d.log_prob);
        }
        for (const auto& fr : env_.terminal_frames()) {
            TransitionFrame copy = fr;
            const double v_start = critic_value(copy.agent, *copy.o_start);
            const double v_end = copy.terminal ? 0.0 : critic_value(copy.agent, *copy.o_end);
            copy.advantage = copy.reward + cfg_.gamma * v_end - v_start;
            caches[copy.agent].push_back(std::move(copy));
        }
        long ep_frames = 0;
        for (std::size_t k = 0; k < caches.size(); ++k) {
            ep_frames += static_cast<long>(caches[k].size());
            for (auto& fr : caches[k]) buffers_[k].frames.push_back(std::move(fr));
        }
        total_frames_ += ep_frames;
        stats.episodes += 1;
        stats.frames += ep_frames;
        lifetime_sum += env_.lifetime();
        if (env_.censored() && ep_frames == 0) {
            stats.degenerate_episodes += 1;
            std::fprintf(stderr,
                         "warning: degenerate episode (reached t_sm without a frame)\n");
        }
    }
    stats.mean_lifetime = stats.episodes > 0 ? lifetime_sum / stats.episodes : 0.0;
    return stats;
}

namespace {

std::vector<float> normalized_advantages(const std::vector<TransitionFrame*>& batch,
                                         bool enabled) {
    std::vector<float> out(batch.size());
    if (!enabled) {
        for (std::size_t i = 0; i < batch.size(); ++i)
            out[i] = static_cast<float>(batch[i]->advantage);
        return out;
    }
    double mean = 0.0;
    for (const auto* f : batch) mean += f->advantage;
    mean /= std::max<std::size_t>(batch.size(), 1);
    double var = 0.0;
    for (const auto* f : batch) var += (f->advantage - mean) * (f->advantage - mean);
    const double std = std::sqrt(var / std::max<std::size_t>(batch.size(), 1));
    const double denom = std::max(std, 1e-8);
    for (std::size_t i = 0; i < batch.size(); ++i)
        out[i] = static_cast<float>((batch[i]->advantage - mean) / denom);
    return out;
}

std::vector<LossFrame<float>> make_loss_frames(const std::vector<TransitionFrame*>& batch,
                                               const std::vector<float>& advantages) {
    std::vector<LossFrame<float>> lf(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const TransitionFrame& f = *batch[i];
        lf[i].o_start = f.o_start->data.data();
        lf[i].o_end = f.o_end->data.data();
        lf[i].T = f.o_start->T;
        lf[i].latent = f.latent;
        lf[i].log_prob_old = f.log_prob_old;
        lf[i].advantage = advantages[i];
        lf[i].reward = static_cast<float>(f.reward);
        lf[i].terminal = f.terminal;
    }
    return lf;
}

}  // namespace

void Trainer::actor_update_pass(int actor_idx, const std::vector<TransitionFrame*>& batch,
                                Rng& rng, TrainLogRow& row, int& actor_evals) {
    const auto adv = normalized_advantages(batch, cfg_.adv_norm);
    auto lf = make_loss_frames(batch, adv);
    std::vector<int> idx(batch.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
        rng.shuffle(idx);
        for (std::size_t start = 0; start < idx.size();
             start += static_cast<std::size_t>(cfg_.minibatch)) {
            const std::size_t end =
                std::min(idx.size(), start + static_cast<std::size_t>(cfg_.minibatch));
            std::vector<const LossFrame<float>*> mb;
            mb.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) mb.push_back(&lf[idx[i]]);
            nn::zero_grads(actor_refs_[actor_idx]);
            ActorLossStats st;
            if (cfg_.ablation.no_pm) {
                st = actor_loss<float>(*vec_actors_[actor_idx], vws_, mb, cfg_.clip_eps,
                                       cfg_.entropy_coef, true);
            } else {
                st = actor_loss<float>(*map_actors_[actor_idx], aws_, mb, cfg_.clip_eps,
                                       cfg_.entropy_coef, true);
            }
            actor_adams_[actor_idx].step(actor_refs_[actor_idx], cfg_.clip_norm);
            row.actor_loss += st.objective;
            row.mean_ratio += st.mean_ratio;
            row.clip_fraction += st.clip_fraction;
            actor_evals += 1;
        }
    }
}

void Trainer::critic_update_pass(int critic_idx, const std::vector<TransitionFrame*>& batch,
                                 Rng& rng, TrainLogRow& row, int& critic_evals) {
    const auto adv = normalized_advantages(batch, false);
    auto lf = make_loss_frames(batch, adv);
    std::vector<int> idx(batch.size());
    std::iota(idx.begin(), idx.end(), 0);
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
        rng.shuffle(idx);
        for (std::size_t start = 0; start < idx.size();
             start += static_cast<std::size_t>(cfg_.minibatch)) {
            const std::size_t end =
                std::min(idx.size(), start + static_cast<std::size_t>(cfg_.minibatch));
            std::vector<const LossFrame<float>*> mb;
            mb.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) mb.push_back(&lf[idx[i]]);
            nn::zero_grads(critic_refs_[critic_idx]);
            const double loss = critic_loss<float>(*critics_[critic_idx], cws1_, cws2_, mb,
                                                   cfg_.gamma, true);
            critic_adams_[critic_idx].step(critic_refs_[critic_idx], cfg_.clip_norm);
            row.critic_loss += loss;
            critic_evals += 1;
        }
    }
}

TrainLogRow Trainer::update() {
    TrainLogRow row;
    row.update = ++update_count_;
    row.frames = total_frames_;
    int actor_evals = 0, critic_evals = 0;

    std::vector<TransitionFrame*> unioned;
    for (auto& b : buffers_)
        for (auto& f : b.frames) unioned.push_back(&f);

    const int M = cfg_.env.n_chargers;
    if (cfg_.algo == Algo::PPO) {
        actor_update_pass(0, unioned, rng_, row, actor_evals);
        critic_update_pass(0, unioned, rng_, row, critic_evals);
    } else {
        for (int k = 0; k < M; ++k) {
            std::vector<TransitionFrame*> own;
            for (auto& f : buffers_[k].frames) own.push_back(&f);
            actor_update_pass(k, own, rng_, row, actor_evals);
        }
        if (cfg_.algo == Algo::AMAPPO) {
            critic_update_pass(0, unioned, rng_, row, critic_evals);
        } else {
            for (int k = 0; k < M; ++k) {
                std::vector<TransitionFrame*> own;
                for (auto& f : buffers_[k].frames) own.push_back(&f);
                critic_update_pass(k, own, rng_, row, critic_evals);
            }
        }
    }
    if (actor_evals > 0) {
        row.actor_loss /= actor_evals;
        row.mean_ratio /= actor_evals;
        row.clip_fraction /= actor_evals;
    }
    if (critic_evals > 0) row.critic_loss /= critic_evals;
    for (auto& b : buffers_) b.frames.clear();
    return row;
}

std::vector<TrainLogRow> Trainer::train(const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::ofstream csv;
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        csv.open(out_dir + "/train_log.csv");
        csv << train_log_csv_header();
    }
    std::vector<TrainLogRow> rows;
    baseline_lifetime();
    while (total_frames_ < cfg_.max_frames) {
        const CollectStats cs = collect();
        TrainLogRow row = update();
        row.mean_lifetime = cs.mean_lifetime;
        row.improvement = f_baseline_ > 0.0 ? cs.mean_lifetime / f_baseline_ : 0.0;
        rows.push_back(row);
        if (csv.is_open()) {
            csv << train_log_csv_row(row);
            csv.flush();
        }
        if (!out_dir.empty() && cfg_.checkpoint_every > 0 &&
            row.update % cfg_.checkpoint_every == 0) {
            save_checkpoint_file(out_dir + "/checkpoint_u" + std::to_string(row.update) +
                                     ".bin",
                                 "");
        }
    }
    if (!out_dir.empty()) save_checkpoint_file(out_dir + "/checkpoint_final.bin", "");
    return rows;
}

std::vector<LifetimeResult> Trainer::evaluate(int episodes, std::uint64_t seed) {
    auto controller = make_policy_controller();
    std::vector<LifetimeResult> out;
    for (int e = 0; e < episodes; ++e) {
        out.push_back(simulate_lifetime(inst_, routing_, controller.get(), cfg_.env,
                                        splitmix64(seed + 7919 * e)));
    }
    return out;
}

std::vector<nn::ParamRef<float>> Trainer::checkpoint_refs() {
    std::vector<nn::ParamRef<float>> refs;
    for (std::size_t i = 0; i < actor_refs_.size(); ++i)
        for (auto r : actor_refs_[i]) {
            r.name = "actor" + std::to_string(i) + "/" + r.name;
            refs.push_back(r);
        }
    for (std::size_t i = 0; i < critic_refs_.size(); ++i)
        for (auto r : critic_refs_[i]) {
            r.name = "critic" + std::to_string(i) + "/" + r.name;
            refs.push_back(r);
        }
    return refs;
}

std::string Trainer::manifest_json(const std::string& scenario_source) const {
    nlohmann::json j;
    j["algo"] = algo_name(cfg_.algo);
    j["ablation"] = ablation_name(cfg_.ablation);
    j["T"] = cfg_.env.obs.T;
    j["M"] = cfg_.env.n_chargers;
    j["gamma"] = cfg_.gamma;
    j["clip_eps"] = cfg_.clip_eps;
    j["seed"] = cfg_.seed;
    j["kernel_h"] = cfg_.env.obs.h;
    j["f4_anchor"] =
        cfg_.env.obs.f4_anchor == F4Anchor::Destination ? "destination" : "current";
    j["dt"] = cfg_.env.dt;
    j["r_scale"] = cfg_.env.reward.r_scale;
    j["r_scale_ex"] = cfg_.env.reward.r_scale_ex;
    j["grid"] = {env_.grid().h0, env_.grid().h1, env_.grid().w0, env_.grid().w1};
    if (!scenario_source.empty()) j["scenario"] = scenario_source;
    return j.dump();
}

void Trainer::save_checkpoint_file(const std::string& path,
                                   const std::string& scenario_source) {
    auto refs = checkpoint_refs();
    nn::save_checkpoint(path, manifest_json(scenario_source), refs);
}

void Trainer::load_checkpoint_file(const std::string& path) {
    auto ckpt = nn::load_checkpoint(path);
    auto refs = checkpoint_refs();
    nn::apply_checkpoint(ckpt, refs);
}

std::string train_log_csv_header() {
    return "update,frames,mean_lifetime_s,lifetime_improvement,actor_loss,critic_loss,"
           "mean_ratio,clip_fraction\n";
}

std::string train_log_csv_row(const TrainLogRow& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%d,%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.update,
                  r.frames, r.mean_lifetime, r.improvement, r.actor_loss, r.critic_loss,
                  r.mean_ratio, r.clip_fraction);
    return buf;
}

}  // namespace wrsn
