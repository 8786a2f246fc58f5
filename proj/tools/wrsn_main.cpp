#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wrsn/controllers.hpp"
#include "wrsn/run_io.hpp"
#include "wrsn/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wrsn;

namespace {

std::string default_out_base() {
    const char* env = std::getenv("WRSN_OUT");
    return env && *env ? env : "wrsn_runs";
}

struct CommonOpts {
    std::string run_dir;
    std::string out_base = default_out_base();
};

void echo_config(const std::string& run_dir, const json& cfg) {
    write_text_file(run_dir + "/config.json", cfg.dump(2) + "\n");
}

EnvConfig make_env_config(const ScenarioInstance& inst, int T, int chargers, double dt,
                          double kernel_h, const std::string& f4_anchor) {
    EnvConfig ec;
    ec.n_chargers = chargers;
    ec.dt = dt;
    ec.obs.T = T;
    ec.obs.h = kernel_h > 0 ? kernel_h : inst.params.r_c;
    ec.obs.f4_anchor = f4_anchor == "current" ? F4Anchor::Current : F4Anchor::Destination;
    return ec;
}

json manifest_to_json(const std::string& text) {
    return text.empty() ? json::object() : json::parse(text);
}

// rebuilds the trainer (network shapes, ablation, env geometry) a checkpoint
// was written with, then loads its parameters
std::unique_ptr<Trainer> trainer_from_checkpoint(const std::string& path,
                                                 const ScenarioInstance& inst,
                                                 const RoutingTable& routing) {
    const auto ckpt = nn::load_checkpoint(path);
    const json m = manifest_to_json(ckpt.manifest);
    TrainerConfig tc;
    tc.algo = algo_from_name(m.value("algo", "amappo"));
    tc.ablation = ablation_from_name(m.value("ablation", "FULL"));
    tc.gamma = m.value("gamma", tc.gamma);
    tc.clip_eps = m.value("clip_eps", tc.clip_eps);
    tc.seed = m.value("seed", std::uint64_t(1));
    tc.env = make_env_config(inst, m.value("T", 100), m.value("M", 3), m.value("dt", 1.0),
                             m.value("kernel_h", 0.0), m.value("f4_anchor", "destination"));
    tc.env.reward.r_scale = m.value("r_scale", tc.env.reward.r_scale);
    tc.env.reward.r_scale_ex = m.value("r_scale_ex", tc.env.reward.r_scale_ex);
    if (m.contains("grid")) {
        const auto g = m["grid"];
        const double tol = 1e-6;
        if (std::abs(g[0].get<double>() - inst.h0) > tol ||
            std::abs(g[1].get<double>() - inst.h1) > tol ||
            std::abs(g[2].get<double>() - inst.w0) > tol ||
            std::abs(g[3].get<double>() - inst.w1) > tol)
            throw ValidationError("checkpoint/scenario mismatch: grid bounds differ");
    }
    auto tr = std::make_unique<Trainer>(inst, routing, tc);
    tr->load_checkpoint_file(path);
    return tr;
}

int cmd_generate(std::uint64_t seed, double area_w, double area_h, int targets, int sensors,
                 double b_packet, double packet_period, const std::string& out_file,
                 CommonOpts& com) {
    EnergyParams p;
    if (b_packet > 0) p.b_packet = b_packet;
    if (packet_period > 0) p.packet_period = packet_period;
    const ScenarioInstance inst =
        generate_instance(seed, area_w, area_h, targets, sensors, p);
    const std::string text = instance_to_json(inst);
    if (out_file.empty() || out_file == "-") {
        std::cout << text;
    } else {
        write_text_file(out_file, text);
    }
    const std::string run_dir = make_run_dir(com.out_base, "generate", com.run_dir);
    echo_config(run_dir, json{{"command", "generate"},
                              {"seed", seed},
                              {"area", {area_w, area_h}},
                              {"targets", targets},
                              {"sensors", sensors},
                              {"b_packet", inst.params.b_packet},
                              {"packet_period", inst.params.packet_period},
                              {"out", out_file}});
    std::fprintf(stderr, "wrote %s (%d sensors, %d targets); run dir %s\n",
                 out_file.c_str(), inst.num_sensors(), inst.num_targets(), run_dir.c_str());
    return 0;
}

int cmd_simulate(const std::string& scenario, const std::string& controller_spec,
                 std::uint64_t seed, double dt, double t_max, int chargers, int T,
                 double kernel_h, bool dump_events, CommonOpts& com) {
    const ScenarioInstance inst = load_instance(scenario);
    const RoutingTable routing = build_routing(inst);
    EnvConfig ec = make_env_config(inst, T, chargers, dt, kernel_h, "destination");
    const std::string run_dir = make_run_dir(com.out_base, "simulate", com.run_dir);
    echo_config(run_dir, json{{"command", "simulate"},
                              {"scenario", scenario},
                              {"controller", controller_spec},
                              {"seed", seed},
                              {"dt", dt},
                              {"t_max", t_max},
                              {"chargers", chargers},
                              {"T", T}});

    const LifetimeResult base =
        simulate_lifetime(inst, routing, nullptr, ec, seed, t_max);

    std::unique_ptr<Trainer> tr;
    std::unique_ptr<Controller> ctrl;
    if (controller_spec == "none") {
        // chargerless on both sides; improvement is exactly 1
    } else if (controller_spec == "random") {
        ctrl = std::make_unique<RandomController>();
    } else if (controller_spec.rfind("checkpoint:", 0) == 0) {
        tr = trainer_from_checkpoint(controller_spec.substr(11), inst, routing);
        ec = tr->config().env;
        ec.dt = dt;
        ctrl = tr->make_policy_controller();
        if (tr->config().env.n_chargers != chargers && chargers != 0)
            ec.n_chargers = chargers;
    } else {
        throw ParseError("unknown controller '" + controller_spec +
                         "' (want none|random|checkpoint:<path>)");
    }

    std::vector<SimEvent> events;
    const LifetimeResult with = ctrl ? simulate_lifetime(inst, routing, ctrl.get(), ec, seed,
                                                         t_max,
                                                         dump_events ? &events : nullptr)
                                     : base;
    if (dump_events) {
        std::ofstream ev(run_dir + "/events.ndjson");
        for (const auto& e : events) ev << event_to_json(e) << "\n";
    }
    json out{{"F_B", base.F0},
             {"F0", with.F0},
             {"improvement", base.F0 > 0 ? with.F0 / base.F0 : 0.0},
             {"censored", with.censored},
             {"seed", seed},
             {"dt", dt}};
    std::cout << out.dump() << "\n";
    write_text_file(run_dir + "/lifetime.json", out.dump() + "\n");
    return 0;
}

int cmd_train(const std::string& scenario, const std::string& algo,
              const std::string& ablation, long max_frames, std::uint64_t seed, int T,
              int chargers, double dt, double kernel_h, int buffer, int minibatch,
              int epochs, double lr, double clip_norm, int workers, bool trace_frames,
              CommonOpts& com) {
    (void)workers;  // single execution context per run; kept for interface stability
    const ScenarioInstance inst = load_instance(scenario);
    const RoutingTable routing = build_routing(inst);
    TrainerConfig tc;
    tc.algo = algo_from_name(algo);
    tc.ablation = ablation_from_name(ablation);
    tc.max_frames = max_frames;
    tc.seed = seed;
    tc.buffer_capacity = buffer;
    tc.minibatch = minibatch;
    tc.epochs = epochs;
    tc.lr = lr;
    tc.clip_norm = clip_norm;
    tc.env = make_env_config(inst, T, chargers, dt, kernel_h, "destination");
    tc.resolve();

    const std::string run_dir = make_run_dir(com.out_base, "train", com.run_dir);
    echo_config(run_dir, json{{"command", "train"},
                              {"scenario", scenario},
                              {"algo", algo},
                              {"ablation", ablation},
                              {"max_frames", max_frames},
                              {"seed", seed},
                              {"T", T},
                              {"chargers", chargers},
                              {"dt", dt},
                              {"kernel_h", tc.env.obs.h},
                              {"buffer", buffer},
                              {"minibatch", minibatch},
                              {"epochs", epochs},
                              {"lr", lr},
                              {"clip_norm", clip_norm}});

    Trainer trainer(inst, routing, tc);
    const auto rows = trainer.train(run_dir);
    trainer.save_checkpoint_file(run_dir + "/checkpoint_final.bin", scenario);
    if (trace_frames) {
        // one extra greedy-policy episode, exported as an NDJSON trace
        auto ctrl = trainer.make_policy_controller();
        MacroEnv env(inst, routing, tc.env);
        Rng rng(seed ^ 0x7457);
        std::ofstream trace(run_dir + "/episode_trace.ndjson");
        while (auto dp = env.next_decision()) {
            if (dp->finished) trace << frame_to_json(*dp->finished, false) << "\n";
            Decision d = ctrl->decide(*dp->obs, env.state(), env.grid(), dp->agent, rng);
            env.submit(dp->agent, d.action, std::move(d.latent), d.log_prob);
        }
        for (const auto& fr : env.terminal_frames())
            trace << frame_to_json(fr, false) << "\n";
    }
    std::fprintf(stderr, "trained %ld frames over %zu updates; artifacts in %s\n",
                 rows.empty() ? 0 : rows.back().frames, rows.size(), run_dir.c_str());
    std::cout << run_dir << "\n";
    return 0;
}

int cmd_inspect(const std::string& scenario, const std::string& checkpoint,
                const std::string& mask, int agent, int T, int chargers, double kernel_h,
                CommonOpts& com) {
    const ScenarioInstance inst = load_instance(scenario);
    const RoutingTable routing = build_routing(inst);
    const std::string run_dir = make_run_dir(com.out_base, "inspect", com.run_dir);
    echo_config(run_dir, json{{"command", "inspect"},
                              {"scenario", scenario},
                              {"checkpoint", checkpoint},
                              {"mask", mask},
                              {"agent", agent},
                              {"T", T},
                              {"chargers", chargers}});

    std::unique_ptr<Trainer> tr;
    EnvConfig ec = make_env_config(inst, T, chargers, 1.0, kernel_h, "destination");
    if (!checkpoint.empty()) {
        tr = trainer_from_checkpoint(checkpoint, inst, routing);
        ec = tr->config().env;
    }
    ec.obs.mask = ablation_from_name(mask.empty() ? "FULL" : mask).mask;

    NetworkState st = make_network_state(inst, routing, ec.n_chargers, ec.sim);
    const ObservationGrid grid = ObservationGrid::from_instance(inst, ec.obs.T);
    const Observation obs = render(st, agent, grid, ec.obs);
    for (int ch = 0; ch < 4; ++ch) {
        write_channel_pgm(obs, ch, run_dir + "/f" + std::to_string(ch + 1) + ".pgm");
        write_channel_csv(obs, ch, run_dir + "/f" + std::to_string(ch + 1) + ".csv");
    }

    json overlay{{"agent", agent}, {"t", st.clock}};
    if (tr && !tr->config().ablation.no_pm) {
        const int n = ec.obs.T * ec.obs.T;
        std::vector<float> mean(n), pr(n);
        float log_std = 0.0f;
        nn::ActorNet<float>::Ws ws;
        tr->map_actor(agent < tr->num_actors() ? agent : 0)
            .forward(obs.data.data(), ec.obs.T, ws, mean.data(), &log_std);
        nn::softmax(mean.data(), n, pr.data());  // deterministic map: x = mean
        Observation pr_obs;
        pr_obs.T = ec.obs.T;
        pr_obs.data.assign(pr.begin(), pr.end());
        pr_obs.data.resize(4 * n, 0.0f);
        write_channel_pgm(pr_obs, 0, run_dir + "/pr.pgm");
        write_channel_csv(pr_obs, 0, run_dir + "/pr.csv");
        ArgmaxResult am;
        RegionD region;
        OptimizeResult opt;
        const MacroAction act = select_action(pr, st, grid, &am, &region, &opt);
        overlay["p_max"] = am.p_max;
        overlay["cell"] = {am.u + 1, am.v + 1};  // 1-based, as in the box formula
        overlay["region"] = {{"a_lo", region.a_lo},
                             {"a_hi", region.a_hi},
                             {"b_lo", region.b_lo},
                             {"b_hi", region.b_hi}};
        overlay["point"] = {act.a, act.b};
        overlay["c"] = act.c;
        overlay["zero_gain"] = opt.zero_gain;
        overlay["log_std"] = log_std;
    }
    write_text_file(run_dir + "/overlay.json", overlay.dump(2) + "\n");
    std::cout << run_dir << "\n";
    return 0;
}

int cmd_ct(const std::string& graph_file) {
    const LifetimeGraph g = parse_lifetime_graph_json(read_text_file(graph_file));
    const auto ct = connection_times(g);
    json out = json::array();
    for (int i = 0; i < g.size(); ++i) {
        json row{{"id", i}};
        if (std::isinf(ct[i]))
            row["ct"] = "inf";
        else
            row["ct"] = ct[i];
        out.push_back(row);
    }
    std::cout << out.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"wireless rechargeable sensor network charging simulator and trainer"};
    app.require_subcommand(1);
    CommonOpts com;
    app.add_option("--out", com.out_base, "base output directory (default $WRSN_OUT)");
    app.add_option("--run-dir", com.run_dir, "explicit run directory (skips timestamping)");

    // generate
    auto* gen = app.add_subcommand("generate", "generate a synthetic scenario");
    std::uint64_t g_seed = 1;
    int g_targets = 5, g_sensors = 20;
    std::string g_area = "1000x1000", g_out;
    double g_bpacket = 0, g_period = 0;
    gen->add_option("--seed", g_seed);
    gen->add_option("--targets", g_targets);
    gen->add_option("--sensors", g_sensors);
    gen->add_option("--area", g_area, "WxH in meters");
    gen->add_option("--b-packet", g_bpacket, "bits per packet (default 4000)");
    gen->add_option("--packet-period", g_period, "seconds between packets (default 1)");
    gen->add_option("--out-file", g_out, "scenario file to write ('-' for stdout)");

    // simulate
    auto* sim = app.add_subcommand("simulate", "lifetime with and without chargers");
    std::string s_scenario, s_controller = "none";
    std::uint64_t s_seed = 1;
    double s_dt = 1.0, s_tmax = 0.0, s_h = 0.0;
    int s_chargers = 3, s_T = 100;
    bool s_events = false;
    sim->add_option("--scenario", s_scenario)->required();
    sim->add_option("--controller", s_controller, "none|random|checkpoint:<path>");
    sim->add_option("--seed", s_seed);
    sim->add_option("--dt", s_dt);
    sim->add_option("--t-max", s_tmax, "cap in seconds (default t_sm)");
    sim->add_option("--chargers", s_chargers);
    sim->add_option("--T", s_T, "observation grid side");
    sim->add_option("--kernel-h", s_h, "kernel width (default r_c)");
    sim->add_flag("--events", s_events, "dump the event log");

    // train
    auto* trn = app.add_subcommand("train", "train charging policies");
    std::string t_scenario, t_algo = "amappo", t_ablation = "FULL";
    long t_frames = 20000;
    std::uint64_t t_seed = 1;
    int t_T = 100, t_chargers = 3, t_buffer = 512, t_minibatch = 64, t_epochs = 5,
        t_workers = 1;
    double t_dt = 1.0, t_h = 0.0, t_lr = 3e-4, t_clip_norm = 0.5;
    bool t_trace = false;
    trn->add_option("--scenario", t_scenario)->required();
    trn->add_option("--algo", t_algo, "amappo|ppo|ippo");
    trn->add_option("--ablation", t_ablation, "FULL|NO_1|NO_2_3_4|NO_EX|NO_GE|NO_PM");
    trn->add_option("--max-frames", t_frames);
    trn->add_option("--seed", t_seed);
    trn->add_option("--T", t_T);
    trn->add_option("--chargers", t_chargers);
    trn->add_option("--dt", t_dt);
    trn->add_option("--kernel-h", t_h);
    trn->add_option("--buffer", t_buffer);
    trn->add_option("--minibatch", t_minibatch);
    trn->add_option("--epochs", t_epochs);
    trn->add_option("--lr", t_lr);
    trn->add_option("--clip-norm", t_clip_norm);
    trn->add_option("--workers", t_workers, "rollout contexts (single-context = 1)");
    trn->add_flag("--trace", t_trace, "export one episode trace after training");

    // inspect
    auto* ins = app.add_subcommand("inspect", "dump observation heatmaps and action overlay");
    std::string i_scenario, i_checkpoint, i_mask = "FULL";
    int i_agent = 0, i_T = 100, i_chargers = 3;
    double i_h = 0.0;
    ins->add_option("--scenario", i_scenario)->required();
    ins->add_option("--checkpoint", i_checkpoint);
    ins->add_option("--mask", i_mask);
    ins->add_option("--agent", i_agent);
    ins->add_option("--T", i_T);
    ins->add_option("--chargers", i_chargers);
    ins->add_option("--kernel-h", i_h);

    // ct
    auto* ctc = app.add_subcommand("ct", "connection times of a JSON graph");
    std::string c_graph;
    ctc->add_option("--graph", c_graph)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) {
            const auto x = g_area.find('x');
            if (x == std::string::npos) throw ParseError("--area: expected WxH");
            return cmd_generate(g_seed, std::stod(g_area.substr(0, x)),
                                std::stod(g_area.substr(x + 1)), g_targets, g_sensors,
                                g_bpacket, g_period, g_out, com);
        }
        if (sim->parsed())
            return cmd_simulate(s_scenario, s_controller, s_seed, s_dt, s_tmax, s_chargers,
                                s_T, s_h, s_events, com);
        if (trn->parsed())
            return cmd_train(t_scenario, t_algo, t_ablation, t_frames, t_seed, t_T,
                             t_chargers, t_dt, t_h, t_buffer, t_minibatch, t_epochs, t_lr,
                             t_clip_norm, t_workers, t_trace, com);
        if (ins->parsed())
            return cmd_inspect(i_scenario, i_checkpoint, i_mask, i_agent, i_T, i_chargers,
                               i_h, com);
        if (ctc->parsed()) return cmd_ct(c_graph);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const nn::CheckpointError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 2;
}
