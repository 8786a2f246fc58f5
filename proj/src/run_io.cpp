#include "wrsn/run_io.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace wrsn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string make_run_dir(const std::string& base, const std::string& command,
                         const std::string& explicit_dir) {
    if (!explicit_dir.empty()) {
        fs::create_directories(explicit_dir);
        return explicit_dir;
    }
    const auto now = std::chrono::system_clock::now().time_since_epoch();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now).count();
    char name[128];
    std::snprintf(name, sizeof(name), "%s/%s-%lld", base.c_str(), command.c_str(),
                  static_cast<long long>(ms));
    fs::create_directories(name);
    return name;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open " + path + " for writing");
    out << content;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string frame_to_json(const TransitionFrame& fr, bool include_latent) {
    json j;
    j["agent"] = fr.agent;
    j["t_start"] = fr.t_start;
    j["t_end"] = fr.t_end;
    j["action"] = {fr.action.a, fr.action.b, fr.action.c};
    j["log_prob"] = fr.log_prob_old;
    j["reward"] = fr.reward;
    j["reward_general"] = fr.reward_general;
    j["reward_exclusive"] = fr.reward_exclusive;
    j["advantage"] = fr.advantage;
    j["terminal"] = fr.terminal;
    if (include_latent) j["latent"] = fr.latent;
    return j.dump();
}

LifetimeGraph parse_lifetime_graph_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("graph: ") + e.what());
    }
    if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
        throw ParseError("graph: expected {nodes:[{id,weight}], edges:[[i,j]]}");
    LifetimeGraph g;
    const auto& nodes = j["nodes"];
    g.weight.assign(nodes.size(), 0.0);
    g.sensor_of_node.assign(nodes.size(), -1);
    for (const auto& n : nodes) {
        const int id = n.at("id").get<int>();
        if (id < 0 || id >= static_cast<int>(nodes.size()))
            throw ParseError("graph: node id out of range");
        g.weight[id] = n.value("weight", 0.0);
        g.sensor_of_node[id] = id;
    }
    g.weight[0] = std::numeric_limits<double>::infinity();  // node 0 is the source
    g.adj.assign(nodes.size(), {});
    for (const auto& e : j["edges"]) {
        const int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        if (a < 0 || b < 0 || a >= g.size() || b >= g.size())
            throw ParseError("graph: edge endpoint out of range");
        g.adj[a].push_back(b);
        g.adj[b].push_back(a);
    }
    return g;
}

}  // namespace wrsn
