#pragma once

#include <string>

#include "wrsn/lifetime.hpp"
#include "wrsn/macro_env.hpp"

namespace wrsn {

// Run directories live under --out / $WRSN_OUT / ./wrsn_runs and carry a
// timestamped name; file contents stay timestamp-free so identical runs
// produce identical bytes.
std::string make_run_dir(const std::string& base, const std::string& command,
                         const std::string& explicit_dir);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// one TransitionFrame as an NDJSON record (latent map optional)
std::string frame_to_json(const TransitionFrame& fr, bool include_latent);

// {nodes:[{id,weight}], edges:[[i,j]]}; node 0 is the source (weight forced +inf)
LifetimeGraph parse_lifetime_graph_json(const std::string& text);

}  // namespace wrsn
