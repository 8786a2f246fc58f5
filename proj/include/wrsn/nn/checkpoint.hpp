#pragma once

#include <string>
#include <vector>

#include "wrsn/nn/tensor.hpp"

namespace wrsn::nn {

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointBlock {
    std::string name;
    std::vector<int> shape;
    std::vector<float> data;
};

struct Checkpoint {
    std::string manifest;  // JSON text
    std::vector<CheckpointBlock> blocks;
};

// versioned binary container: named parameter blocks (row-major float32)
// preceded by a JSON manifest
void save_checkpoint(const std::string& path, const std::string& manifest,
                     const std::vector<ParamRef<float>>& refs);
Checkpoint load_checkpoint(const std::string& path);

// copies block data into matching refs; every ref must be matched exactly
void apply_checkpoint(const Checkpoint& ckpt, std::vector<ParamRef<float>>& refs);

}  // namespace wrsn::nn
