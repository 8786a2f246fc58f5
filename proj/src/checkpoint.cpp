#include "wrsn/nn/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace wrsn::nn {

namespace {

constexpr char kMagic[8] = {'W', 'R', 'S', 'N', 'C', 'K', 'P', '1'};

template <class T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw CheckpointError("checkpoint: truncated file");
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& manifest,
                     const std::vector<ParamRef<float>>& refs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("checkpoint: cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, 1);
    put<std::uint64_t>(out, manifest.size());
    out.write(manifest.data(), static_cast<std::streamsize>(manifest.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(refs.size()));
    for (const auto& r : refs) {
        put<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
        out.write(r.name.data(), static_cast<std::streamsize>(r.name.size()));
        put<std::uint32_t>(out, static_cast<std::uint32_t>(r.shape.size()));
        for (int d : r.shape) put<std::int32_t>(out, d);
        put<std::uint64_t>(out, r.w->size());
        out.write(reinterpret_cast<const char*>(r.w->data()),
                  static_cast<std::streamsize>(r.w->size() * sizeof(float)));
    }
    if (!out) throw CheckpointError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint: cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw CheckpointError("checkpoint: bad magic in " + path);
    const auto version = get<std::uint32_t>(in);
    if (version != 1)
        throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint ckpt;
    const auto mlen = get<std::uint64_t>(in);
    ckpt.manifest.resize(mlen);
    in.read(ckpt.manifest.data(), static_cast<std::streamsize>(mlen));
    const auto nblocks = get<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < nblocks; ++i) {
        CheckpointBlock b;
        const auto nlen = get<std::uint32_t>(in);
        b.name.resize(nlen);
        in.read(b.name.data(), nlen);
        const auto ndim = get<std::uint32_t>(in);
        for (std::uint32_t d = 0; d < ndim; ++d) b.shape.push_back(get<std::int32_t>(in));
        const auto count = get<std::uint64_t>(in);
        b.data.resize(count);
        in.read(reinterpret_cast<char*>(b.data.data()),
                static_cast<std::streamsize>(count * sizeof(float)));
        if (!in) throw CheckpointError("checkpoint: truncated block " + b.name);
        ckpt.blocks.push_back(std::move(b));
    }
    return ckpt;
}

void apply_checkpoint(const Checkpoint& ckpt, std::vector<ParamRef<float>>& refs) {
    for (auto& r : refs) {
        const CheckpointBlock* found = nullptr;
        for (const auto& b : ckpt.blocks)
            if (b.name == r.name) {
                found = &b;
                break;
            }
        if (!found) throw CheckpointError("checkpoint: missing block '" + r.name + "'");
        if (found->data.size() != r.w->size())
            throw CheckpointError("checkpoint: size mismatch for '" + r.name + "' (" +
                                  std::to_string(found->data.size()) + " vs " +
                                  std::to_string(r.w->size()) + ")");
        std::copy(found->data.begin(), found->data.end(), r.w->begin());
    }
}

}  // namespace wrsn::nn
