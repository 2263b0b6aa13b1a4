#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pan/model.hpp"

namespace pan {

struct CheckpointEntry {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;
};

struct Checkpoint {
    std::uint64_t config_digest = 0;
    std::vector<CheckpointEntry> entries;
};

/// PANCKPT1 file: 8-byte magic, config digest (LE u64), parameter count
/// (LE u32), a manifest of (name, shape, byte offset) per parameter, then
/// every array as little-endian 64-bit floats in declaration order.
/// Round-trips bit-exactly.
void save_checkpoint(PanModel& model, std::uint64_t config_digest,
                     const std::filesystem::path& path);

Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies the checkpoint arrays into the model; parameter names and
/// shapes must match the model's declaration order exactly.
void apply_checkpoint(const Checkpoint& ckpt, PanModel& model);

}  // namespace pan
