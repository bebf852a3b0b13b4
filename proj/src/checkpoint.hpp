#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "network.hpp"

namespace innie {

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ArchitectureMismatch : public CheckpointError {
public:
    using CheckpointError::CheckpointError;
};

struct Checkpoint {
    Network<float> network;
    std::vector<int> scales;
    double dist_cap = 10.0;
    std::uint64_t seed = 0;
};

/// Layout (little-endian): "INNIECKP", u32 version, u32 in_channels,
/// 3 x u32 block widths, 4 x u32 dense widths, u32 scale count, u32 scales,
/// f64 dist_cap, u64 seed, u64 architecture fingerprint, u64 parameter count,
/// f32 parameters, u32 CRC-32 of everything before it.
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& checkpoint);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& file);
Checkpoint load_checkpoint(const std::filesystem::path& file);

/// Throws ArchitectureMismatch when the checkpoint was trained on other scales.
void require_scales(const Checkpoint& checkpoint, const std::vector<int>& scales);

}  // namespace innie
