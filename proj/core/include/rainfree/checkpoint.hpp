#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "rainfree/config.hpp"
#include "rainfree/networks.hpp"
#include "rainfree/optim.hpp"

namespace rainfree {

inline constexpr std::uint32_t kCheckpointFormat = 1;

struct CheckpointMeta {
  std::string arch_version;
  NetworkConfig network;
  std::int64_t iteration = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

// Binary parameter blob: magic, format, slot count, then (name, shape, floats) per slot.
void save_module(const std::filesystem::path& path, const Module& net);
// Verifies slot names and shapes against `net` before overwriting anything.
void load_module(const std::filesystem::path& path, Module& net);

void save_adam(const std::filesystem::path& path, const AdamState& state);
AdamState load_adam(const std::filesystem::path& path);

// meta.txt: `key = value` lines including the network layout.
void write_meta(const std::filesystem::path& path, const CheckpointMeta& meta);
// Throws when arch_version differs from kArchVersion.
CheckpointMeta read_meta(const std::filesystem::path& path);

// Reads meta.txt and g_c.bin only.
Generator load_derain_generator(const std::filesystem::path& checkpoint_dir);

}  // namespace rainfree
