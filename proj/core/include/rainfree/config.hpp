#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rainfree/blur_gradient.hpp"
#include "rainfree/luminance.hpp"
#include "rainfree/losses.hpp"
#include "rainfree/networks.hpp"

namespace rainfree {

struct TrainConfig {
  LossWeights weights;
  double lr0 = 2e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  std::int64_t total_iters = 2000;
  std::int64_t decay_start = -1;  // -1: total_iters / 2
  int batch = 1;
  int train_size = 64;
  std::uint64_t seed = 0;  // data and init seeds are derived from it

  bool no_rgm = false;
  bool no_bgm = false;
  bool no_lum = false;
  bool lum_negatives = true;  // false: clean discriminator sees only (c, derained)
  double lum_gamma = kDefaultLumGamma;
  CachePolicy negative_cache = CachePolicy::kOnTheFly;
  GaussianScaleConfig blur_scales;
  // Every discriminator input is circularly shifted by up to this many pixels and
  // randomly mirrored, fresh per call; 0 shows images unchanged.
  int disc_shift = 0;

  NetworkConfig network;  // num_resblocks_gc 0 picks NetworkConfig::defaults_for(train_size)

  std::int64_t checkpoint_every = 500;
  std::int64_t sample_every = 250;
  int prefetch = 4;
  std::string data_root;
  std::string out_dir = "runs/default";

  [[nodiscard]] std::int64_t effective_decay_start() const;
  // Ablation flags applied on top of the configured weights.
  [[nodiscard]] LossWeights effective_weights() const;
  [[nodiscard]] NetworkConfig effective_network() const;
  [[nodiscard]] std::uint64_t data_seed() const;
  [[nodiscard]] std::uint64_t init_seed() const;
  void validate() const;

  // Stable hash of every setting that changes the optimization trajectory.
  [[nodiscard]] std::uint64_t hash() const;
};

// Unknown key or unparsable value; `key` names the offender.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::invalid_argument(what), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct ConfigKey {
  std::string name;  // snake_case; CLI flag is --name with '_' -> '-'
  std::string help;
  bool is_flag = false;  // boolean, usable as a bare CLI switch
  bool affects_training = true;
  std::function<void(TrainConfig&, const std::string&)> set;
  std::function<std::string(const TrainConfig&)> get;
};

const std::vector<ConfigKey>& config_keys();
std::string flag_name(const std::string& key);

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
// "key=value"
void apply_override(TrainConfig& cfg, const std::string& assignment);
// Flat `key = value` lines, '#' comments. Later lines win.
void load_config_file(TrainConfig& cfg, const std::filesystem::path& path);
std::string dump_config(const TrainConfig& cfg);

double lr_schedule(std::int64_t iter, const TrainConfig& cfg);

}  // namespace rainfree
