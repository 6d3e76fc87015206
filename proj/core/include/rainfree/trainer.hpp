#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "rainfree/config.hpp"
#include "rainfree/data.hpp"
#include "rainfree/losses.hpp"
#include "rainfree/networks.hpp"
#include "rainfree/optim.hpp"

namespace rainfree {

struct Optimizers {
  Adam g_c;
  Adam g_r;
  Adam d_c;
  Adam d_s;

  Optimizers(ModelBundle& m, const TrainConfig& cfg);
};

// Non-finite loss during a step; what() carries the full loss dump.
class TrainingAborted : public std::runtime_error {
 public:
  TrainingAborted(std::int64_t iteration, std::string component, const std::string& what)
      : std::runtime_error(what), iteration_(iteration), component_(std::move(component)) {}
  [[nodiscard]] std::int64_t iteration() const { return iteration_; }
  [[nodiscard]] const std::string& component() const { return component_; }

 private:
  std::int64_t iteration_;
  std::string component_;
};

// One alternating iteration: forward G_c and G_r, update D_c, update D_s, then update
// G_c and G_r jointly against the freshly updated discriminators. Ablated terms are not
// evaluated and are reported as 0, and their discriminator is left untouched.
LossBundle train_step(ModelBundle& models, Optimizers& opt, const TrainBatch& batch,
                      const TrainConfig& cfg, double lr);

// Horizontal strip rainy | derained | re-rained | clean of the first sample.
ImageTensor sample_grid(ModelBundle& models, const TrainBatch& batch);

struct TrainResult {
  std::int64_t iterations = 0;
  std::filesystem::path final_checkpoint;
  std::vector<LossBundle> losses;  // steps run by this call
};

inline constexpr const char* kLossCsvHeader = "iteration,guid_r,guid_b,lum_adv_g,cyc,total_g,d_c,d_s";

class Trainer {
 public:
  // The dataset's seed is replaced by cfg.data_seed().
  Trainer(TrainConfig cfg, UnpairedDataset dataset);
  Trainer(const Trainer&) = delete;
  Trainer& operator=(const Trainer&) = delete;

  // Restores parameters, optimizer moments and the iteration counter. The checkpoint must
  // come from a run with the same trajectory-relevant configuration.
  void resume(const std::filesystem::path& checkpoint_dir);

  // Runs iteration `iteration()` with batch sample(iteration()) synchronously.
  LossBundle step();

  // Writes <out>/checkpoints/iter_NNNNNNN and points <out>/checkpoints/latest at it.
  std::filesystem::path save_checkpoint(const std::filesystem::path& out_dir) const;

  // Trains up to total_iters with a prefetching loader, appending to <out>/losses.csv,
  // checkpointing every checkpoint_every iterations and at the end, and writing sample
  // grids to <out>/samples every sample_every iterations.
  TrainResult run(const std::filesystem::path& out_dir,
                  const std::function<void(std::int64_t, const LossBundle&)>& on_step = {});

  [[nodiscard]] std::int64_t iteration() const { return iteration_; }
  [[nodiscard]] const TrainConfig& config() const { return cfg_; }
  [[nodiscard]] ModelBundle& models() { return *models_; }
  [[nodiscard]] const UnpairedSampler& sampler() const { return sampler_; }

 private:
  TrainConfig cfg_;
  UnpairedSampler sampler_;
  std::unique_ptr<ModelBundle> models_;
  std::unique_ptr<Optimizers> opt_;
  std::int64_t iteration_ = 0;
};

// Latest checkpoint directory under <out>/checkpoints, if any.
std::filesystem::path latest_checkpoint(const std::filesystem::path& out_dir);

}  // namespace rainfree
