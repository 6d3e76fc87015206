#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rainfree/image.hpp"
#include "rainfree/luminance.hpp"
#include "rainfree/rain_guidance.hpp"

namespace rainfree {

namespace fs = std::filesystem;

// ---- synthetic rain -------------------------------------------------------------

struct SyntheticRainSpec {
  double angle_deg = 10.0;     // from vertical, [-45, 45]
  int streak_length_px = 9;
  double density = 0.03;       // probability that a pixel seeds a streak
  double intensity = 0.5;      // (0, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

struct RainySample {
  ImageTensor rainy;
  StreakField streaks;
};

// Seeded salt noise smeared by a directional box kernel, scaled by intensity; the
// streaks are identical across channels and non-negative. rainy = clamp01(clean + streaks).
RainySample synthesize_rain(const ImageTensor& clean, const SyntheticRainSpec& spec);

// Deterministic smooth background with soft-edged shapes; values stay within [0.05, 0.85].
ImageTensor generate_clean_scene(int size, std::uint64_t seed);

// ---- files ----------------------------------------------------------------------

// *.png directly inside dir, sorted lexicographically by file name.
std::vector<fs::path> list_images(const fs::path& dir);

// One relative path per line; blank lines and '#' comments ignored. Paths resolve
// against the manifest's directory.
std::vector<fs::path> read_manifest(const fs::path& list_file);
void write_manifest(const fs::path& list_file, const std::vector<std::string>& entries);

// ---- unpaired training data -----------------------------------------------------

enum class Split { kTrain, kTest };

struct UnpairedDataset {
  std::vector<fs::path> rainy_paths;  // domain R
  std::vector<fs::path> clean_paths;  // domain C
  Split split = Split::kTrain;
  std::uint64_t seed = 0;

  // <root>/<split>/{rainy,clean}; a sibling rainy.list / clean.list takes precedence over
  // scanning the directory.
  static UnpairedDataset from_root(const fs::path& root, Split split, std::uint64_t seed);
  void validate() const;
};

struct SamplerOptions {
  int train_size = 64;
  int batch = 1;
  double lum_gamma = kDefaultLumGamma;
  CachePolicy negative_policy = CachePolicy::kOnTheFly;
  int max_read_attempts = 3;
};

struct TrainBatch {
  std::int64_t step = 0;
  ImageTensor rainy;
  ImageTensor clean;
  ImageTensor enhanced;  // luminance-enhanced copy of `clean`, same crops
  std::vector<std::size_t> rainy_index;
  std::vector<std::size_t> clean_index;
};

// Bilinear resize to exactly height x width.
ImageTensor resize_bilinear(const ImageTensor& img, int height, int width);

// Draws rainy and clean indices from independent streams whose state is a pure
// function of (dataset seed, step), so any worker can build step k on its own.
class UnpairedSampler {
 public:
  UnpairedSampler(UnpairedDataset ds, SamplerOptions opts);

  [[nodiscard]] TrainBatch sample(std::int64_t step) const;
  [[nodiscard]] std::pair<std::vector<std::size_t>, std::vector<std::size_t>> draw_indices(
      std::int64_t step) const;

  [[nodiscard]] const UnpairedDataset& dataset() const { return ds_; }
  [[nodiscard]] const SamplerOptions& options() const { return opts_; }

 private:
  struct Domain;
  // Decoded full image or nullopt after exhausting retries.
  std::optional<ImageTensor> load(Domain& d, std::size_t index) const;
  ImageTensor fetch(Domain& d, std::uint64_t stream, std::int64_t step, std::size_t slot,
                    std::size_t& index) const;

  UnpairedDataset ds_;
  SamplerOptions opts_;
  std::shared_ptr<Domain> rainy_;
  std::shared_ptr<Domain> clean_;
  NegativeSampleSet negatives_;
};

// ---- paired evaluation data -----------------------------------------------------

struct PairedSample {
  std::string name;
  ImageTensor rainy;
  ImageTensor gt;
};

struct PairedEntry {
  std::string stem;
  fs::path rainy;
  fs::path gt;
};

// <root>/rainy/<stem>.png matched with <root>/gt/<stem>.png, ordered by stem. Throws
// listing every stem that lacks a counterpart.
std::vector<PairedEntry> list_paired_entries(const fs::path& root);

// Decodes every pair; throws on unreadable files or mismatched shapes.
std::vector<PairedSample> load_paired_testset(const fs::path& root);

// ---- desk corpus ----------------------------------------------------------------

struct CorpusSpec {
  int num_clean = 40;
  int size = 64;
  int test_every = 8;           // every 8th scene goes to the test split (7:1)
  double angle_jitter_deg = 10.0;
  SyntheticRainSpec rain;
  std::uint64_t seed = 0;
};

struct CorpusSummary {
  int train_rainy = 0;
  int train_clean = 0;
  int test_pairs = 0;
};

// Writes <root>/train/{rainy,clean} and <root>/test/{rainy,gt}, each with a manifest. Every
// training scene appears in both domains; the sampler draws the two indices independently.
CorpusSummary build_synthetic_corpus(const fs::path& root, const CorpusSpec& spec);

}  // namespace rainfree
