#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rainfree/data.hpp"
#include "rainfree/image.hpp"

namespace rainfree {

inline constexpr double kPsnrCap = 100.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

// 10 log10(1 / MSE) over all elements, peak 1; identical inputs give kPsnrCap.
double psnr(const ImageTensor& a, const ImageTensor& b);

// Mean local SSIM over valid 11x11 Gaussian windows (sigma 1.5), per RGB channel, averaged
// over channels and samples. Throws when either side is smaller than the window.
double ssim(const ImageTensor& a, const ImageTensor& b);

struct EvalEntry {
  std::string name;
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::optional<std::string> error;  // set for failed entries

  [[nodiscard]] bool ok() const { return !error.has_value(); }
};

struct EvalReport {
  std::string model_tag;
  std::vector<EvalEntry> per_image;  // input order
  double mean_psnr = 0.0;
  double mean_ssim = 0.0;

  [[nodiscard]] int num_ok() const;
  [[nodiscard]] int num_failed() const;
  void recompute_means();

  void write_csv(std::ostream& os) const;
  void write_csv(const std::filesystem::path& path) const;
  [[nodiscard]] std::string table() const;
};

using DerainFn = std::function<ImageTensor(const ImageTensor&)>;

// Runs fn on every rainy image. Per-pair exceptions become failed entries.
EvalReport evaluate(const DerainFn& fn, const std::vector<PairedSample>& pairs,
                    std::string model_tag);

// Directory variant: pairs that cannot be read or have mismatched shapes are recorded
// as failed instead of aborting the run. Stems missing a counterpart still throw.
EvalReport evaluate_dir(const DerainFn& fn, const std::filesystem::path& root,
                        std::string model_tag);

}  // namespace rainfree
