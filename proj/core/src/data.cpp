#include "rainfree/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "rainfree/blur_gradient.hpp"
#include "rainfree/png_io.hpp"
#include "rainfree/seeding.hpp"

namespace rainfree {
namespace {

enum Stream : std::uint64_t {
  kRainyIndex = 1,
  kCleanIndex = 2,
  kRainyCrop = 3,
  kCleanCrop = 4,
  kCorpusScene = 100,
  kCorpusRain = 200,
};

float sample_bilinear_zero(const std::vector<float>& plane, int h, int w, double y, double x) {
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  auto at = [&](int yy, int xx) -> double {
    if (yy < 0 || yy >= h || xx < 0 || xx >= w) return 0.0;
    return plane[static_cast<std::size_t>(yy) * w + xx];
  };
  return static_cast<float>((1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) +
                            fy * ((1 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1)));
}

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

ImageTensor crop(const ImageTensor& img, int y0, int x0, int size) {
  Tensor out({1, 3, size, size});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < size; ++y) {
      const float* src = img.plane(0, c) + static_cast<std::size_t>(y0 + y) * img.w() + x0;
      std::copy_n(src, size, out.plane(0, c) + static_cast<std::size_t>(y) * size);
    }
  }
  return out;
}

// Upscale so the shorter side reaches `size`; larger images are left alone.
ImageTensor fit_min_side(const ImageTensor& img, int size) {
  if (img.h() >= size && img.w() >= size) return img;
  const double scale = static_cast<double>(size) / std::min(img.h(), img.w());
  const int h = std::max(size, static_cast<int>(std::ceil(img.h() * scale)));
  const int w = std::max(size, static_cast<int>(std::ceil(img.w() * scale)));
  return resize_bilinear(img, h, w);
}

}  // namespace

void SyntheticRainSpec::validate() const {
  if (!(angle_deg >= -45.0 && angle_deg <= 45.0)) {
    throw std::invalid_argument("rain angle must lie in [-45, 45] degrees");
  }
  if (streak_length_px < 1) throw std::invalid_argument("streak length must be positive");
  if (!(density >= 0.0 && density <= 1.0)) throw std::invalid_argument("density must lie in [0, 1]");
  if (!(intensity > 0.0 && intensity <= 1.0)) {
    throw std::invalid_argument("intensity must lie in (0, 1]");
  }
}

RainySample synthesize_rain(const ImageTensor& clean, const SyntheticRainSpec& spec) {
  spec.validate();
  require_image(clean, "synthesize_rain");
  const int h = clean.h();
  const int w = clean.w();
  const std::size_t plane = clean.shape().plane();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double theta = spec.angle_deg * std::numbers::pi / 180.0;
  const double dx = std::sin(theta);
  const double dy = std::cos(theta);
  const double half = 0.5 * (spec.streak_length_px - 1);

  StreakField streaks(clean.shape());
  std::vector<float> salt(plane);
  std::vector<float> smeared(plane);
  for (int n = 0; n < clean.n(); ++n) {
    for (auto& s : salt) {
      const double u = unit(rng);
      const double v = unit(rng);
      s = u < spec.density ? static_cast<float>(0.5 + 0.5 * v) : 0.0F;
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int t = 0; t < spec.streak_length_px; ++t) {
          const double o = t - half;
          acc += sample_bilinear_zero(salt, h, w, y - o * dy, x - o * dx);
        }
        smeared[static_cast<std::size_t>(y) * w + x] =
            static_cast<float>(spec.intensity * std::min(acc, 1.0));
      }
    }
    for (int c = 0; c < 3; ++c) std::copy(smeared.begin(), smeared.end(), streaks.plane(n, c));
  }

  ImageTensor rainy(clean.shape());
  for (std::size_t i = 0; i < rainy.size(); ++i) {
    rainy[i] = std::clamp(clean[i] + streaks[i], 0.0F, 1.0F);
  }
  return {std::move(rainy), std::move(streaks)};
}

ImageTensor generate_clean_scene(int size, std::uint64_t seed) {
  if (size < kMinPipelineSide) throw std::invalid_argument("scene size too small");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto color = [&](double lo, double hi) {
    return std::array<double, 3>{lo + (hi - lo) * unit(rng), lo + (hi - lo) * unit(rng),
                                 lo + (hi - lo) * unit(rng)};
  };

  ImageTensor img = make_image(size, size);
  const auto c0 = color(0.15, 0.7);
  const auto c1 = color(0.15, 0.7);
  const double dir = 2.0 * std::numbers::pi * unit(rng);
  const double gx = std::cos(dir);
  const double gy = std::sin(dir);
  // Low-frequency ripple texture.
  const double fx = 2.0 * std::numbers::pi * (0.5 + 2.0 * unit(rng)) / size;
  const double fy = 2.0 * std::numbers::pi * (0.5 + 2.0 * unit(rng)) / size;
  const double phase = 2.0 * std::numbers::pi * unit(rng);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double t = std::clamp(0.5 + ((x - size / 2.0) * gx + (y - size / 2.0) * gy) / size,
                                  0.0, 1.0);
      const double ripple = 0.04 * std::sin(fx * x + fy * y + phase);
      for (int c = 0; c < 3; ++c) {
        img.at(0, c, y, x) = static_cast<float>((1 - t) * c0[c] + t * c1[c] + ripple);
      }
    }
  }

  const int shapes = 3 + static_cast<int>(unit(rng) * 4);
  for (int s = 0; s < shapes; ++s) {
    const auto col = color(0.05, 0.8);
    const bool ellipse = unit(rng) < 0.5;
    const double cx = size * unit(rng);
    const double cy = size * unit(rng);
    const double rx = size * (0.08 + 0.25 * unit(rng));
    const double ry = size * (0.08 + 0.25 * unit(rng));
    const double alpha = 0.6 + 0.4 * unit(rng);
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        double inside = 0.0;
        if (ellipse) {
          const double d = std::hypot((x - cx) / rx, (y - cy) / ry);
          inside = 1.0 - smoothstep(1.0 - 1.0 / std::min(rx, ry), 1.0, d);
        } else {
          const double ex = std::abs(x - cx) - rx;
          const double ey = std::abs(y - cy) - ry;
          inside = 1.0 - smoothstep(-0.5, 0.5, std::max(ex, ey));
        }
        const double a = alpha * inside;
        if (a <= 0.0) continue;
        for (int c = 0; c < 3; ++c) {
          float& v = img.at(0, c, y, x);
          v = static_cast<float>((1 - a) * v + a * col[c]);
        }
      }
    }
  }
  img = gaussian_blur(img, 0.6);
  for (float& v : img.data()) v = std::clamp(v, 0.05F, 0.85F);
  return img;
}

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

std::vector<fs::path> read_manifest(const fs::path& list_file) {
  std::ifstream in(list_file);
  if (!in) throw std::runtime_error("cannot read manifest " + list_file.string());
  std::vector<fs::path> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.push_back(list_file.parent_path() / line.substr(first, last - first + 1));
  }
  return out;
}

void write_manifest(const fs::path& list_file, const std::vector<std::string>& entries) {
  std::ofstream out(list_file);
  if (!out) throw std::runtime_error("cannot write manifest " + list_file.string());
  for (const auto& e : entries) out << e << '\n';
  if (!out) throw std::runtime_error("failed writing manifest " + list_file.string());
}

UnpairedDataset UnpairedDataset::from_root(const fs::path& root, Split split, std::uint64_t seed) {
  const fs::path base = root / (split == Split::kTrain ? "train" : "test");
  auto collect = [&](const char* domain) {
    const fs::path list = base / (std::string(domain) + ".list");
    return fs::exists(list) ? read_manifest(list) : list_images(base / domain);
  };
  UnpairedDataset ds;
  ds.rainy_paths = collect("rainy");
  ds.clean_paths = collect("clean");
  ds.split = split;
  ds.seed = seed;
  ds.validate();
  return ds;
}

void UnpairedDataset::validate() const {
  if (rainy_paths.empty() || clean_paths.empty()) {
    throw std::invalid_argument("unpaired dataset needs at least one rainy and one clean image");
  }
}

ImageTensor resize_bilinear(const ImageTensor& img, int height, int width) {
  require_image(img, "resize_bilinear");
  if (height < 1 || width < 1) throw std::invalid_argument("resize target must be positive");
  Tensor out({img.n(), 3, height, width});
  const double sy = static_cast<double>(img.h()) / height;
  const double sx = static_cast<double>(img.w()) / width;
  for (int n = 0; n < img.n(); ++n) {
    for (int c = 0; c < 3; ++c) {
      const float* src = img.plane(n, c);
      for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.h() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.h() - 1);
        const double ty = fy - y0;
        for (int x = 0; x < width; ++x) {
          const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.w() - 1.0);
          const int x0 = static_cast<int>(fx);
          const int x1 = std::min(x0 + 1, img.w() - 1);
          const double tx = fx - x0;
          const double top = (1 - tx) * src[y0 * img.w() + x0] + tx * src[y0 * img.w() + x1];
          const double bot = (1 - tx) * src[y1 * img.w() + x0] + tx * src[y1 * img.w() + x1];
          out.at(n, c, y, x) = static_cast<float>((1 - ty) * top + ty * bot);
        }
      }
    }
  }
  return out;
}

struct UnpairedSampler::Domain {
  std::vector<fs::path> paths;
  std::mutex mu;
  std::vector<std::optional<ImageTensor>> cache;
  std::vector<bool> bad;

  explicit Domain(std::vector<fs::path> p)
      : paths(std::move(p)), cache(paths.size()), bad(paths.size(), false) {}
};

UnpairedSampler::UnpairedSampler(UnpairedDataset ds, SamplerOptions opts)
    : ds_(std::move(ds)),
      opts_(opts),
      rainy_(std::make_shared<Domain>(ds_.rainy_paths)),
      clean_(std::make_shared<Domain>(ds_.clean_paths)),
      negatives_(opts.lum_gamma, opts.negative_policy) {
  ds_.validate();
  if (opts_.batch < 1) throw std::invalid_argument("batch must be >= 1");
  if (opts_.train_size < kMinPipelineSide) {
    throw std::invalid_argument("train size must be >= " + std::to_string(kMinPipelineSide));
  }
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> UnpairedSampler::draw_indices(
    std::int64_t step) const {
  auto draw = [&](std::uint64_t stream, std::size_t count) {
    std::mt19937_64 rng(derive_seed(ds_.seed, stream, static_cast<std::uint64_t>(step)));
    std::uniform_int_distribution<std::size_t> pick(0, count - 1);
    std::vector<std::size_t> idx(static_cast<std::size_t>(opts_.batch));
    for (auto& i : idx) i = pick(rng);
    return idx;
  };
  return {draw(kRainyIndex, ds_.rainy_paths.size()), draw(kCleanIndex, ds_.clean_paths.size())};
}

std::optional<ImageTensor> UnpairedSampler::load(Domain& d, std::size_t index) const {
  {
    std::lock_guard lock(d.mu);
    if (d.bad[index]) return std::nullopt;
    if (d.cache[index]) return d.cache[index];
  }
  std::string last_error;
  for (int attempt = 0; attempt < opts_.max_read_attempts; ++attempt) {
    try {
      ImageTensor img = fit_min_side(read_png(d.paths[index]), opts_.train_size);
      std::lock_guard lock(d.mu);
      d.cache[index] = img;
      return img;
    } catch (const std::exception& e) {
      last_error = e.what();
    }
  }
  std::cerr << "warning: skipping unreadable image " << d.paths[index] << " after "
            << opts_.max_read_attempts << " attempts: " << last_error << '\n';
  std::lock_guard lock(d.mu);
  d.bad[index] = true;
  return std::nullopt;
}

ImageTensor UnpairedSampler::fetch(Domain& d, std::uint64_t stream, std::int64_t step,
                                   std::size_t slot, std::size_t& index) const {
  // Same stream as draw_indices; skip `slot` draws to land on this batch slot.
  std::mt19937_64 rng(derive_seed(ds_.seed, stream, static_cast<std::uint64_t>(step)));
  std::uniform_int_distribution<std::size_t> pick(0, d.paths.size() - 1);
  for (std::size_t s = 0; s < slot; ++s) (void)pick(rng);
  index = pick(rng);
  // Redraws continue the stream past the batch, keeping the result deterministic.
  for (std::size_t s = slot + 1; s < static_cast<std::size_t>(opts_.batch); ++s) (void)pick(rng);
  for (std::size_t attempt = 0; attempt < 8 * d.paths.size() + 8; ++attempt) {
    if (auto img = load(d, index)) return *img;
    {
      std::lock_guard lock(d.mu);
      if (std::all_of(d.bad.begin(), d.bad.end(), [](bool b) { return b; })) break;
    }
    index = pick(rng);
  }
  throw std::runtime_error("no readable images left in domain (first: " + d.paths.front().string() +
                           ")");
}

TrainBatch UnpairedSampler::sample(std::int64_t step) const {
  const int size = opts_.train_size;
  std::vector<Tensor> rainy;
  std::vector<Tensor> clean;
  std::vector<Tensor> enhanced;
  TrainBatch b;
  b.step = step;
  auto crop_random = [&](const ImageTensor& img, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> oy(0, img.h() - size);
    std::uniform_int_distribution<int> ox(0, img.w() - size);
    const int y0 = oy(rng);
    const int x0 = ox(rng);
    return std::pair{y0, x0};
  };
  std::mt19937_64 rainy_crop(derive_seed(ds_.seed, kRainyCrop, static_cast<std::uint64_t>(step)));
  std::mt19937_64 clean_crop(derive_seed(ds_.seed, kCleanCrop, static_cast<std::uint64_t>(step)));
  for (std::size_t slot = 0; slot < static_cast<std::size_t>(opts_.batch); ++slot) {
    std::size_t ri = 0;
    const ImageTensor r = fetch(*rainy_, kRainyIndex, step, slot, ri);
    auto [ry, rx] = crop_random(r, rainy_crop);
    rainy.push_back(crop(r, ry, rx, size));
    b.rainy_index.push_back(ri);

    std::size_t ci = 0;
    const ImageTensor c = fetch(*clean_, kCleanIndex, step, slot, ci);
    auto [cy, cx] = crop_random(c, clean_crop);
    ImageTensor c_crop = crop(c, cy, cx, size);
    if (negatives_.policy() == CachePolicy::kPrecomputed) {
      enhanced.push_back(crop(negatives_.negative(ci, c), cy, cx, size));
    } else {
      enhanced.push_back(negatives_.negative(ci, c_crop));
    }
    clean.push_back(std::move(c_crop));
    b.clean_index.push_back(ci);
  }
  b.rainy = stack(rainy);
  b.clean = stack(clean);
  b.enhanced = stack(enhanced);
  return b;
}

std::vector<PairedEntry> list_paired_entries(const fs::path& root) {
  const auto rainy = list_images(root / "rainy");
  const auto gt = list_images(root / "gt");
  std::map<std::string, fs::path> rainy_by_stem;
  std::map<std::string, fs::path> gt_by_stem;
  for (const auto& p : rainy) rainy_by_stem[p.stem().string()] = p;
  for (const auto& p : gt) gt_by_stem[p.stem().string()] = p;

  std::vector<std::string> missing;
  for (const auto& [stem, _] : rainy_by_stem) {
    if (!gt_by_stem.contains(stem)) missing.push_back("gt/" + stem);
  }
  for (const auto& [stem, _] : gt_by_stem) {
    if (!rainy_by_stem.contains(stem)) missing.push_back("rainy/" + stem);
  }
  if (!missing.empty()) {
    std::ostringstream os;
    os << "paired test set " << root << " is missing counterparts:";
    for (const auto& m : missing) os << ' ' << m;
    throw std::runtime_error(os.str());
  }
  std::vector<PairedEntry> out;
  for (const auto& [stem, path] : rainy_by_stem) out.push_back({stem, path, gt_by_stem.at(stem)});
  return out;
}

std::vector<PairedSample> load_paired_testset(const fs::path& root) {
  std::vector<PairedSample> out;
  for (const auto& [stem, rainy_path, gt_path] : list_paired_entries(root)) {
    PairedSample s{stem, read_png(rainy_path), read_png(gt_path)};
    if (s.rainy.shape() != s.gt.shape()) {
      throw std::runtime_error("pair '" + stem + "' has mismatched shapes " + s.rainy.shape().str() +
                               " vs " + s.gt.shape().str());
    }
    out.push_back(std::move(s));
  }
  return out;
}

CorpusSummary build_synthetic_corpus(const fs::path& root, const CorpusSpec& spec) {
  if (spec.num_clean < 3 || spec.test_every < 2) {
    throw std::invalid_argument("corpus needs >= 3 scenes and test_every >= 2");
  }
  spec.rain.validate();
  for (const char* sub : {"train/rainy", "train/clean", "test/rainy", "test/gt"}) {
    fs::create_directories(root / sub);
  }
  std::vector<std::string> train_rainy;
  std::vector<std::string> train_clean;
  std::vector<std::string> test_rainy;
  std::vector<std::string> test_gt;
  std::mt19937_64 jitter(derive_seed(spec.seed, kCorpusRain, 0xFFFF));
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < spec.num_clean; ++i) {
    char stem[16];
    std::snprintf(stem, sizeof(stem), "%04d", i);
    const std::string file = std::string(stem) + ".png";
    const ImageTensor scene =
        generate_clean_scene(spec.size, derive_seed(spec.seed, kCorpusScene, static_cast<std::uint64_t>(i)));
    SyntheticRainSpec rain = spec.rain;
    rain.seed = derive_seed(spec.seed, kCorpusRain, static_cast<std::uint64_t>(i));
    rain.angle_deg = std::clamp(spec.rain.angle_deg + spec.angle_jitter_deg * unit(jitter), -45.0, 45.0);

    if (i % spec.test_every == spec.test_every - 1) {
      write_png(root / "test/rainy" / file, synthesize_rain(scene, rain).rainy);
      write_png(root / "test/gt" / file, scene);
      test_rainy.push_back("rainy/" + file);
      test_gt.push_back("gt/" + file);
    } else {
      write_png(root / "train/rainy" / file, synthesize_rain(scene, rain).rainy);
      train_rainy.push_back("rainy/" + file);
      write_png(root / "train/clean" / file, scene);
      train_clean.push_back("clean/" + file);
    }
  }
  write_manifest(root / "train/rainy.list", train_rainy);
  write_manifest(root / "train/clean.list", train_clean);
  write_manifest(root / "test/rainy.list", test_rainy);
  write_manifest(root / "test/gt.list", test_gt);
  return {static_cast<int>(train_rainy.size()), static_cast<int>(train_clean.size()),
          static_cast<int>(test_rainy.size())};
}

}  // namespace rainfree
