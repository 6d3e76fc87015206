#include "rainfree/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "rainfree/blur_gradient.hpp"
#include "rainfree/png_io.hpp"

namespace rainfree {
namespace {

std::vector<double> ssim_window() {
  std::vector<double> k(kSsimWindow);
  const int r = kSsimWindow / 2;
  double z = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double x = i - r;
    k[static_cast<std::size_t>(i)] = std::exp(-x * x / (2.0 * kSsimSigma * kSsimSigma));
    z += k[static_cast<std::size_t>(i)];
  }
  for (double& v : k) v /= z;
  return k;
}

// Separable valid-mode filtering of one plane.
std::vector<double> filter_valid(const std::vector<double>& src, int h, int w,
                                 const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int oh = h - n + 1;
  const int ow = w - n + 1;
  std::vector<double> rows(static_cast<std::size_t>(h) * ow);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[static_cast<std::size_t>(i)] * src[static_cast<std::size_t>(y) * w + x + i];
      rows[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(oh) * ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += k[static_cast<std::size_t>(i)] * rows[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = acc;
    }
  }
  return out;
}

std::string fmt(double v, int prec) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

}  // namespace

double psnr(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "psnr");
  if (a.empty()) throw std::invalid_argument("psnr: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim(const ImageTensor& a, const ImageTensor& b) {
  require_same_shape(a, b, "ssim");
  if (a.h() < kSsimWindow || a.w() < kSsimWindow) {
    throw std::invalid_argument("ssim: image " + a.shape().str() + " smaller than the " +
                                std::to_string(kSsimWindow) + "x" + std::to_string(kSsimWindow) +
                                " window");
  }
  const auto k = ssim_window();
  const int h = a.h();
  const int w = a.w();
  const std::size_t plane = a.shape().plane();
  double total = 0.0;
  int planes = 0;
  std::vector<double> x(plane), y(plane), xx(plane), yy(plane), xy(plane);
  for (int n = 0; n < a.n(); ++n) {
    for (int c = 0; c < a.c(); ++c) {
      const float* pa = a.plane(n, c);
      const float* pb = b.plane(n, c);
      for (std::size_t i = 0; i < plane; ++i) {
        x[i] = pa[i];
        y[i] = pb[i];
        xx[i] = x[i] * x[i];
        yy[i] = y[i] * y[i];
        xy[i] = x[i] * y[i];
      }
      const auto mx = filter_valid(x, h, w, k);
      const auto my = filter_valid(y, h, w, k);
      const auto sxx = filter_valid(xx, h, w, k);
      const auto syy = filter_valid(yy, h, w, k);
      const auto sxy = filter_valid(xy, h, w, k);
      double acc = 0.0;
      for (std::size_t i = 0; i < mx.size(); ++i) {
        const double vx = sxx[i] - mx[i] * mx[i];
        const double vy = syy[i] - my[i] * my[i];
        const double cov = sxy[i] - mx[i] * my[i];
        acc += ((2 * mx[i] * my[i] + kSsimC1) * (2 * cov + kSsimC2)) /
               ((mx[i] * mx[i] + my[i] * my[i] + kSsimC1) * (vx + vy + kSsimC2));
      }
      total += acc / static_cast<double>(mx.size());
      ++planes;
    }
  }
  return total / planes;
}

int EvalReport::num_ok() const {
  int n = 0;
  for (const auto& e : per_image) n += e.ok() ? 1 : 0;
  return n;
}

int EvalReport::num_failed() const { return static_cast<int>(per_image.size()) - num_ok(); }

void EvalReport::recompute_means() {
  double p = 0.0;
  double s = 0.0;
  int n = 0;
  for (const auto& e : per_image) {
    if (!e.ok()) continue;
    p += e.psnr_db;
    s += e.ssim;
    ++n;
  }
  mean_psnr = n > 0 ? p / n : 0.0;
  mean_ssim = n > 0 ? s / n : 0.0;
}

void EvalReport::write_csv(std::ostream& os) const {
  os << "# model=" << model_tag << " metrics=psnr(peak 1, cap 100),ssim(rgb mean, 11x11 gauss 1.5)\n";
  os << "name,psnr_db,ssim,status\n";
  os << std::setprecision(10);
  for (const auto& e : per_image) {
    if (e.ok()) {
      os << e.name << ',' << e.psnr_db << ',' << e.ssim << ",ok\n";
    } else {
      std::string msg = *e.error;
      for (char& ch : msg) {
        if (ch == ',' || ch == '\n') ch = ' ';
      }
      os << e.name << ",,,failed: " << msg << '\n';
    }
  }
  os << "mean," << mean_psnr << ',' << mean_ssim << ',' << num_ok() << " ok\n";
}

void EvalReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  write_csv(out);
}

std::string EvalReport::table() const {
  std::ostringstream os;
  os << "model: " << model_tag << "  (SSIM on RGB channels, averaged)\n";
  os << std::left << std::setw(24) << "image" << std::right << std::setw(10) << "PSNR" << std::setw(10)
     << "SSIM" << '\n';
  for (const auto& e : per_image) {
    os << std::left << std::setw(24) << e.name << std::right;
    if (e.ok()) {
      os << std::setw(10) << fmt(e.psnr_db, 2) << std::setw(10) << fmt(e.ssim, 4) << '\n';
    } else {
      os << "  FAILED: " << *e.error << '\n';
    }
  }
  os << std::left << std::setw(24) << "mean" << std::right << std::setw(10) << fmt(mean_psnr, 2)
     << std::setw(10) << fmt(mean_ssim, 4) << "  (" << num_ok() << "/" << per_image.size()
     << " ok)\n";
  return os.str();
}

namespace {

EvalEntry score(const std::string& name, const DerainFn& fn, const ImageTensor& rainy,
                const ImageTensor& gt) {
  EvalEntry e;
  e.name = name;
  try {
    const ImageTensor out = fn(rainy);
    e.psnr_db = psnr(out, gt);
    e.ssim = ssim(out, gt);
  } catch (const std::exception& ex) {
    e.error = ex.what();
  }
  return e;
}

}  // namespace

EvalReport evaluate(const DerainFn& fn, const std::vector<PairedSample>& pairs,
                    std::string model_tag) {
  EvalReport r;
  r.model_tag = std::move(model_tag);
  for (const auto& p : pairs) r.per_image.push_back(score(p.name, fn, p.rainy, p.gt));
  r.recompute_means();
  return r;
}

EvalReport evaluate_dir(const DerainFn& fn, const std::filesystem::path& root,
                        std::string model_tag) {
  EvalReport r;
  r.model_tag = std::move(model_tag);
  for (const auto& [stem, rainy_path, gt_path] : list_paired_entries(root)) {
    EvalEntry e;
    e.name = stem;
    try {
      const ImageTensor rainy = read_png(rainy_path);
      const ImageTensor gt = read_png(gt_path);
      if (rainy.shape() != gt.shape()) {
        throw std::runtime_error("shape mismatch " + rainy.shape().str() + " vs " + gt.shape().str());
      }
      e = score(stem, fn, rainy, gt);
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    r.per_image.push_back(std::move(e));
  }
  r.recompute_means();
  return r;
}

}  // namespace rainfree
