#include "rainfree/trainer.hpp"

#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <deque>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include "rainfree/checkpoint.hpp"
#include "rainfree/ops.hpp"
#include "rainfree/png_io.hpp"
#include "rainfree/seeding.hpp"

namespace rainfree {
namespace {

constexpr std::uint64_t kAugmentStream = 3;

[[noreturn]] void abort_step(std::int64_t iter, const std::string& component, const LossBundle& l) {
  throw TrainingAborted(iter, component,
                        "training aborted at iteration " + std::to_string(iter) +
                            ": non-finite " + component + " (" + l.str() + ")");
}

// Loss evaluation that rejects non-finite inputs becomes an abort naming the component.
template <class F>
ag::Var guarded(std::int64_t iter, const char* component, const LossBundle& l, const F& make) {
  try {
    return make();
  } catch (const std::domain_error&) {
    abort_step(iter, component, l);
  }
}

SamplerOptions sampler_options(const TrainConfig& cfg) {
  SamplerOptions o;
  o.train_size = cfg.train_size;
  o.batch = cfg.batch;
  o.lum_gamma = cfg.lum_gamma;
  o.negative_policy = cfg.negative_cache;
  return o;
}

UnpairedDataset reseeded(UnpairedDataset ds, const TrainConfig& cfg) {
  ds.seed = cfg.data_seed();
  return ds;
}

std::string iter_dir_name(std::int64_t iter) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "iter_%07lld", static_cast<long long>(iter));
  return buf;
}

void write_csv_row(std::ostream& os, std::int64_t iter, const LossBundle& l) {
  os << iter << ',' << l.guid_r << ',' << l.guid_b << ',' << l.lum_adv_g << ',' << l.cyc << ','
     << l.total_g << ',' << l.d_c << ',' << l.d_s << '\n';
}

// Keeps the header and rows of iterations before `start`; used when resuming.
void truncate_log(const std::filesystem::path& path, std::int64_t start) {
  std::ifstream in(path);
  std::vector<std::string> keep;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("iteration", 0) == 0) continue;
    try {
      if (std::stoll(line.substr(0, line.find(','))) < start) keep.push_back(line);
    } catch (const std::exception&) {
    }
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  out << kLossCsvHeader << '\n';
  for (const auto& l : keep) out << l << '\n';
}

// Bounded single-producer queue of ready batches.
class Prefetcher {
 public:
  Prefetcher(const UnpairedSampler& sampler, std::int64_t begin, std::int64_t end, std::size_t depth)
      : depth_(std::max<std::size_t>(1, depth)),
        worker_([this, &sampler, begin, end](std::stop_token st) {
          for (std::int64_t k = begin; k < end && !st.stop_requested(); ++k) {
            std::optional<TrainBatch> b;
            std::exception_ptr err;
            try {
              b = sampler.sample(k);
            } catch (...) {
              err = std::current_exception();
            }
            std::unique_lock lock(mu_);
            cv_.wait(lock, [&] { return queue_.size() < depth_ || st.stop_requested(); });
            if (st.stop_requested()) return;
            if (err) {
              error_ = err;
              cv_.notify_all();
              return;
            }
            queue_.push_back(std::move(*b));
            cv_.notify_all();
          }
        }) {}

  ~Prefetcher() {
    worker_.request_stop();
    cv_.notify_all();
  }

  TrainBatch next() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !queue_.empty() || error_; });
    if (queue_.empty()) std::rethrow_exception(error_);
    TrainBatch b = std::move(queue_.front());
    queue_.pop_front();
    cv_.notify_all();
    return b;
  }

 private:
  std::size_t depth_;
  std::mutex mu_;
  std::condition_variable_any cv_;
  std::deque<TrainBatch> queue_;
  std::exception_ptr error_;
  std::jthread worker_;  // last: joins before the members above are destroyed
};

}  // namespace

Optimizers::Optimizers(ModelBundle& m, const TrainConfig& cfg)
    : g_c(m.g_c, cfg.beta1, cfg.beta2),
      g_r(m.g_r, cfg.beta1, cfg.beta2),
      d_c(m.d_c, cfg.beta1, cfg.beta2),
      d_s(m.d_s, cfg.beta1, cfg.beta2) {}

LossBundle train_step(ModelBundle& m, Optimizers& opt, const TrainBatch& batch, const TrainConfig& cfg,
                      double lr) {
  require_same_shape(batch.rainy, batch.clean, "train_step rainy/clean");
  require_same_shape(batch.clean, batch.enhanced, "train_step clean/enhanced");
  const LossWeights w = cfg.effective_weights();
  LossBundle out;
  std::mt19937_64 aug_rng(derive_seed(cfg.seed, kAugmentStream, static_cast<std::uint64_t>(batch.step)));
  // What a discriminator sees: a randomly shifted, possibly mirrored copy.
  auto seen = [&](const ag::Var& x) {
    if (cfg.disc_shift == 0) return x;
    std::uniform_int_distribution<int> shift(-cfg.disc_shift, cfg.disc_shift);
    const int dy = shift(aug_rng);
    const int dx = shift(aug_rng);
    return ag::shift_flip(x, dy, dx, (aug_rng() & 1U) != 0);
  };

  // (1) generator forward.
  m.g_c.set_requires_grad(true);
  m.g_r.set_requires_grad(true);
  const ag::Var r = ag::constant(batch.rainy);
  const ag::Var c = ag::constant(batch.clean);
  const ag::Var derained = m.g_c.forward(r);
  const ag::Var streaks = ag::sub(r, derained);
  const ag::Var fake_rainy = ag::clamp01_straight_through(ag::add(streaks, c));
  const ag::Var rerained = m.g_r.forward(derained);

  // (2) clean discriminator on (c, e, detached derained).
  if (!cfg.no_lum) {
    m.d_c.set_requires_grad(true);
    opt.d_c.zero_grad();
    const ag::Var fake = ag::detach(derained);
    const ag::Var loss = guarded(batch.step, "d_c", out, [&] {
      return cfg.lum_negatives
                 ? ag::lum_disc_loss(m.d_c.forward(seen(c)),
                                     m.d_c.forward(seen(ag::constant(batch.enhanced))),
                                     m.d_c.forward(seen(fake)))
                 : ag::plain_disc_loss(m.d_c.forward(seen(c)), m.d_c.forward(seen(fake)));
    });
    out.d_c = loss.value().item();
    if (!std::isfinite(out.d_c)) abort_step(batch.step, "d_c", out);
    ag::backward(loss);
    opt.d_c.step(lr);
  }

  // (3) rain discriminator on (r, detached fake rainy).
  if (!cfg.no_rgm) {
    m.d_s.set_requires_grad(true);
    opt.d_s.zero_grad();
    const ag::Var loss = guarded(batch.step, "d_s", out, [&] {
      return ag::rain_disc_loss(m.d_s.forward(seen(r)), m.d_s.forward(seen(ag::detach(fake_rainy))));
    });
    out.d_s = loss.value().item();
    if (!std::isfinite(out.d_s)) abort_step(batch.step, "d_s", out);
    ag::backward(loss);
    opt.d_s.step(lr);
  }

  // (4) joint generator update through the current, frozen discriminators.
  m.d_c.set_requires_grad(false);
  m.d_s.set_requires_grad(false);
  std::vector<ag::Var> terms;
  std::vector<double> weights;
  auto term = [&](double weight, const char* name, const auto& make, double& slot) {
    const ag::Var v = guarded(batch.step, name, out, make);
    slot = v.value().item();
    terms.push_back(v);
    weights.push_back(weight);
  };
  if (w.w1 != 0.0) {
    term(w.w1, "guid_r", [&] { return ag::rain_gen_loss(m.d_s.forward(seen(fake_rainy))); }, out.guid_r);
  }
  if (w.w2 != 0.0) {
    term(w.w2, "guid_b", [&] { return ag::background_guidance(r, derained, cfg.blur_scales); },
         out.guid_b);
  }
  if (w.w3 != 0.0) {
    term(w.w3, "lum_adv_g", [&] { return ag::lum_gen_loss(m.d_c.forward(seen(derained))); }, out.lum_adv_g);
  }
  if (w.w4 != 0.0) term(w.w4, "cyc", [&] { return ag::mean_abs_diff(rerained, r); }, out.cyc);

  try {
    out.total_g = total_generator_loss({out.guid_r, out.guid_b, out.lum_adv_g, out.cyc}, w);
  } catch (const std::domain_error& e) {
    std::string what = e.what();
    abort_step(batch.step, what.substr(what.rfind(' ') + 1), out);
  }
  m.d_c.set_requires_grad(true);
  m.d_s.set_requires_grad(true);
  opt.g_c.zero_grad();
  opt.g_r.zero_grad();
  if (!terms.empty()) {
    ag::backward(ag::weighted_sum(terms, weights));
    opt.g_c.step(lr);
    opt.g_r.step(lr);
  }
  return out;
}

ImageTensor sample_grid(ModelBundle& m, const TrainBatch& batch) {
  const ImageTensor r = batch.rainy.sample(0);
  const ImageTensor derained = m.g_c.infer(r);
  const ImageTensor rerained = m.g_r.infer(derained);
  const ImageTensor c = batch.clean.sample(0);
  const ImageTensor* panels[] = {&r, &derained, &rerained, &c};
  const int h = r.h();
  const int w = r.w();
  ImageTensor grid = make_image(h, 4 * w);
  for (int p = 0; p < 4; ++p) {
    for (int ch = 0; ch < 3; ++ch) {
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) grid.at(0, ch, y, p * w + x) = panels[p]->at(0, ch, y, x);
      }
    }
  }
  return grid;
}

Trainer::Trainer(TrainConfig cfg, UnpairedDataset dataset)
    : cfg_((cfg.validate(), std::move(cfg))),
      sampler_(reseeded(std::move(dataset), cfg_), sampler_options(cfg_)),
      models_(std::make_unique<ModelBundle>(cfg_.effective_network(), cfg_.init_seed())),
      opt_(std::make_unique<Optimizers>(*models_, cfg_)) {}

void Trainer::resume(const std::filesystem::path& dir) {
  const CheckpointMeta meta = read_meta(dir / "meta.txt");
  if (meta.config_hash != cfg_.hash()) {
    throw std::runtime_error("checkpoint " + dir.string() +
                             " was written with a different training configuration");
  }
  if (meta.iteration > cfg_.total_iters) {
    throw std::runtime_error("checkpoint iteration exceeds total_iters");
  }
  load_module(dir / "g_c.bin", models_->g_c);
  load_module(dir / "g_r.bin", models_->g_r);
  load_module(dir / "d_c.bin", models_->d_c);
  load_module(dir / "d_s.bin", models_->d_s);
  opt_->g_c.set_state(load_adam(dir / "adam_g_c.bin"));
  opt_->g_r.set_state(load_adam(dir / "adam_g_r.bin"));
  opt_->d_c.set_state(load_adam(dir / "adam_d_c.bin"));
  opt_->d_s.set_state(load_adam(dir / "adam_d_s.bin"));
  iteration_ = meta.iteration;
}

LossBundle Trainer::step() {
  const TrainBatch b = sampler_.sample(iteration_);
  const LossBundle l = train_step(*models_, *opt_, b, cfg_, lr_schedule(iteration_, cfg_));
  ++iteration_;
  return l;
}

std::filesystem::path Trainer::save_checkpoint(const std::filesystem::path& out_dir) const {
  const auto root = out_dir / "checkpoints";
  const auto dir = root / iter_dir_name(iteration_);
  std::filesystem::create_directories(dir);
  save_module(dir / "g_c.bin", models_->g_c);
  save_module(dir / "g_r.bin", models_->g_r);
  save_module(dir / "d_c.bin", models_->d_c);
  save_module(dir / "d_s.bin", models_->d_s);
  save_adam(dir / "adam_g_c.bin", opt_->g_c.state());
  save_adam(dir / "adam_g_r.bin", opt_->g_r.state());
  save_adam(dir / "adam_d_c.bin", opt_->d_c.state());
  save_adam(dir / "adam_d_s.bin", opt_->d_s.state());
  {
    std::ofstream os(dir / "config.txt");
    os << dump_config(cfg_);
  }
  // Written last: a directory without meta.txt is an incomplete checkpoint.
  write_meta(dir / "meta.txt",
             {models_->arch_version, models_->config, iteration_, cfg_.seed, cfg_.hash()});
  std::ofstream latest(root / "latest", std::ios::trunc);
  latest << dir.filename().string() << '\n';
  if (!latest) throw std::runtime_error("failed updating " + (root / "latest").string());
  return dir;
}

TrainResult Trainer::run(const std::filesystem::path& out_dir,
                         const std::function<void(std::int64_t, const LossBundle&)>& on_step) {
  std::filesystem::create_directories(out_dir);
  const auto log_path = out_dir / "losses.csv";
  if (iteration_ > 0 && std::filesystem::exists(log_path)) {
    truncate_log(log_path, iteration_);
  } else {
    std::ofstream(log_path, std::ios::trunc) << kLossCsvHeader << '\n';
  }
  std::ofstream log(log_path, std::ios::app);
  if (!log) throw std::runtime_error("cannot write " + log_path.string());
  log << std::setprecision(9);

  TrainResult result;
  std::int64_t last_saved = -1;
  auto checkpoint = [&] {
    log.flush();
    result.final_checkpoint = save_checkpoint(out_dir);
    last_saved = iteration_;
  };

  const std::int64_t total = cfg_.total_iters;
  if (iteration_ >= total) {
    checkpoint();
    result.iterations = iteration_;
    return result;
  }
  std::optional<Prefetcher> prefetch;
  if (cfg_.prefetch > 0) {
    prefetch.emplace(sampler_, iteration_, total, static_cast<std::size_t>(cfg_.prefetch));
  }
  while (iteration_ < total) {
    const std::int64_t k = iteration_;
    const TrainBatch b = prefetch ? prefetch->next() : sampler_.sample(k);
    LossBundle l;
    try {
      l = train_step(*models_, *opt_, b, cfg_, lr_schedule(k, cfg_));
    } catch (...) {
      log.flush();
      throw;
    }
    ++iteration_;
    write_csv_row(log, k, l);
    result.losses.push_back(l);
    if (on_step) on_step(k, l);
    if (cfg_.sample_every > 0 && iteration_ % cfg_.sample_every == 0) {
      std::filesystem::create_directories(out_dir / "samples");
      write_png(out_dir / "samples" / (iter_dir_name(iteration_) + ".png"), sample_grid(*models_, b));
    }
    if (cfg_.checkpoint_every > 0 && iteration_ % cfg_.checkpoint_every == 0) checkpoint();
  }
  if (last_saved != iteration_) checkpoint();
  log.flush();
  result.iterations = iteration_;
  return result;
}

std::filesystem::path latest_checkpoint(const std::filesystem::path& out_dir) {
  const auto root = out_dir / "checkpoints";
  std::ifstream in(root / "latest");
  std::string name;
  if (!in || !std::getline(in, name) || name.empty()) {
    throw std::runtime_error("no checkpoint recorded under " + root.string());
  }
  return root / name;
}

}  // namespace rainfree
