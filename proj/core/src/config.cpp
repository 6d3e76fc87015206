#include "rainfree/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rainfree/seeding.hpp"

namespace rainfree {
namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError(key, "config key '" + key + "': expected a number, got '" + v + "'");
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key, "config key '" + key + "': expected an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key, "config key '" + key + "': expected an unsigned integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, std::string v) {
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(key, "config key '" + key + "': expected a boolean, got '" + v + "'");
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string boolean(bool b) { return b ? "true" : "false"; }

template <typename T>
ConfigKey real_key(std::string name, std::string help, T TrainConfig::*field) {
  return {name, std::move(help), false, true,
          [name, field](TrainConfig& c, const std::string& v) { c.*field = to_double(name, v); },
          [field](const TrainConfig& c) { return num(c.*field); }};
}

template <typename T>
ConfigKey int_key(std::string name, std::string help, T TrainConfig::*field, bool affects = true) {
  return {name, std::move(help), false, affects,
          [name, field](TrainConfig& c, const std::string& v) {
            c.*field = static_cast<T>(to_int(name, v));
          },
          [field](const TrainConfig& c) { return std::to_string(c.*field); }};
}

ConfigKey bool_key(std::string name, std::string help, bool TrainConfig::*field) {
  return {name, std::move(help), true, true,
          [name, field](TrainConfig& c, const std::string& v) { c.*field = to_bool(name, v); },
          [field](const TrainConfig& c) { return boolean(c.*field); }};
}

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> k;
  auto weight = [&](const char* name, const char* help, double LossWeights::*f) {
    k.push_back({name, help, false, true,
                 [n = std::string(name), f](TrainConfig& c, const std::string& v) {
                   c.weights.*f = to_double(n, v);
                 },
                 [f](const TrainConfig& c) { return num(c.weights.*f); }});
  };
  weight("w1", "rain guidance weight", &LossWeights::w1);
  weight("w2", "background guidance weight", &LossWeights::w2);
  weight("w3", "luminance adversarial weight", &LossWeights::w3);
  weight("w4", "cycle consistency weight", &LossWeights::w4);
  k.push_back(real_key("lr0", "initial learning rate", &TrainConfig::lr0));
  k.push_back(real_key("beta1", "Adam first-moment coefficient", &TrainConfig::beta1));
  k.push_back(real_key("beta2", "Adam second-moment coefficient", &TrainConfig::beta2));
  k.push_back(int_key("total_iters", "training iterations", &TrainConfig::total_iters));
  k.push_back(int_key("decay_start", "iteration where linear decay begins (-1: half)",
                      &TrainConfig::decay_start));
  k.push_back(int_key("batch", "mini-batch size", &TrainConfig::batch));
  k.push_back(int_key("train_size", "square crop side in pixels", &TrainConfig::train_size));
  k.push_back({"seed", "base seed for data sampling and initialization", false, true,
               [](TrainConfig& c, const std::string& v) { c.seed = to_uint("seed", v); },
               [](const TrainConfig& c) { return std::to_string(c.seed); }});
  k.push_back(bool_key("no_rgm", "drop rain guidance and skip the D_s update", &TrainConfig::no_rgm));
  k.push_back(bool_key("no_bgm", "drop background guidance", &TrainConfig::no_bgm));
  k.push_back(bool_key("no_lum", "drop the clean adversarial term and skip the D_c update",
                       &TrainConfig::no_lum));
  k.push_back(bool_key("lum_negatives", "show enhanced clean images to D_c as fakes",
                       &TrainConfig::lum_negatives));
  k.push_back(real_key("lum_gamma", "luminance enhancement exponent in (0, 1)", &TrainConfig::lum_gamma));
  k.push_back({"negative_cache", "on_the_fly or precomputed", false, true,
               [](TrainConfig& c, const std::string& v) {
                 if (v == "on_the_fly") {
                   c.negative_cache = CachePolicy::kOnTheFly;
                 } else if (v == "precomputed") {
                   c.negative_cache = CachePolicy::kPrecomputed;
                 } else {
                   throw ConfigError("negative_cache", "config key 'negative_cache': expected on_the_fly or precomputed, got '" + v + "'");
                 }
               },
               [](const TrainConfig& c) {
                 return std::string(c.negative_cache == CachePolicy::kOnTheFly ? "on_the_fly" : "precomputed");
               }});
  k.push_back({"blur_scales", "sigma:lambda list for background guidance", false, true,
               [](TrainConfig& c, const std::string& v) {
                 try {
                   c.blur_scales = GaussianScaleConfig::parse(v);
                 } catch (const std::invalid_argument& e) {
                   throw ConfigError("blur_scales", std::string("config key 'blur_scales': ") + e.what());
                 }
               },
               [](const TrainConfig& c) { return c.blur_scales.str(); }});
  k.push_back(int_key("disc_shift", "max random shift of discriminator inputs (0: off)",
                      &TrainConfig::disc_shift));
  auto net_int = [&](const char* name, const char* help, int NetworkConfig::*f) {
    k.push_back({name, help, false, true,
                 [n = std::string(name), f](TrainConfig& c, const std::string& v) {
                   c.network.*f = static_cast<int>(to_int(n, v));
                 },
                 [f](const TrainConfig& c) { return std::to_string(c.network.*f); }});
  };
  auto net_bool = [&](const char* name, const char* help, bool NetworkConfig::*f) {
    k.push_back({name, help, true, true,
                 [n = std::string(name), f](TrainConfig& c, const std::string& v) {
                   c.network.*f = to_bool(n, v);
                 },
                 [f](const TrainConfig& c) { return boolean(c.network.*f); }});
  };
  net_int("base_channels", "generator width", &NetworkConfig::base_channels);
  net_int("resblocks_gc", "residual blocks in G_c (0: by train_size)", &NetworkConfig::num_resblocks_gc);
  net_int("resblocks_gr", "residual blocks in G_r", &NetworkConfig::num_resblocks_gr);
  net_int("disc_layers", "stride-2 discriminator layers", &NetworkConfig::disc_layers);
  net_bool("instance_norm", "instance normalization in all networks", &NetworkConfig::instance_norm);
  net_bool("disc_norm", "instance normalization inside the discriminators", &NetworkConfig::disc_norm);
  net_bool("global_skip", "generators refine their input instead of synthesizing", &NetworkConfig::global_skip);
  k.push_back({"head_scale", "multiplier on the generator head pre-activation", false, true,
               [](TrainConfig& c, const std::string& v) {
                 c.network.head_scale = static_cast<float>(to_double("head_scale", v));
               },
               [](const TrainConfig& c) { return num(c.network.head_scale); }});
  k.push_back(int_key("checkpoint_every", "checkpoint interval in iterations (0: end only)",
                      &TrainConfig::checkpoint_every, false));
  k.push_back(int_key("sample_every", "sample grid interval in iterations (0: never)",
                      &TrainConfig::sample_every, false));
  k.push_back(int_key("prefetch", "ready batches buffered by the loader thread", &TrainConfig::prefetch,
                      false));
  k.push_back({"data_root", "dataset root with train/{rainy,clean}", false, false,
               [](TrainConfig& c, const std::string& v) { c.data_root = v; },
               [](const TrainConfig& c) { return c.data_root; }});
  k.push_back({"out_dir", "run directory for checkpoints, logs and samples", false, false,
               [](TrainConfig& c, const std::string& v) { c.out_dir = v; },
               [](const TrainConfig& c) { return c.out_dir; }});
  return k;
}

}  // namespace

std::int64_t TrainConfig::effective_decay_start() const {
  return decay_start < 0 ? total_iters / 2 : decay_start;
}

LossWeights TrainConfig::effective_weights() const {
  LossWeights w = weights;
  if (no_rgm) w.w1 = 0.0;
  if (no_bgm) w.w2 = 0.0;
  if (no_lum) w.w3 = 0.0;
  return w;
}

NetworkConfig TrainConfig::effective_network() const {
  NetworkConfig n = network;
  if (n.num_resblocks_gc == 0) n.num_resblocks_gc = NetworkConfig::defaults_for(train_size).num_resblocks_gc;
  return n;
}

std::uint64_t TrainConfig::data_seed() const { return derive_seed(seed, 1); }
std::uint64_t TrainConfig::init_seed() const { return derive_seed(seed, 2); }

void TrainConfig::validate() const {
  weights.validate();
  if (!(lr0 > 0.0)) throw ConfigError("lr0", "lr0 must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("beta1", "beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2", "beta2 must lie in [0, 1)");
  if (total_iters < 0) throw ConfigError("total_iters", "total_iters must be >= 0");
  if (decay_start > total_iters) throw ConfigError("decay_start", "decay_start must not exceed total_iters");
  if (batch < 1) throw ConfigError("batch", "batch must be >= 1");
  if (train_size < 16 || train_size % 16 != 0) {
    throw ConfigError("train_size", "train_size must be a positive multiple of 16");
  }
  if (!(lum_gamma > 0.0 && lum_gamma < 1.0)) throw ConfigError("lum_gamma", "lum_gamma must lie in (0, 1)");
  if (disc_shift < 0) throw ConfigError("disc_shift", "disc_shift must be >= 0");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every", "checkpoint_every must be >= 0");
  if (sample_every < 0) throw ConfigError("sample_every", "sample_every must be >= 0");
  if (prefetch < 0) throw ConfigError("prefetch", "prefetch must be >= 0");
  try {
    effective_network().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("network", e.what());
  }
}

std::uint64_t TrainConfig::hash() const {
  // FNV-1a over the canonical key = value text of trajectory-relevant keys.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& k : config_keys()) {
    if (!k.affects_training) continue;
    for (char ch : k.name + "=" + k.get(*this) + "\n") {
      h ^= static_cast<unsigned char>(ch);
      h *= 0x100000001b3ULL;
    }
  }
  return h;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

std::string flag_name(const std::string& key) {
  std::string f = key;
  std::replace(f.begin(), f.end(), '_', '-');
  return "--" + f;
}

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& k : config_keys()) {
    if (k.name == key) {
      k.set(cfg, value);
      return;
    }
  }
  throw ConfigError(key, "unknown config key '" + key + "'");
}

void apply_override(TrainConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(trim(assignment), "override '" + assignment + "' is not key=value");
  }
  set_config_value(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void load_config_file(TrainConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(line, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

std::string dump_config(const TrainConfig& cfg) {
  std::ostringstream os;
  for (const auto& k : config_keys()) os << k.name << " = " << k.get(cfg) << '\n';
  return os.str();
}

double lr_schedule(std::int64_t iter, const TrainConfig& cfg) {
  if (iter < 0 || iter >= cfg.total_iters) {
    throw std::out_of_range("lr_schedule: iteration " + std::to_string(iter) + " outside [0, " +
                            std::to_string(cfg.total_iters) + ")");
  }
  const std::int64_t start = cfg.effective_decay_start();
  if (iter <= start) return cfg.lr0;
  return cfg.lr0 * static_cast<double>(cfg.total_iters - iter) /
         static_cast<double>(cfg.total_iters - start);
}

}  // namespace rainfree
