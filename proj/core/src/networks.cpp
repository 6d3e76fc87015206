#include "rainfree/networks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "rainfree/seeding.hpp"

namespace rainfree {

NetworkConfig NetworkConfig::defaults_for(int image_size) {
  NetworkConfig cfg;
  cfg.num_resblocks_gc = image_size >= 256 ? 9 : 6;
  return cfg;
}

void NetworkConfig::validate() const {
  if (base_channels < 2 || num_resblocks_gc < 1 || num_resblocks_gr < 1 || disc_layers < 1) {
    throw std::invalid_argument(
        "NetworkConfig: base_channels >= 2 and positive block/layer counts required");
  }
  if (!(head_scale > 0.0F) || !std::isfinite(head_scale)) {
    throw std::invalid_argument("NetworkConfig: head_scale must be positive and finite");
  }
}

std::size_t Module::parameter_count() const {
  std::size_t total = 0;
  for (const auto& s : slots_) total += s.param.var.value().size();
  return total;
}

Tensor Module::infer(const Tensor& x) {
  std::vector<bool> saved;
  saved.reserve(slots_.size());
  for (auto& s : slots_) {
    saved.push_back(s.param.var.requires_grad());
    s.param.var.set_requires_grad(false);
  }
  Tensor out = forward(ag::constant(x)).value();
  for (std::size_t i = 0; i < slots_.size(); ++i) slots_[i].param.var.set_requires_grad(saved[i]);
  return out;
}

void Module::set_requires_grad(bool on) {
  for (auto& s : slots_) s.param.var.set_requires_grad(on);
}

void Module::zero_grad() {
  for (auto& s : slots_) s.param.var.zero_grad();
}

ag::Var Module::add_param(std::string name, Tensor init, ParamKind kind, int fan_in) {
  ag::Var v = ag::parameter(std::move(init));
  slots_.push_back({{std::move(name), v}, kind, fan_in});
  return v;
}

Generator::Generator(const NetworkConfig& cfg, GeneratorRole role)
    : role_(role), use_norm_(cfg.instance_norm), global_skip_(cfg.global_skip), head_scale_(cfg.head_scale) {
  cfg.validate();
  const bool derain = role == GeneratorRole::kDerain;
  const int base = derain ? cfg.base_channels : std::max(1, cfg.base_channels / 2);
  const int blocks = derain ? cfg.num_resblocks_gc : cfg.num_resblocks_gr;
  using ag::PadMode;

  stem_ = conv("stem", 3, base, 7, {1, 3, PadMode::kReflect});
  stem_norm_ = norm("stem.norm", base);
  int ch = base;
  for (int i = 0; i < 2; ++i) {
    const std::string name = "down" + std::to_string(i);
    down_.push_back(conv(name, ch, ch * 2, 3, {2, 1, PadMode::kZero}));
    down_norm_.push_back(norm(name + ".norm", ch * 2));
    ch *= 2;
  }
  for (int i = 0; i < blocks; ++i) {
    const std::string name = "res" + std::to_string(i);
    ResBlock b;
    b.a = conv(name + ".a", ch, ch, 3, {1, 1, PadMode::kReflect});
    b.an = norm(name + ".a.norm", ch);
    b.b = conv(name + ".b", ch, ch, 3, {1, 1, PadMode::kReflect});
    b.bn = norm(name + ".b.norm", ch);
    blocks_.push_back(std::move(b));
  }
  for (int i = 0; i < 2; ++i) {
    const std::string name = "up" + std::to_string(i);
    ConvTransposeLayer up;
    up.weight = add_param(name + ".weight", Tensor({ch, ch / 2, 3, 3}), ParamKind::kConvWeight,
                          ch * 9);
    up.bias = add_param(name + ".bias", Tensor({1, ch / 2, 1, 1}), ParamKind::kBias);
    up_.push_back(up);
    up_norm_.push_back(norm(name + ".norm", ch / 2));
    ch /= 2;
  }
  head_ = conv("head", ch, 3, 7, {1, 3, PadMode::kReflect});
}

ConvLayer Generator::conv(const std::string& name, int cin, int cout, int k, ag::ConvSpec spec) {
  ConvLayer l;
  l.weight = add_param(name + ".weight", Tensor({cout, cin, k, k}), ParamKind::kConvWeight,
                       cin * k * k);
  l.bias = add_param(name + ".bias", Tensor({1, cout, 1, 1}), ParamKind::kBias);
  l.spec = spec;
  return l;
}

NormLayer Generator::norm(const std::string& name, int channels) {
  if (!use_norm_) return {};
  return {add_param(name + ".gamma", Tensor({1, channels, 1, 1}, 1.0F), ParamKind::kNormScale),
          add_param(name + ".beta", Tensor({1, channels, 1, 1}), ParamKind::kNormShift)};
}

ag::Var Generator::norm_act(const ag::Var& x, const NormLayer& n, bool act) const {
  ag::Var y = n.gamma.defined() ? ag::instance_norm(x, n.gamma, n.beta) : x;
  return act ? ag::relu(y) : y;
}

ag::Var Generator::forward(const ag::Var& x) const {
  if (x.shape().c != 3 || x.shape().h % 4 != 0 || x.shape().w % 4 != 0) {
    throw std::invalid_argument("generator input must be N x 3 x H x W with H, W divisible by 4, got " +
                                x.shape().str());
  }
  ag::Var h = norm_act(ag::conv2d(x, stem_.weight, stem_.bias, stem_.spec), stem_norm_, true);
  for (std::size_t i = 0; i < down_.size(); ++i) {
    h = norm_act(ag::conv2d(h, down_[i].weight, down_[i].bias, down_[i].spec), down_norm_[i], true);
  }
  for (const auto& b : blocks_) {
    ag::Var r = norm_act(ag::conv2d(h, b.a.weight, b.a.bias, b.a.spec), b.an, true);
    r = norm_act(ag::conv2d(r, b.b.weight, b.b.bias, b.b.spec), b.bn, false);
    h = ag::add(h, r);
  }
  for (std::size_t i = 0; i < up_.size(); ++i) {
    h = norm_act(ag::conv_transpose2d(h, up_[i].weight, up_[i].bias, 2, 1, 1), up_norm_[i], true);
  }
  h = ag::conv2d(h, head_.weight, head_.bias, head_.spec);
  if (head_scale_ != 1.0F) h = ag::scale(h, head_scale_);
  return global_skip_ ? ag::tanh_residual(h, x) : ag::tanh_to_unit(h);
}

Discriminator::Discriminator(const NetworkConfig& cfg) {
  cfg.validate();
  int cin = 3;
  int cout = cfg.base_channels;
  for (int i = 0; i < cfg.disc_layers; ++i) {
    const bool last = i == cfg.disc_layers - 1;
    const int out = last ? 1 : cout;
    const std::string name = "layer" + std::to_string(i);
    ConvLayer l;
    l.weight = add_param(name + ".weight", Tensor({out, cin, 4, 4}), ParamKind::kConvWeight,
                         cin * 16);
    l.bias = add_param(name + ".bias", Tensor({1, out, 1, 1}), ParamKind::kBias);
    l.spec = {2, 1, ag::PadMode::kZero};
    layers_.push_back(l);
    NormLayer n;
    if (cfg.instance_norm && cfg.disc_norm && i > 0 && !last) {
      n.gamma = add_param(name + ".norm.gamma", Tensor({1, out, 1, 1}, 1.0F), ParamKind::kNormScale);
      n.beta = add_param(name + ".norm.beta", Tensor({1, out, 1, 1}), ParamKind::kNormShift);
    }
    norms_.push_back(n);
    cin = out;
    cout = std::min(cout * 2, cfg.base_channels * 8);
  }
}

ag::Var Discriminator::forward(const ag::Var& x) const {
  const int f = downsampling();
  if (x.shape().c != 3 || x.shape().h % f != 0 || x.shape().w % f != 0) {
    throw std::invalid_argument("discriminator input must be N x 3 x H x W with H, W divisible by " +
                                std::to_string(f) + ", got " + x.shape().str());
  }
  ag::Var h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = ag::conv2d(h, layers_[i].weight, layers_[i].bias, layers_[i].spec);
    if (i + 1 == layers_.size()) break;
    if (norms_[i].gamma.defined()) h = ag::instance_norm(h, norms_[i].gamma, norms_[i].beta);
    h = ag::leaky_relu(h, 0.2F);
  }
  return h;
}

Generator build_generator(const NetworkConfig& cfg, GeneratorRole role) {
  return Generator(cfg, role);
}

Discriminator build_discriminator(const NetworkConfig& cfg) { return Discriminator(cfg); }

void init_weights(Module& net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (auto& s : net.slots()) {
    Tensor& v = s.param.var.mutable_value();
    switch (s.kind) {
      case ParamKind::kConvWeight: {
        std::normal_distribution<float> dist(0.0F,
                                             static_cast<float>(std::sqrt(2.0 / s.fan_in)));
        for (float& w : v.data()) w = dist(rng);
        break;
      }
      case ParamKind::kNormScale:
        v.fill(1.0F);
        break;
      case ParamKind::kBias:
      case ParamKind::kNormShift:
        v.fill(0.0F);
        break;
    }
  }
}

ModelBundle::ModelBundle(const NetworkConfig& cfg, std::uint64_t init_seed)
    : config(cfg),
      g_c(cfg, GeneratorRole::kDerain),
      g_r(cfg, GeneratorRole::kRerain),
      d_c(cfg),
      d_s(cfg) {
  init_weights(g_c, derive_seed(init_seed, 0));
  init_weights(g_r, derive_seed(init_seed, 1));
  init_weights(d_c, derive_seed(init_seed, 2));
  init_weights(d_s, derive_seed(init_seed, 3));
}

}  // namespace rainfree
