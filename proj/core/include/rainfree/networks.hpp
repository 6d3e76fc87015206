#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rainfree/autograd.hpp"
#include "rainfree/ops.hpp"

namespace rainfree {

inline constexpr const char* kArchVersion = "resnet-patch-v2";

struct NetworkConfig {
  int base_channels = 64;
  int num_resblocks_gc = 9;
  int num_resblocks_gr = 2;
  int disc_layers = 4;
  bool instance_norm = true;
  // Instance normalization inside the discriminators; off leaves them sensitive to global colour.
  bool disc_norm = false;
  // Heads predict a residual: output = clamp01(input + tanh(head_scale * h)).
  bool global_skip = true;
  // Fixed multiplier on the head pre-activation; small values start near the skip image.
  float head_scale = 0.1F;

  // Nine residual blocks from 256 px upward, six below.
  static NetworkConfig defaults_for(int image_size);
  void validate() const;
};

enum class GeneratorRole { kDerain, kRerain };
enum class ParamKind { kConvWeight, kBias, kNormScale, kNormShift };

struct ParamSlot {
  ag::Parameter param;
  ParamKind kind = ParamKind::kBias;
  int fan_in = 0;
};

// Owns named parameters; parameters have a single writer (the optimizer).
class Module {
 public:
  virtual ~Module() = default;
  Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;
  Module(Module&&) = default;
  Module& operator=(Module&&) = default;

  [[nodiscard]] virtual ag::Var forward(const ag::Var& x) const = 0;
  // Forward pass with parameter tracking switched off so no graph is retained.
  [[nodiscard]] Tensor infer(const Tensor& x);

  [[nodiscard]] std::vector<ParamSlot>& slots() { return slots_; }
  [[nodiscard]] const std::vector<ParamSlot>& slots() const { return slots_; }
  [[nodiscard]] std::size_t parameter_count() const;

  void set_requires_grad(bool on);
  void zero_grad();

 protected:
  ag::Var add_param(std::string name, Tensor init, ParamKind kind, int fan_in = 0);

 private:
  std::vector<ParamSlot> slots_;
};

struct ConvLayer {
  ag::Var weight;
  ag::Var bias;
  ag::ConvSpec spec;
};

struct ConvTransposeLayer {
  ag::Var weight;
  ag::Var bias;
};

struct NormLayer {
  ag::Var gamma;
  ag::Var beta;
};

// Residual encoder-decoder: 7x7 stem, two stride-2 downsamplings, residual blocks,
// two stride-2 transposed-conv upsamplings, 7x7 head, tanh rescaled to [0, 1].
class Generator final : public Module {
 public:
  Generator(const NetworkConfig& cfg, GeneratorRole role);

  [[nodiscard]] ag::Var forward(const ag::Var& x) const override;
  [[nodiscard]] GeneratorRole role() const { return role_; }

 private:
  ConvLayer conv(const std::string& name, int cin, int cout, int k, ag::ConvSpec spec);
  NormLayer norm(const std::string& name, int channels);
  [[nodiscard]] ag::Var norm_act(const ag::Var& x, const NormLayer& n, bool act) const;

  GeneratorRole role_;
  bool use_norm_;
  bool global_skip_;
  float head_scale_;
  ConvLayer stem_;
  NormLayer stem_norm_;
  std::vector<ConvLayer> down_;
  std::vector<NormLayer> down_norm_;
  struct ResBlock {
    ConvLayer a;
    NormLayer an;
    ConvLayer b;
    NormLayer bn;
  };
  std::vector<ResBlock> blocks_;
  std::vector<ConvTransposeLayer> up_;
  std::vector<NormLayer> up_norm_;
  ConvLayer head_;
};

// Stride-2 4x4 convolutional patch classifier emitting raw logits, H/2^L x W/2^L.
class Discriminator final : public Module {
 public:
  explicit Discriminator(const NetworkConfig& cfg);

  [[nodiscard]] ag::Var forward(const ag::Var& x) const override;
  [[nodiscard]] int downsampling() const { return 1 << static_cast<int>(layers_.size()); }

 private:
  std::vector<ConvLayer> layers_;
  std::vector<NormLayer> norms_;  // aligned with layers_; undefined where unused
};

Generator build_generator(const NetworkConfig& cfg, GeneratorRole role);
Discriminator build_discriminator(const NetworkConfig& cfg);

// He-normal convolution weights (std sqrt(2 / fan_in)), zero biases, unit norm scales.
void init_weights(Module& net, std::uint64_t seed);

struct ModelBundle {
  NetworkConfig config;
  std::string arch_version = kArchVersion;
  Generator g_c;
  Generator g_r;
  Discriminator d_c;
  Discriminator d_s;

  ModelBundle(const NetworkConfig& cfg, std::uint64_t init_seed);
};

}  // namespace rainfree
