#include <gtest/gtest.h>

#include <fstream>

#include "oracles.hpp"
#include "rainfree/checkpoint.hpp"
#include "rainfree/config.hpp"
#include "test_dirs.hpp"

using namespace rainfree;

namespace {

NetworkConfig small() {
  NetworkConfig cfg;
  cfg.base_channels = 4;
  cfg.num_resblocks_gc = 2;
  cfg.num_resblocks_gr = 1;
  return cfg;
}

}  // namespace

TEST(Checkpoint, ModuleRoundTripIsExact) {
  TempDir dir("ckpt");
  Generator a(small(), GeneratorRole::kDerain);
  init_weights(a, 1);
  Generator b(small(), GeneratorRole::kDerain);
  init_weights(b, 2);
  save_module(dir / "g.bin", a);
  load_module(dir / "g.bin", b);
  for (std::size_t i = 0; i < a.slots().size(); ++i) {
    EXPECT_EQ(oracle::values(a.slots()[i].param.var.value()),
              oracle::values(b.slots()[i].param.var.value()));
  }
}

TEST(Checkpoint, LayoutMismatchLeavesTargetUntouched) {
  TempDir dir("ckpt2");
  Generator a(small(), GeneratorRole::kDerain);
  init_weights(a, 1);
  save_module(dir / "g.bin", a);
  NetworkConfig wide = small();
  wide.base_channels = 8;
  Generator b(wide, GeneratorRole::kDerain);
  init_weights(b, 2);
  const auto before = oracle::values(b.slots()[0].param.var.value());
  EXPECT_THROW(load_module(dir / "g.bin", b), std::invalid_argument);
  EXPECT_EQ(oracle::values(b.slots()[0].param.var.value()), before);
}

TEST(Checkpoint, CorruptOrTruncatedFilesAreRejected) {
  TempDir dir("ckpt3");
  Generator a(small(), GeneratorRole::kDerain);
  std::ofstream(dir / "junk.bin") << "definitely not a checkpoint";
  EXPECT_THROW(load_module(dir / "junk.bin", a), std::runtime_error);
  save_module(dir / "g.bin", a);
  std::filesystem::resize_file(dir / "g.bin", std::filesystem::file_size(dir / "g.bin") / 2);
  EXPECT_THROW(load_module(dir / "g.bin", a), std::runtime_error);
  EXPECT_THROW(load_module(dir / "missing.bin", a), std::runtime_error);
}

TEST(Checkpoint, AdamStateRoundTrip) {
  TempDir dir("adam");
  AdamState s;
  s.t = 17;
  s.m.push_back(oracle::random_tensor({1, 2, 3, 4}, 1));
  s.v.push_back(oracle::random_tensor({1, 2, 3, 4}, 2));
  save_adam(dir / "a.bin", s);
  const AdamState r = load_adam(dir / "a.bin");
  EXPECT_EQ(r.t, 17);
  ASSERT_EQ(r.m.size(), 1U);
  EXPECT_EQ(oracle::values(r.m[0]), oracle::values(s.m[0]));
  EXPECT_EQ(oracle::values(r.v[0]), oracle::values(s.v[0]));
}

TEST(Checkpoint, MetaRoundTripAndArchCheck) {
  TempDir dir("meta");
  CheckpointMeta m{kArchVersion, small(), 42, 7, 0xabcdefULL};
  m.network.head_scale = 0.25F;
  write_meta(dir / "meta.txt", m);
  const CheckpointMeta r = read_meta(dir / "meta.txt");
  EXPECT_EQ(r.iteration, 42);
  EXPECT_EQ(r.seed, 7U);
  EXPECT_EQ(r.config_hash, 0xabcdefULL);
  EXPECT_EQ(r.network.base_channels, 4);
  EXPECT_EQ(r.network.head_scale, 0.25F);
  m.arch_version = "something-else";
  write_meta(dir / "meta.txt", m);
  EXPECT_THROW((void)read_meta(dir / "meta.txt"), std::runtime_error);
}

TEST(Checkpoint, DerainGeneratorLoadsFromMetaAndGcOnly) {
  TempDir dir("derain");
  NetworkConfig cfg = small();
  Generator g(cfg, GeneratorRole::kDerain);
  init_weights(g, 5);
  save_module(dir / "g_c.bin", g);
  write_meta(dir / "meta.txt", {kArchVersion, cfg, 1, 0, 0});
  Generator loaded = load_derain_generator(dir.path());
  const Tensor x = oracle::random_image(16, 16, 3);
  EXPECT_EQ(oracle::values(loaded.infer(x)), oracle::values(g.infer(x)));
}

TEST(Config, DefaultsAndDerivedValues) {
  TrainConfig cfg;
  EXPECT_DOUBLE_EQ(cfg.lr0, 2e-4);
  EXPECT_DOUBLE_EQ(cfg.beta1, 0.5);
  EXPECT_DOUBLE_EQ(cfg.beta2, 0.999);
  EXPECT_DOUBLE_EQ(cfg.weights.w2, 5.0);
  cfg.total_iters = 1000;
  EXPECT_EQ(cfg.effective_decay_start(), 500);
  EXPECT_NE(cfg.data_seed(), cfg.init_seed());
}

TEST(Config, AblationFlagsZeroWeights) {
  TrainConfig cfg;
  cfg.no_rgm = true;
  cfg.no_lum = true;
  const LossWeights w = cfg.effective_weights();
  EXPECT_EQ(w.w1, 0.0);
  EXPECT_EQ(w.w2, 5.0);
  EXPECT_EQ(w.w3, 0.0);
  EXPECT_EQ(w.w4, 0.5);
  cfg.no_bgm = true;
  EXPECT_EQ(cfg.effective_weights().w2, 0.0);
}

TEST(Config, OverridesFilesAndErrors) {
  TrainConfig cfg;
  apply_override(cfg, "lum_gamma=0.5");
  EXPECT_DOUBLE_EQ(cfg.lum_gamma, 0.5);
  apply_override(cfg, "no_lum=true");
  EXPECT_TRUE(cfg.no_lum);
  try {
    apply_override(cfg, "bogus=1");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "bogus");
  }
  EXPECT_THROW(apply_override(cfg, "seed=abc"), ConfigError);
  EXPECT_THROW(apply_override(cfg, "no-equals"), ConfigError);

  TempDir dir("cfg");
  std::ofstream(dir / "c.cfg") << "# comment\nseed = 9\ntotal_iters = 10\nseed = 11\n";
  TrainConfig f;
  load_config_file(f, dir / "c.cfg");
  EXPECT_EQ(f.seed, 11U);
  EXPECT_EQ(f.total_iters, 10);

  TrainConfig round;
  std::ofstream(dir / "dump.cfg") << dump_config(f);
  load_config_file(round, dir / "dump.cfg");
  EXPECT_EQ(round.hash(), f.hash());
  EXPECT_EQ(dump_config(round), dump_config(f));
}

TEST(Config, ValidationRejectsBadValues) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.train_size = 40;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.lum_gamma = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.disc_shift = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Config, HashTracksOnlyTrainingSettings) {
  TrainConfig a;
  TrainConfig b;
  b.out_dir = "elsewhere";
  b.checkpoint_every = 3;
  EXPECT_EQ(a.hash(), b.hash());
  b.weights.w4 = 0.25;
  EXPECT_NE(a.hash(), b.hash());
  TrainConfig c;
  apply_override(c, "disc_shift=4");
  EXPECT_NE(a.hash(), c.hash());
  for (const auto& k : config_keys()) {
    EXPECT_EQ(flag_name(k.name).rfind("--", 0), 0U);
    EXPECT_EQ(flag_name(k.name).find('_'), std::string::npos);
  }
}
