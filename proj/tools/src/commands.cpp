#include "rainfree/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "rainfree/checkpoint.hpp"
#include "rainfree/config.hpp"
#include "rainfree/data.hpp"
#include "rainfree/inference.hpp"
#include "rainfree/metrics.hpp"
#include "rainfree/png_io.hpp"
#include "rainfree/seeding.hpp"
#include "rainfree/trainer.hpp"

namespace rainfree::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for operator mistakes that map to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigInputs {
  std::string config_path;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::map<std::string, CLI::Option*> options;
};

void add_config_options(CLI::App* app, ConfigInputs& in) {
  app->add_option("--config", in.config_path, "flat key = value config file")->check(CLI::ExistingFile);
  app->add_option("--set", in.sets, "override a config key, key=value (repeatable)");
  for (const auto& k : config_keys()) {
    if (k.is_flag) {
      in.options[k.name] = app->add_flag(flag_name(k.name), in.flags[k.name], k.help);
    } else {
      in.options[k.name] = app->add_option(flag_name(k.name), in.values[k.name], k.help);
    }
  }
}

TrainConfig build_config(const ConfigInputs& in) {
  TrainConfig cfg;
  if (!in.config_path.empty()) load_config_file(cfg, in.config_path);
  for (const auto& k : config_keys()) {
    if (in.options.at(k.name)->count() == 0) continue;
    if (k.is_flag) {
      set_config_value(cfg, k.name, in.flags.at(k.name) ? "true" : "false");
    } else {
      set_config_value(cfg, k.name, in.values.at(k.name));
    }
  }
  for (const auto& s : in.sets) apply_override(cfg, s);
  cfg.validate();
  return cfg;
}

fs::path resolve_checkpoint(const fs::path& p) {
  if (fs::exists(p / "meta.txt")) return p;
  if (fs::exists(p / "checkpoints" / "latest")) return latest_checkpoint(p);
  if (fs::exists(p / "latest")) return latest_checkpoint(p.parent_path());
  return p;
}

std::function<void(std::int64_t, const LossBundle&)> progress(std::ostream& out, std::int64_t total,
                                                              const std::string& prefix, bool quiet) {
  if (quiet) return {};
  const std::int64_t every = std::max<std::int64_t>(1, total / 20);
  return [&out, total, every, prefix](std::int64_t k, const LossBundle& l) {
    if ((k + 1) % every != 0 && k + 1 != total) return;
    out << prefix << "iter " << (k + 1) << "/" << total << "  " << l.str() << '\n';
    out.flush();
  };
}

// ---- train ------------------------------------------------------------------------

struct TrainArgs {
  ConfigInputs cfg;
  std::string resume;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const TrainConfig cfg = build_config(a.cfg);
  if (cfg.data_root.empty()) throw ConfigError("data_root", "data_root is required (--data-root)");
  const fs::path out_dir = cfg.out_dir;
  Trainer trainer(cfg, UnpairedDataset::from_root(cfg.data_root, Split::kTrain, 0));
  if (!a.resume.empty()) {
    const fs::path ck = a.resume == "latest" ? latest_checkpoint(out_dir) : resolve_checkpoint(a.resume);
    trainer.resume(ck);
    out << "resumed from " << ck.string() << " at iteration " << trainer.iteration() << '\n';
  }
  fs::create_directories(out_dir);
  std::ofstream(out_dir / "config.txt") << dump_config(cfg);
  const TrainResult r = trainer.run(out_dir, progress(out, cfg.total_iters, "", a.quiet));
  out << "finished " << r.iterations << " iterations; checkpoint " << r.final_checkpoint.string()
      << '\n';
  return kOk;
}

// ---- derain -----------------------------------------------------------------------

struct DerainArgs {
  std::string checkpoint;
  std::string input;
  std::string output;
};

int cmd_derain(const DerainArgs& a, std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(a.input)) throw UsageError("input is not a directory: " + a.input);
  Generator g = load_derain_generator(resolve_checkpoint(a.checkpoint));
  fs::create_directories(a.output);
  int failed = 0;
  int done = 0;
  for (const auto& path : list_images(a.input)) {
    try {
      const ImageTensor img = read_png(path);
      write_png(fs::path(a.output) / (path.stem().string() + ".png"), derain_image(g, img));
      ++done;
    } catch (const std::exception& e) {
      err << "error: " << path.string() << ": " << e.what() << '\n';
      ++failed;
    }
  }
  out << "derained " << done << " image(s)";
  if (failed > 0) out << ", " << failed << " failed";
  out << '\n';
  return failed > 0 ? kRuntimeFailure : kOk;
}

// ---- evaluate ---------------------------------------------------------------------

struct EvaluateArgs {
  std::string checkpoint;
  bool identity = false;
  std::string data;
  std::string report;
  std::string tag;
};

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  if (a.identity == !a.checkpoint.empty()) {
    throw UsageError("pass exactly one of --checkpoint or --identity");
  }
  std::optional<Generator> g;
  DerainFn fn = [](const ImageTensor& x) { return x; };
  std::string tag = a.tag;
  if (!a.identity) {
    const fs::path ck = resolve_checkpoint(a.checkpoint);
    g.emplace(load_derain_generator(ck));
    fn = [&g](const ImageTensor& x) { return derain_image(*g, x); };
    if (tag.empty()) tag = ck.string();
  } else if (tag.empty()) {
    tag = "identity";
  }
  const EvalReport report = evaluate_dir(fn, a.data, tag);
  out << report.table();
  if (!a.report.empty()) report.write_csv(fs::path(a.report));
  return report.num_ok() > 0 ? kOk : kRuntimeFailure;
}

// ---- make-synthetic ---------------------------------------------------------------

struct SyntheticArgs {
  std::string clean;
  std::string output;
  int scenes = 0;
  int size = 64;
  int test_every = 8;
  SyntheticRainSpec rain;
};

int cmd_make_synthetic(const SyntheticArgs& a, std::ostream& out) {
  if (a.clean.empty() == (a.scenes == 0)) throw UsageError("pass exactly one of --clean or --scenes");
  try {
    a.rain.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const fs::path root = a.output;
  if (a.scenes > 0) {
    CorpusSpec spec;
    spec.num_clean = a.scenes;
    spec.size = a.size;
    spec.test_every = a.test_every;
    spec.rain = a.rain;
    spec.seed = a.rain.seed;
    const CorpusSummary s = build_synthetic_corpus(root, spec);
    out << "corpus: " << s.train_rainy << " rainy + " << s.train_clean << " clean training images, "
        << s.test_pairs << " test pairs\n";
    return kOk;
  }

  if (!fs::is_directory(a.clean)) throw UsageError("clean directory not found: " + a.clean);
  const auto clean = list_images(a.clean);
  if (clean.empty()) throw UsageError("no PNG images in " + a.clean);
  for (const char* sub : {"rainy", "gt", "streaks"}) fs::create_directories(root / sub);
  std::ofstream manifest(root / "manifest.csv");
  manifest << "# angle_deg=" << a.rain.angle_deg << " streak_length_px=" << a.rain.streak_length_px
           << " density=" << a.rain.density << " intensity=" << a.rain.intensity
           << " seed=" << a.rain.seed << '\n'
           << "stem,rainy,gt,streaks\n";
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const std::string stem = clean[i].stem().string();
    const ImageTensor c = read_png(clean[i]);
    SyntheticRainSpec spec = a.rain;
    spec.seed = derive_seed(a.rain.seed, 0, i);
    const RainySample s = synthesize_rain(c, spec);
    const std::string file = stem + ".png";
    write_png(root / "rainy" / file, s.rainy);
    write_png(root / "gt" / file, c);
    write_png(root / "streaks" / file, s.streaks);
    manifest << stem << ",rainy/" << file << ",gt/" << file << ",streaks/" << file << '\n';
  }
  if (!manifest) throw std::runtime_error("failed writing manifest");
  out << "wrote " << clean.size() << " triplet(s) to " << root.string() << '\n';
  return kOk;
}

// ---- ablate -----------------------------------------------------------------------

struct AblateArgs {
  ConfigInputs cfg;
  std::string test;
  bool quiet = false;
};

struct Variant {
  const char* label;
  const char* slug;
  bool no_rgm;
  bool no_bgm;
  bool no_lum;
};

constexpr Variant kVariants[] = {
    {"full", "full", false, false, false},
    {"-RGM", "no_rgm", true, false, false},
    {"-BGM", "no_bgm", false, true, false},
    {"-lum", "no_lum", false, false, true},
    {"-{RGM,BGM,lum}", "benchmark", true, true, true},
};

int cmd_ablate(const AblateArgs& a, std::ostream& out, std::ostream& err) {
  const TrainConfig base = build_config(a.cfg);
  if (base.data_root.empty()) throw ConfigError("data_root", "data_root is required (--data-root)");
  const fs::path test_root = a.test.empty() ? fs::path(base.data_root) / "test" : fs::path(a.test);
  const auto pairs = load_paired_testset(test_root);
  if (pairs.empty()) throw std::runtime_error("no test pairs under " + test_root.string());
  const auto dataset = UnpairedDataset::from_root(base.data_root, Split::kTrain, 0);

  struct Row {
    std::string label;
    std::optional<EvalReport> report;
    std::string error;
  };
  std::vector<Row> rows;
  for (const auto& v : kVariants) {
    TrainConfig cfg = base;
    cfg.no_rgm = v.no_rgm;
    cfg.no_bgm = v.no_bgm;
    cfg.no_lum = v.no_lum;
    cfg.out_dir = (fs::path(base.out_dir) / v.slug).string();
    Row row{v.label, std::nullopt, {}};
    try {
      Trainer t(cfg, dataset);
      t.run(cfg.out_dir, progress(out, cfg.total_iters, std::string("[") + v.label + "] ", a.quiet));
      Generator& g = t.models().g_c;
      row.report = evaluate([&g](const ImageTensor& x) { return derain_image(g, x); }, pairs, v.label);
      if (row.report->num_ok() == 0) {
        row.error = "no test pair evaluated";
        row.report.reset();
      }
    } catch (const std::exception& e) {
      row.error = e.what();
      err << "variant " << v.label << " failed: " << e.what() << '\n';
    }
    rows.push_back(std::move(row));
  }

  const EvalReport baseline = evaluate([](const ImageTensor& x) { return x; }, pairs, "input");
  fs::create_directories(base.out_dir);
  std::ofstream csv(fs::path(base.out_dir) / "ablation.csv");
  csv << "variant,psnr_db,ssim,status\n" << std::setprecision(10);
  out << std::left << std::setw(18) << "variant" << std::right << std::setw(10) << "PSNR"
      << std::setw(10) << "SSIM" << '\n';
  bool any_failed = false;
  for (const auto& r : rows) {
    out << std::left << std::setw(18) << r.label << std::right;
    if (r.report) {
      out << std::fixed << std::setprecision(2) << std::setw(10) << r.report->mean_psnr
          << std::setprecision(4) << std::setw(10) << r.report->mean_ssim << '\n';
      csv << r.label << ',' << r.report->mean_psnr << ',' << r.report->mean_ssim << ",ok\n";
    } else {
      any_failed = true;
      out << std::setw(10) << "FAILED" << std::setw(10) << "FAILED" << '\n';
      csv << r.label << ",,,FAILED\n";
    }
  }
  out << std::defaultfloat << "do-nothing baseline: " << std::fixed << std::setprecision(2)
      << baseline.mean_psnr << " dB / " << std::setprecision(4) << baseline.mean_ssim << '\n'
      << std::defaultfloat;
  return any_failed ? kRuntimeFailure : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Unsupervised single-image deraining: train, derain, evaluate, make-synthetic, ablate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "rainfree 0.1.0");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train G_c, G_r, D_c and D_s on unpaired data");
  add_config_options(train_cmd, train.cfg);
  train_cmd->add_option("--resume", train.resume, "checkpoint directory, run directory or 'latest'");
  train_cmd->add_flag("--quiet", train.quiet, "suppress progress lines");

  DerainArgs derain;
  auto* derain_cmd = app.add_subcommand("derain", "run G_c on every PNG in a directory");
  derain_cmd->add_option("--checkpoint", derain.checkpoint, "checkpoint or run directory")->required();
  derain_cmd->add_option("--input", derain.input, "directory of rainy PNGs")->required();
  derain_cmd->add_option("--output", derain.output, "output directory")->required();

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "PSNR/SSIM on a paired set with rainy/ and gt/");
  eval_cmd->add_option("--data", eval.data, "paired set root")->required();
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint or run directory");
  eval_cmd->add_flag("--identity", eval.identity, "score the untouched input (do-nothing baseline)");
  eval_cmd->add_option("--report", eval.report, "write the per-image CSV report here");
  eval_cmd->add_option("--tag", eval.tag, "model tag recorded in the report");

  SyntheticArgs synth;
  auto* synth_cmd = app.add_subcommand("make-synthetic", "render synthetic rain");
  synth_cmd->add_option("--clean", synth.clean, "directory of clean PNGs");
  synth_cmd->add_option("--scenes", synth.scenes, "generate this many procedural scenes as a train/test corpus")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--output", synth.output, "output root")->required();
  synth_cmd->add_option("--size", synth.size, "procedural scene side")->capture_default_str();
  synth_cmd->add_option("--test-every", synth.test_every, "every n-th procedural scene is held out")
      ->capture_default_str();
  synth_cmd->add_option("--angle", synth.rain.angle_deg, "streak angle from vertical, degrees")
      ->capture_default_str();
  synth_cmd->add_option("--length", synth.rain.streak_length_px, "streak length in pixels")
      ->capture_default_str();
  synth_cmd->add_option("--density", synth.rain.density, "per-pixel streak seed probability")
      ->capture_default_str();
  synth_cmd->add_option("--intensity", synth.rain.intensity, "streak brightness")->capture_default_str();
  synth_cmd->add_option("--seed", synth.rain.seed, "base seed")->capture_default_str();

  AblateArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "train and compare the five loss variants");
  add_config_options(ablate_cmd, ablate.cfg);
  ablate_cmd->add_option("--test", ablate.test, "paired test root (default <data_root>/test)");
  ablate_cmd->add_flag("--quiet", ablate.quiet, "suppress progress lines");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train, out);
    if (derain_cmd->parsed()) return cmd_derain(derain, out, err);
    if (eval_cmd->parsed()) return cmd_evaluate(eval, out);
    if (synth_cmd->parsed()) return cmd_make_synthetic(synth, out);
    if (ablate_cmd->parsed()) return cmd_ablate(ablate, out, err);
  } catch (const ConfigError& e) {
    err << "error: invalid config key '" << e.key() << "': " << e.what() << '\n';
    return kUsageError;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace rainfree::cli
