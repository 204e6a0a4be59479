#include "framepred/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "framepred/eval.hpp"
#include "framepred/model.hpp"
#include "framepred/training.hpp"

namespace framepred {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Loss presets (the configurations named in the experiments)
// ---------------------------------------------------------------------------

struct LossPreset {
  LossWeights weights;
  bool adversarial = false;
  int batch = 4;
};

LossPreset loss_preset(const std::string& name) {
  LossPreset p;
  if (name == "l2") {
    p.weights = {0.0, 1.0, 0.0, 2, 1};
  } else if (name == "l1") {
    p.weights = {0.0, 1.0, 0.0, 1, 1};
  } else if (name == "gdl-l1") {
    p.weights = {0.0, 1.0, 1.0, 1, 1};
  } else if (name == "gdl-l2") {
    p.weights = {0.0, 1.0, 1.0, 2, 2};
  } else if (name == "adv") {
    p.weights = {0.05, 1.0, 0.0, 2, 1};
    p.adversarial = true;
    p.batch = 8;
  } else if (name == "adv-gdl") {
    p.weights = {0.05, 1.0, 1.0, 2, 1};
    p.adversarial = true;
    p.batch = 8;
  } else {
    throw ConfigError("unknown training preset: " + name +
                      " (expected l2|l1|gdl-l1|gdl-l2|adv|adv-gdl)");
  }
  return p;
}

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

std::vector<std::string> allowed_keys(const Config& cfg) {
  std::vector<std::string> keys = {
      "run.command", "run.seed", "run.out",
      "model.preset", "model.channels", "model.scales", "model.base_size",
      "model.in_frames", "model.out_frames", "model.upsample",
      "train.preset", "train.lambda_adv", "train.lambda_lp", "train.lambda_gdl",
      "train.p", "train.alpha", "train.adversarial", "train.rho_g_initial",
      "train.rho_g_final", "train.rho_g_interval", "train.rho_d", "train.batch",
      "train.steps", "train.log_every", "train.checkpoint_every",
      "data.source", "data.patch_size", "data.motion_threshold", "data.channels",
      "data.clips", "data.patches_per_clip", "data.frames_per_clip",
      "data.canvas", "data.shapes", "data.min_size", "data.max_size",
      "data.min_speed", "data.max_speed", "data.dot_size", "data.seq_m",
      "eval.mask_threshold", "eval.rollout_steps", "eval.clips",
      "predict.rollout_steps", "predict.clip_index",
  };
  const int n = static_cast<int>(cfg.get_int_or("model.scales", 8));
  for (int k = 1; k <= n; ++k) {
    for (const char* part : {".maps", ".kernels"})
      keys.push_back("model.g" + std::to_string(k) + part);
    for (const char* part : {".maps", ".kernels", ".pool", ".fc"})
      keys.push_back("model.d" + std::to_string(k) + part);
  }
  return keys;
}

void copy_if_present(const Config& src, Config& dst, const std::string& key) {
  if (src.has(key)) dst.set(key, src.get(key));
}

}  // namespace

Config resolve_config(const Config& file_cfg, const CliOptions& opts) {
  if (opts.command != "synth" && opts.command != "train" &&
      opts.command != "predict" && opts.command != "eval")
    throw ConfigError("unknown command: " + opts.command);
  file_cfg.require_known(allowed_keys(file_cfg));

  Config cfg;
  cfg.set("run.command", opts.command);
  cfg.set_int("run.seed", opts.seed >= 0 ? opts.seed
                                         : file_cfg.get_int_or("run.seed", 0));
  const std::string out =
      !opts.out_dir.empty() ? opts.out_dir : file_cfg.get_or("run.out", "");
  if (out.empty())
    throw ConfigError("no output directory given (--out or run.out)");
  cfg.set("run.out", out);

  // [model] -- materialized when present or when training needs it
  const bool has_model_keys = [&] {
    for (const auto& k : file_cfg.keys())
      if (k.rfind("model.", 0) == 0) return true;
    return false;
  }();
  if (has_model_keys || opts.command == "train") {
    const std::string preset = file_cfg.get_or("model.preset", "custom");
    cfg.set("model.preset", preset);
    cfg.set_int("model.channels", file_cfg.get_int_or("model.channels", 1));
    if (preset == "custom") {
      for (const char* key :
           {"model.scales", "model.base_size", "model.in_frames",
            "model.out_frames"}) {
        if (!file_cfg.has(key) && opts.command == "train")
          throw ConfigError(std::string("custom model needs ") + key);
        copy_if_present(file_cfg, cfg, key);
      }
      cfg.set("model.upsample", file_cfg.get_or("model.upsample", "bilinear"));
      const int n = static_cast<int>(cfg.get_int_or("model.scales", 0));
      for (int k = 1; k <= n; ++k) {
        for (const std::string& key :
             {"model.g" + std::to_string(k) + ".maps",
              "model.g" + std::to_string(k) + ".kernels",
              "model.d" + std::to_string(k) + ".maps",
              "model.d" + std::to_string(k) + ".kernels",
              "model.d" + std::to_string(k) + ".fc"}) {
          if (!file_cfg.has(key) && opts.command == "train")
            throw ConfigError("custom model needs " + key);
          copy_if_present(file_cfg, cfg, key);
        }
        const std::string pool = "model.d" + std::to_string(k) + ".pool";
        cfg.set_int(pool, file_cfg.get_int_or(pool, 0));
      }
    } else {
      if (!is_model_preset(preset))
        throw ConfigError("unknown model preset: " + preset);
      for (const auto& k : file_cfg.keys())
        if (k.rfind("model.", 0) == 0 && k != "model.preset" &&
            k != "model.channels")
          throw ConfigError("model preset " + preset +
                            " conflicts with explicit key " + k);
    }
  }

  // [train]
  {
    const std::string preset_name =
        !opts.preset.empty() ? opts.preset
                             : file_cfg.get_or("train.preset", "l2");
    LossPreset p = loss_preset(preset_name);
    cfg.set("train.preset", preset_name);
    cfg.set_num("train.lambda_adv",
                file_cfg.get_num_or("train.lambda_adv", p.weights.lambda_adv));
    cfg.set_num("train.lambda_lp",
                file_cfg.get_num_or("train.lambda_lp", p.weights.lambda_lp));
    cfg.set_num("train.lambda_gdl",
                file_cfg.get_num_or("train.lambda_gdl", p.weights.lambda_gdl));
    cfg.set_int("train.p", file_cfg.get_int_or("train.p", p.weights.p));
    cfg.set_int("train.alpha", file_cfg.get_int_or("train.alpha", p.weights.alpha));
    cfg.set_int("train.adversarial",
                file_cfg.get_bool_or("train.adversarial", p.adversarial) ? 1 : 0);
    cfg.set_num("train.rho_g_initial",
                file_cfg.get_num_or("train.rho_g_initial", 0.04));
    cfg.set_num("train.rho_g_final",
                file_cfg.get_num_or("train.rho_g_final", 0.005));
    cfg.set_int("train.rho_g_interval",
                file_cfg.get_int_or("train.rho_g_interval", 0));
    cfg.set_num("train.rho_d", file_cfg.get_num_or("train.rho_d", 0.02));
    cfg.set_int("train.batch", file_cfg.get_int_or("train.batch", p.batch));
    cfg.set_int("train.steps", file_cfg.get_int_or("train.steps", 0));
    cfg.set_int("train.log_every", file_cfg.get_int_or("train.log_every", 50));
    cfg.set_int("train.checkpoint_every",
                file_cfg.get_int_or("train.checkpoint_every", 0));
  }

  // [data]
  cfg.set("data.source", file_cfg.get_or("data.source", "synth-bouncing"));
  cfg.set_int("data.patch_size", file_cfg.get_int_or("data.patch_size", 32));
  cfg.set_num("data.motion_threshold",
              file_cfg.get_num_or("data.motion_threshold", 0.01));
  cfg.set_int("data.channels", file_cfg.get_int_or("data.channels", 1));
  cfg.set_int("data.clips", file_cfg.get_int_or("data.clips", 64));
  cfg.set_int("data.patches_per_clip",
              file_cfg.get_int_or("data.patches_per_clip", 4));
  cfg.set_int("data.frames_per_clip",
              file_cfg.get_int_or("data.frames_per_clip", 20));
  cfg.set_int("data.canvas", file_cfg.get_int_or("data.canvas", 32));
  cfg.set_int("data.shapes", file_cfg.get_int_or("data.shapes", 2));
  cfg.set_int("data.min_size", file_cfg.get_int_or("data.min_size", 3));
  cfg.set_int("data.max_size", file_cfg.get_int_or("data.max_size", 6));
  cfg.set_int("data.min_speed", file_cfg.get_int_or("data.min_speed", 1));
  cfg.set_int("data.max_speed", file_cfg.get_int_or("data.max_speed", 3));
  cfg.set_int("data.dot_size", file_cfg.get_int_or("data.dot_size", 2));
  cfg.set_int("data.seq_m", file_cfg.get_int_or("data.seq_m", 4));

  // [eval] / [predict]
  cfg.set_num("eval.mask_threshold",
              file_cfg.get_num_or("eval.mask_threshold", 0.2));
  cfg.set_int("eval.rollout_steps", file_cfg.get_int_or("eval.rollout_steps", 1));
  cfg.set_int("eval.clips", file_cfg.get_int_or("eval.clips", 100));
  cfg.set_int("predict.rollout_steps",
              file_cfg.get_int_or("predict.rollout_steps", 1));
  cfg.set_int("predict.clip_index", file_cfg.get_int_or("predict.clip_index", 0));
  return cfg;
}

namespace {

ModelSpec model_from_config(const Config& cfg) {
  const std::string preset = cfg.get_or("model.preset", "custom");
  const int channels = static_cast<int>(cfg.get_int_or("model.channels", 1));
  if (preset != "custom") return model_preset(preset, channels);
  ModelSpec spec;
  spec.scales.n_scales = static_cast<int>(cfg.get_int("model.scales"));
  spec.scales.base_size = static_cast<int>(cfg.get_int("model.base_size"));
  spec.g.in_frames = spec.d.in_frames =
      static_cast<int>(cfg.get_int("model.in_frames"));
  spec.g.out_frames = spec.d.out_frames =
      static_cast<int>(cfg.get_int("model.out_frames"));
  spec.g.channels = spec.d.channels = channels;
  const std::string up = cfg.get_or("model.upsample", "bilinear");
  if (up == "bilinear")
    spec.g.upsample_mode = Upsample::kBilinear;
  else if (up == "nearest")
    spec.g.upsample_mode = Upsample::kNearest;
  else
    throw ConfigError("bad model.upsample: " + up);
  // reuse the canonical spec-text parser for the per-scale lists
  std::ostringstream text;
  text << "scales=" << spec.scales.n_scales << "\n"
       << "base_size=" << spec.scales.base_size << "\n"
       << "in_frames=" << spec.g.in_frames << "\n"
       << "out_frames=" << spec.g.out_frames << "\n"
       << "channels=" << channels << "\n"
       << "upsample=" << up << "\n";
  for (int k = 1; k <= spec.scales.n_scales; ++k) {
    const std::string g = "model.g" + std::to_string(k);
    text << "g" << k << ".maps=" << cfg.get(g + ".maps") << "\n";
    text << "g" << k << ".kernels=" << cfg.get(g + ".kernels") << "\n";
  }
  for (int k = 1; k <= spec.scales.n_scales; ++k) {
    const std::string d = "model.d" + std::to_string(k);
    text << "d" << k << ".maps=" << cfg.get(d + ".maps") << "\n";
    text << "d" << k << ".kernels=" << cfg.get(d + ".kernels") << "\n";
    text << "d" << k << ".pool=" << cfg.get_int_or(d + ".pool", 0) << "\n";
    text << "d" << k << ".fc=" << cfg.get(d + ".fc") << "\n";
  }
  return model_spec_from_text(text.str());
}

TrainConfig train_config_from(const Config& cfg) {
  TrainConfig tc;
  tc.weights.lambda_adv = cfg.get_num("train.lambda_adv");
  tc.weights.lambda_lp = cfg.get_num("train.lambda_lp");
  tc.weights.lambda_gdl = cfg.get_num("train.lambda_gdl");
  tc.weights.p = static_cast<int>(cfg.get_int("train.p"));
  tc.weights.alpha = static_cast<int>(cfg.get_int("train.alpha"));
  tc.adversarial = cfg.get_bool_or("train.adversarial", false);
  tc.rho_g_initial = static_cast<float>(cfg.get_num("train.rho_g_initial"));
  tc.rho_g_final = static_cast<float>(cfg.get_num("train.rho_g_final"));
  tc.rho_g_interval = cfg.get_int("train.rho_g_interval");
  tc.rho_d = static_cast<float>(cfg.get_num("train.rho_d"));
  tc.batch = static_cast<int>(cfg.get_int("train.batch"));
  tc.steps = cfg.get_int("train.steps");
  tc.seed = static_cast<uint64_t>(cfg.get_int("run.seed"));
  tc.log_every = cfg.get_int("train.log_every");
  tc.checkpoint_every = cfg.get_int("train.checkpoint_every");
  return tc;
}

BouncingParams bouncing_from_config(const Config& cfg, int channels) {
  BouncingParams bp;
  bp.canvas = static_cast<int>(cfg.get_int("data.canvas"));
  bp.frames = static_cast<int>(cfg.get_int("data.frames_per_clip"));
  bp.shapes = static_cast<int>(cfg.get_int("data.shapes"));
  bp.min_size = static_cast<int>(cfg.get_int("data.min_size"));
  bp.max_size = static_cast<int>(cfg.get_int("data.max_size"));
  bp.min_speed = static_cast<int>(cfg.get_int("data.min_speed"));
  bp.max_speed = static_cast<int>(cfg.get_int("data.max_speed"));
  bp.channels = channels;
  return bp;
}

BimodalParams bimodal_from_config(const Config& cfg, int m, int channels) {
  BimodalParams bp;
  bp.canvas = static_cast<int>(cfg.get_int("data.canvas"));
  bp.dot = static_cast<int>(cfg.get_int("data.dot_size"));
  bp.m = m;
  bp.channels = channels;
  return bp;
}

/// Assembles training or evaluation samples with m input and n_total target
/// frames per sample. Synthetic sources are generated in memory; anything
/// else is treated as a directory tree of clips.
std::vector<ClipSample> dataset_from_config(const Config& cfg, int m,
                                            int n_total, int channels,
                                            int clips, uint64_t seed) {
  const std::string source = cfg.get("data.source");
  const int patch = static_cast<int>(cfg.get_int("data.patch_size"));
  const double tau = cfg.get_num("data.motion_threshold");
  const int per_clip = static_cast<int>(cfg.get_int("data.patches_per_clip"));
  if (source == "synth-bouncing") {
    return sample_bouncing_dataset(bouncing_from_config(cfg, channels), clips,
                                   per_clip, patch, tau, m, n_total, seed);
  }
  if (source == "synth-bimodal") {
    if (n_total != 1)
      throw ConfigError("synth-bimodal provides exactly one target frame");
    return sample_bimodal_dataset(bimodal_from_config(cfg, m, channels), clips,
                                  seed);
  }
  // directory of clips (one subdirectory per clip, or a flat frame dir)
  if (!fs::is_directory(source))
    throw DataError("data source is not a directory: " + source);
  std::vector<std::string> clip_dirs;
  for (const auto& entry : fs::directory_iterator(source))
    if (entry.is_directory()) clip_dirs.push_back(entry.path().string());
  std::sort(clip_dirs.begin(), clip_dirs.end());
  if (clip_dirs.empty()) clip_dirs.push_back(source);
  std::vector<ClipSample> out;
  int i = 0;
  for (const auto& dir : clip_dirs) {
    const auto frames = load_frame_sequence(dir);
    if (frames[0].dim(0) != channels)
      throw DataError("clip " + dir + " has " +
                      std::to_string(frames[0].dim(0)) +
                      " channels, expected " + std::to_string(channels));
    Rng rng = Rng::stream(seed, 500 + static_cast<uint64_t>(i));
    auto samples = sample_patches(frames, patch, tau, m, n_total, per_clip, rng,
                                  fs::path(dir).filename().string());
    for (auto& s : samples) out.push_back(std::move(s));
    ++i;
  }
  if (out.empty()) throw DataError("no clips under " + source);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path);
  os << text;
}

std::string frame_name(const char* stem, int index, int channels) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d.%s", stem, index,
                channels == 1 ? "pgm" : "ppm");
  return buf;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

void cmd_synth(const Config& cfg, const std::string& out) {
  const std::string source = cfg.get("data.source");
  const uint64_t seed = static_cast<uint64_t>(cfg.get_int("run.seed"));
  const int clips = static_cast<int>(cfg.get_int("data.clips"));
  const int channels = static_cast<int>(cfg.get_int("data.channels"));
  if (source == "synth-bouncing") {
    BouncingParams bp = bouncing_from_config(cfg, channels);
    for (int i = 0; i < clips; ++i) {
      char dir[32];
      std::snprintf(dir, sizeof(dir), "clip_%04d", i);
      const fs::path clip_dir = fs::path(out) / dir;
      fs::create_directories(clip_dir);
      const auto frames =
          synth_bouncing_shapes(bp, Rng::stream(seed, 100 + 2 * i).next_u64());
      for (size_t t = 0; t < frames.size(); ++t)
        write_pnm((clip_dir / frame_name("frame", static_cast<int>(t), channels))
                      .string(),
                  frames[t]);
    }
  } else if (source == "synth-bimodal") {
    BimodalParams bp = bimodal_from_config(
        cfg, static_cast<int>(cfg.get_int("data.seq_m")), channels);
    const auto samples = sample_bimodal_dataset(bp, clips, seed);
    std::ostringstream labels;
    for (int i = 0; i < clips; ++i) {
      char dir[32];
      std::snprintf(dir, sizeof(dir), "clip_%04d", i);
      const fs::path clip_dir = fs::path(out) / dir;
      fs::create_directories(clip_dir);
      const ClipSample& s = samples[static_cast<size_t>(i)];
      for (int t = 0; t < bp.m; ++t) {
        Tensor<float> frame({channels, bp.canvas, bp.canvas});
        const size_t per = static_cast<size_t>(channels) * bp.canvas * bp.canvas;
        std::copy(s.x.data() + static_cast<size_t>(t) * per,
                  s.x.data() + static_cast<size_t>(t + 1) * per, frame.data());
        write_pnm((clip_dir / frame_name("frame", t, channels)).string(),
                  denormalize_frames(frame));
      }
      write_pnm((clip_dir / frame_name("frame", bp.m, channels)).string(),
                denormalize_frames(s.y));
      labels << dir << " " << s.mode_label << "\n";
    }
    write_text((fs::path(out) / "labels.txt").string(), labels.str());
  } else {
    throw ConfigError("synth needs a synthetic data source, got: " + source);
  }
}

void cmd_train(const Config& cfg, const std::string& out) {
  const ModelSpec spec = model_from_config(cfg);
  const TrainConfig tc = train_config_from(cfg);
  if (cfg.get_int("data.channels") != spec.g.channels)
    throw ConfigError("data.channels disagrees with model.channels");
  const int div = spec.scales.divisor();
  const std::string source = cfg.get("data.source");
  if (source == "synth-bimodal") {
    if (cfg.get_int("data.canvas") % div != 0)
      throw ConfigError("bimodal canvas must be divisible by " +
                        std::to_string(div));
  } else if (cfg.get_int("data.patch_size") % div != 0) {
    throw ConfigError("patch_size must be divisible by " + std::to_string(div));
  }
  const auto samples = dataset_from_config(
      cfg, spec.g.in_frames, spec.g.out_frames, spec.g.channels,
      static_cast<int>(cfg.get_int("data.clips")),
      Rng::stream(tc.seed, 1001).next_u64());
  VectorDataset data(samples);

  std::ofstream log_file(fs::path(out) / "train_log.txt", std::ios::binary);
  if (!log_file) throw DataError("cannot write training log under " + out);
  TrainLogFn log = [&log_file](const TrainLogEntry& e) {
    log_file << "step=" << e.step << std::fixed << std::setprecision(6)
             << " loss_g=" << e.loss_g << " loss_d=" << e.loss_d
             << " lp=" << e.term_lp << " gdl=" << e.term_gdl
             << " adv=" << e.term_adv << " rho_g=" << e.rho_g << " g_hash="
             << std::hex << e.g_hash << std::dec << "\n"
             << std::defaultfloat;
  };
  CheckpointSink sink = [&out](const Checkpoint& ckpt) {
    char name[48];
    std::snprintf(name, sizeof(name), "ckpt_step%lld.fpck",
                  static_cast<long long>(ckpt.step));
    save_checkpoint(ckpt, (fs::path(out) / name).string());
  };
  const Checkpoint final_ckpt = train_loop(tc, spec, data, log, sink);
  save_checkpoint(final_ckpt, (fs::path(out) / "checkpoint.fpck").string());
}

Tensor<float> frame_slice(const Tensor<float>& stacked, int frame, int c) {
  const int h = stacked.dim(1), w = stacked.dim(2);
  Tensor<float> out({c, h, w});
  const size_t per = static_cast<size_t>(c) * h * w;
  std::copy(stacked.data() + static_cast<size_t>(frame) * per,
            stacked.data() + static_cast<size_t>(frame + 1) * per, out.data());
  return out;
}

/// Single-row grid: inputs | ground truth | prediction, 1px separators,
/// always written as PPM.
Tensor<float> make_grid(const std::vector<Tensor<float>>& frames) {
  const int c = frames[0].dim(0), h = frames[0].dim(1), w = frames[0].dim(2);
  const int count = static_cast<int>(frames.size());
  const int sep = 1;
  const int total_w = count * w + (count - 1) * sep;
  Tensor<float> grid = Tensor<float>::full({3, h, total_w}, 255.0f);
  for (int f = 0; f < count; ++f) {
    const int x0 = f * (w + sep);
    for (int ch = 0; ch < 3; ++ch) {
      const int src_ch = c == 3 ? ch : 0;
      for (int r = 0; r < h; ++r)
        for (int col = 0; col < w; ++col)
          grid.data()[(static_cast<size_t>(ch) * h + r) * total_w + x0 + col] =
              frames[static_cast<size_t>(f)]
                  .data()[(static_cast<size_t>(src_ch) * h + r) * w + col];
    }
  }
  return grid;
}

void cmd_predict(const Config& cfg, const std::string& out,
                 const std::string& checkpoint_path) {
  if (checkpoint_path.empty())
    throw ConfigError("predict needs --checkpoint");
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const int steps = static_cast<int>(cfg.get_int("predict.rollout_steps"));
  const int c = ckpt.spec.g.channels;
  const int m = ckpt.spec.g.in_frames;
  const int n = ckpt.spec.g.out_frames;
  const auto samples = dataset_from_config(
      cfg, m, n * steps, c, static_cast<int>(cfg.get_int("data.clips")),
      Rng::stream(static_cast<uint64_t>(cfg.get_int("run.seed")), 3003)
          .next_u64());
  const size_t index = static_cast<size_t>(cfg.get_int("predict.clip_index"));
  if (index >= samples.size())
    throw DataError("predict.clip_index out of range");
  const ClipSample& sample = samples[index];

  ParamStore<float> params = ckpt.g_params;
  Tensor<float> batch_x({1, sample.x.dim(0), sample.x.dim(1), sample.x.dim(2)},
                        std::vector<float>(sample.x.vec()));
  const auto rollout =
      recursive_predict(ckpt.spec.g, ckpt.spec.scales, params, batch_x, steps);

  std::vector<Tensor<float>> grid_frames;
  for (int t = 0; t < m; ++t)
    grid_frames.push_back(denormalize_frames(frame_slice(sample.x, t, c)));
  for (int j = 0; j < n * steps; ++j)
    grid_frames.push_back(denormalize_frames(frame_slice(sample.y, j, c)));
  int pred_index = 0;
  for (const auto& block : rollout) {
    Tensor<float> stacked({block.dim(1), block.dim(2), block.dim(3)},
                          std::vector<float>(block.vec()));
    for (int f = 0; f < n; ++f, ++pred_index) {
      Tensor<float> frame = denormalize_frames(frame_slice(stacked, f, c));
      write_pnm((fs::path(out) / frame_name("pred", pred_index, c)).string(),
                frame);
      grid_frames.push_back(std::move(frame));
    }
  }
  write_pnm((fs::path(out) / "grid.ppm").string(), make_grid(grid_frames));
}

void cmd_eval(const Config& cfg, const std::string& out,
              const std::string& checkpoint_path) {
  if (checkpoint_path.empty()) throw ConfigError("eval needs --checkpoint");
  const Checkpoint ckpt = load_checkpoint(checkpoint_path);
  const int steps = static_cast<int>(cfg.get_int("eval.rollout_steps"));
  const double threshold = cfg.get_num("eval.mask_threshold");
  const int c = ckpt.spec.g.channels;
  const auto samples = dataset_from_config(
      cfg, ckpt.spec.g.in_frames, ckpt.spec.g.out_frames * steps, c,
      static_cast<int>(cfg.get_int("eval.clips")),
      Rng::stream(static_cast<uint64_t>(cfg.get_int("run.seed")), 2002)
          .next_u64());
  VectorDataset data(samples);
  const MetricsReport report = evaluate_model(ckpt, data, steps, threshold);
  write_text((fs::path(out) / "report.txt").string(), report_records(report));
  write_text((fs::path(out) / "report_table.txt").string(),
             report_table(report));

  // Fig.2-style masked visualization of the first sample's first frame:
  // excluded pixels are set to 0 in both images.
  const ClipSample& sample = data.at(0);
  ParamStore<float> params = ckpt.g_params;
  Tensor<float> batch_x({1, sample.x.dim(0), sample.x.dim(1), sample.x.dim(2)},
                        std::vector<float>(sample.x.vec()));
  const auto rollout =
      recursive_predict(ckpt.spec.g, ckpt.spec.scales, params, batch_x, 1);
  Tensor<float> pred0({rollout[0].dim(1), rollout[0].dim(2), rollout[0].dim(3)},
                      std::vector<float>(rollout[0].vec()));
  const Tensor<float> pred = denormalize_frames(frame_slice(pred0, 0, c));
  const Tensor<float> truth = denormalize_frames(frame_slice(sample.y, 0, c));
  const Tensor<float> prev = denormalize_frames(
      frame_slice(sample.x, ckpt.spec.g.in_frames - 1, c));
  const EvalMask mask = motion_mask(truth, prev, threshold);
  auto masked = [&mask](const Tensor<float>& img) {
    Tensor<float> out = img.clone();
    const int ch = img.dim(0), h = img.dim(1), w = img.dim(2);
    for (int cc = 0; cc < ch; ++cc)
      for (int r = 0; r < h; ++r)
        for (int col = 0; col < w; ++col)
          if (!mask.at(r, col))
            out.data()[(static_cast<size_t>(cc) * h + r) * w + col] = 0.0f;
    return out;
  };
  write_pnm((fs::path(out) / frame_name("masked_target", 0, c)).string(),
            masked(truth));
  write_pnm((fs::path(out) / frame_name("masked_pred", 0, c)).string(),
            masked(pred));
}

}  // namespace

void run_command(const CliOptions& opts) {
  const Config file_cfg = opts.config_path.empty()
                              ? Config{}
                              : Config::load_file(opts.config_path);
  const Config cfg = resolve_config(file_cfg, opts);
  const std::string out = cfg.get("run.out");
  fs::create_directories(out);
  write_text((fs::path(out) / "resolved.cfg").string(), cfg.emit());
  if (opts.command == "synth")
    cmd_synth(cfg, out);
  else if (opts.command == "train")
    cmd_train(cfg, out);
  else if (opts.command == "predict")
    cmd_predict(cfg, out, opts.checkpoint_path);
  else
    cmd_eval(cfg, out, opts.checkpoint_path);
}

}  // namespace framepred

// CLI11 lives in the implementation file only.
#include "CLI11.hpp"

namespace framepred {

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"framepred: multi-scale adversarial next-frame video prediction"};
  app.require_subcommand(1);
  CliOptions opts;
  auto add_common = [&opts](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "Config file (key = value)");
    sub->add_option("--seed", opts.seed, "Master seed (overrides run.seed)");
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--preset", opts.preset,
                    "Training preset: l2|l1|gdl-l1|gdl-l2|adv|adv-gdl");
  };
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic dataset");
  CLI::App* train = app.add_subcommand("train", "Train a model");
  CLI::App* predict =
      app.add_subcommand("predict", "Predict frames with a checkpoint");
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  for (CLI::App* sub : {synth, train, predict, eval}) add_common(sub);
  for (CLI::App* sub : {predict, eval})
    sub->add_option("--checkpoint", opts.checkpoint_path, "Checkpoint file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  opts.command = app.get_subcommands().front()->get_name();
  try {
    run_command(opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace framepred
