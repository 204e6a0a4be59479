#pragma once

#include <functional>
#include <string>

#include "framepred/data.hpp"
#include "framepred/losses.hpp"
#include "framepred/model.hpp"

namespace framepred {

struct TrainConfig {
  LossWeights weights;
  float rho_g_initial = 0.04f;
  float rho_g_final = 0.005f;
  int64_t rho_g_interval = 0;  // decay stage length in steps; 0 = auto
  float rho_d = 0.02f;
  int batch = 4;
  int64_t steps = 0;
  uint64_t seed = 0;
  bool adversarial = false;
  int64_t log_every = 50;
  int64_t checkpoint_every = 0;  // 0 = final checkpoint only

  void validate() const;

  /// Piecewise-constant geometric decay from rho_g_initial, reaching exactly
  /// rho_g_final at 75% of the configured steps. Non-increasing.
  float rho_g_at(int64_t step) const;
};

struct Checkpoint {
  uint16_t version = 1;
  ModelSpec spec;
  bool adversarial = false;
  ParamStore<float> g_params;
  ParamStore<float> d_params;  // empty unless adversarial
  int64_t step = 0;
  std::string rng_state_g;
  std::string rng_state_d;
};

struct TrainLogEntry {
  int64_t step = 0;     // just-completed step, 0-based
  double loss_g = 0;    // combined generator objective, pre-update
  double loss_d = 0;    // discriminator objective, pre-update (adversarial only)
  double term_lp = 0;   // unweighted
  double term_gdl = 0;  // unweighted
  double term_adv = 0;  // unweighted
  float rho_g = 0;
  uint64_t g_hash = 0;
};

using TrainLogFn = std::function<void(const TrainLogEntry&)>;
using CheckpointSink = std::function<void(const Checkpoint&)>;

/// Stacks dataset samples into batch tensors (N, ch, H, W).
Tensor<float> stack_batch_x(const Dataset& data, const std::vector<size_t>& idx);
Tensor<float> stack_batch_y(const Dataset& data, const std::vector<size_t>& idx);

/// One SGD update of the discriminator on the adversarial D objective with
/// the generator frozen (predictions are detached). Returns the pre-update
/// loss. Requires an adversarial config.
double train_step_d(const TrainConfig& config, const ModelSpec& spec,
                    ParamStore<float>& g_params, ParamStore<float>& d_params,
                    const Tensor<float>& batch_x, const Tensor<float>& batch_y,
                    float rho_d);

/// One SGD update of the generator on the combined objective with the
/// discriminator weights frozen. Returns the pre-update loss.
double train_step_g(const TrainConfig& config, const ModelSpec& spec,
                    ParamStore<float>& g_params, ParamStore<float>* d_params,
                    const Tensor<float>& batch_x, const Tensor<float>& batch_y,
                    float rho_g, CombinedTerms* terms = nullptr);

/// Alternating (D then G) or plain (G only) training, fully deterministic for
/// a fixed seed. D-batch and G-batch sampling use independent RNG streams
/// derived from the seed, so the sequence of G batches does not depend on
/// whether the D path runs. Aborts with DivergenceError on non-finite loss.
Checkpoint train_loop(const TrainConfig& config, const ModelSpec& spec,
                      const Dataset& data, const TrainLogFn& log = {},
                      const CheckpointSink& checkpoint_sink = {});

/// Binary checkpoint: magic "FPCK", version, canonical architecture text,
/// parameter records (name, shape, little-endian f32 data), step counter,
/// RNG states. Round-trips bit-exactly.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace framepred
