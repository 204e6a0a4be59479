#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "framepred/graph.hpp"
#include "framepred/rng.hpp"

namespace framepred {

/// Square pyramid sizes: s_k = base_size * 2^(k-1) for k = 1..n_scales,
/// coarse to fine. The finest scale is the native clip size used in training;
/// the generator itself is fully convolutional and runs on any input whose
/// spatial size is divisible by 2^(n_scales - 1).
struct ScaleConfig {
  int n_scales = 1;
  int base_size = 32;

  int size_at(int k) const { return base_size << (k - 1); }  // k is 1-based
  int top_size() const { return size_at(n_scales); }
  int divisor() const { return 1 << (n_scales - 1); }
  void validate() const;
};

struct GeneratorScale {
  std::vector<int> maps;     // hidden feature-map counts
  std::vector<int> kernels;  // one per conv layer: maps.size() + 1 entries
};

struct GeneratorSpec {
  int in_frames = 4;   // m
  int out_frames = 1;  // n
  int channels = 1;    // c, per frame
  Upsample upsample_mode = Upsample::kBilinear;
  std::vector<GeneratorScale> scales;  // coarse to fine

  int in_channels(int k) const {  // k is 1-based
    return k == 1 ? in_frames * channels
                  : (in_frames + out_frames) * channels;
  }
  int out_channels() const { return out_frames * channels; }
  void validate(const ScaleConfig& sc) const;
};

struct DiscriminatorScale {
  std::vector<int> maps;
  std::vector<int> kernels;  // one per conv layer, applied with no padding
  bool pool = false;         // trailing 2x2 max pool after the convolutions
  std::vector<int> fc;       // hidden sizes; the final single unit is implicit
};

struct DiscriminatorSpec {
  int in_frames = 4;
  int out_frames = 1;
  int channels = 1;
  std::vector<DiscriminatorScale> scales;

  int in_channels() const { return (in_frames + out_frames) * channels; }
  /// Spatial size after the unpadded convolutions (and pool) at scale k.
  int conv_out_size(int k, const ScaleConfig& sc) const;
  void validate(const ScaleConfig& sc) const;
};

struct ModelSpec {
  ScaleConfig scales;
  GeneratorSpec g;
  DiscriminatorSpec d;
  void validate() const;
};

/// Named architecture presets ("table1-4to1", "table3-8to8").
ModelSpec model_preset(const std::string& name, int channels);
bool is_model_preset(const std::string& name);

/// Canonical text form of a model spec. Stable line order; round-trips
/// exactly. This is the form embedded in checkpoints.
std::string model_spec_to_text(const ModelSpec& spec);
ModelSpec model_spec_from_text(const std::string& text);

/// Per-scale downscaled copies of an input clip X and target clip Y,
/// index 0 = coarsest. The finest entry is the clip itself; each coarser
/// entry is the 2x2 average of the one above.
template <typename T>
struct Pyramid {
  std::vector<Tensor<T>> x;
  std::vector<Tensor<T>> y;  // empty when no targets were supplied
};

/// Builds the pyramid by repeated 2x2 averaging. `y` may be undefined.
template <typename T>
Pyramid<T> build_pyramid(const Tensor<T>& x, const Tensor<T>& y,
                         const ScaleConfig& scales);

template <typename T>
ParamStore<T> init_generator_params(const GeneratorSpec& spec, uint64_t seed);

template <typename T>
ParamStore<T> init_discriminator_params(const DiscriminatorSpec& spec,
                                        const ScaleConfig& sc, uint64_t seed);

/// Coarse-to-fine prediction. Scale 1 sees only X_1; scale k sees X_k
/// concatenated with the upsampled previous prediction, predicts a residual
/// through a Tanh-terminated conv stack, and the sum is clamped to [-1, 1].
/// Returns one prediction per scale, coarse to fine. With trainable=false the
/// result is detached from the parameter store.
template <typename T>
std::vector<Var<T>> generator_forward(Graph<T>& g, const GeneratorSpec& spec,
                                      ParamStore<T>& params,
                                      const Pyramid<T>& pyramid,
                                      bool trainable);

/// D_k applied to the channel concatenation of the scale-k input sequence and
/// the candidate future frames. Output shape (batch, 1), values in [0, 1].
/// Rejects inputs whose spatial size is not exactly s_k.
template <typename T>
Var<T> discriminator_forward(Graph<T>& g, const DiscriminatorSpec& spec,
                             const ScaleConfig& sc, ParamStore<T>& params,
                             Var<T> x_k, Var<T> candidate_k, int k,
                             bool trainable);

/// Applies the generator `steps` times, sliding the input window forward by
/// the model's output frame count after each application. Returns one tensor
/// of n*c channels per step.
template <typename T>
std::vector<Tensor<T>> recursive_predict(const GeneratorSpec& spec,
                                         const ScaleConfig& sc,
                                         ParamStore<T>& params,
                                         const Tensor<T>& seed_frames,
                                         int steps);

extern template struct Pyramid<float>;
extern template struct Pyramid<double>;
extern template Pyramid<float> build_pyramid(const Tensor<float>&,
                                             const Tensor<float>&,
                                             const ScaleConfig&);
extern template Pyramid<double> build_pyramid(const Tensor<double>&,
                                              const Tensor<double>&,
                                              const ScaleConfig&);
extern template ParamStore<float> init_generator_params(const GeneratorSpec&,
                                                        uint64_t);
extern template ParamStore<double> init_generator_params(const GeneratorSpec&,
                                                         uint64_t);
extern template ParamStore<float> init_discriminator_params(
    const DiscriminatorSpec&, const ScaleConfig&, uint64_t);
extern template ParamStore<double> init_discriminator_params(
    const DiscriminatorSpec&, const ScaleConfig&, uint64_t);
extern template std::vector<Var<float>> generator_forward(
    Graph<float>&, const GeneratorSpec&, ParamStore<float>&,
    const Pyramid<float>&, bool);
extern template std::vector<Var<double>> generator_forward(
    Graph<double>&, const GeneratorSpec&, ParamStore<double>&,
    const Pyramid<double>&, bool);
extern template Var<float> discriminator_forward(Graph<float>&,
                                                 const DiscriminatorSpec&,
                                                 const ScaleConfig&,
                                                 ParamStore<float>&, Var<float>,
                                                 Var<float>, int, bool);
extern template Var<double> discriminator_forward(
    Graph<double>&, const DiscriminatorSpec&, const ScaleConfig&,
    ParamStore<double>&, Var<double>, Var<double>, int, bool);
extern template std::vector<Tensor<float>> recursive_predict(
    const GeneratorSpec&, const ScaleConfig&, ParamStore<float>&,
    const Tensor<float>&, int);
extern template std::vector<Tensor<double>> recursive_predict(
    const GeneratorSpec&, const ScaleConfig&, ParamStore<double>&,
    const Tensor<double>&, int);

}  // namespace framepred
