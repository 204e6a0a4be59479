#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "framepred/rng.hpp"
#include "framepred/tensor.hpp"

namespace framepred {

// ---------------------------------------------------------------------------
// PGM/PPM frame I/O. Frames are (channels, h, w) float tensors holding byte
// values in [0, 255]; PPM data is stored as planar R, G, B.
// ---------------------------------------------------------------------------

/// Reads a binary P5 (grayscale) or P6 (RGB) file with 8-bit samples.
Tensor<float> read_pnm(const std::string& path);

/// Writes P5 for 1-channel and P6 for 3-channel frames. Values are clamped
/// to [0, 255] and rounded half-up to bytes.
void write_pnm(const std::string& path, const Tensor<float>& frame);

/// All .pgm/.ppm files of a directory in lexicographic filename order.
/// Every frame must have identical dimensions.
std::vector<Tensor<float>> load_frame_sequence(const std::string& directory);

// ---------------------------------------------------------------------------
// Normalization: bytes [0,255] <-> model range [-1,1], x -> x/127.5 - 1.
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> normalize_frames(const Tensor<T>& frames);
/// Inverse map, clamped to [0, 255]. Rounding to bytes happens at export.
template <typename T>
Tensor<T> denormalize_frames(const Tensor<T>& frames);

// ---------------------------------------------------------------------------
// Samples and datasets
// ---------------------------------------------------------------------------

/// One training example: m input frames and n target frames, stacked along
/// channels, values in [-1, 1].
struct ClipSample {
  Tensor<float> x;  // (m*c, h, w)
  Tensor<float> y;  // (n*c, h, w)
  std::string source_id;
  int origin_t = 0;  // first frame index of the window
  int origin_r = 0;  // patch top row
  int origin_c = 0;  // patch left column
  int mode_label = -1;  // bimodal datasets record the sampled mode here
};

struct DatasetSpec {
  std::string source;  // "synth-bouncing", "synth-bimodal", or a directory
  int patch_size = 32;
  double motion_threshold = 0.01;  // tau, on the normalized scale
  int channels = 1;
  uint64_t seed = 0;
  void validate() const;
};

class Dataset {
 public:
  virtual ~Dataset() = default;
  virtual size_t size() const = 0;
  virtual const ClipSample& at(size_t i) const = 0;
};

class VectorDataset final : public Dataset {
 public:
  VectorDataset() = default;
  explicit VectorDataset(std::vector<ClipSample> samples)
      : samples_(std::move(samples)) {}
  size_t size() const override { return samples_.size(); }
  const ClipSample& at(size_t i) const override { return samples_.at(i); }
  void push(ClipSample s) { samples_.push_back(std::move(s)); }

 private:
  std::vector<ClipSample> samples_;
};

/// Uniformly random spatio-temporal patches whose mean per-pixel squared
/// temporal difference over the m+n window (normalized scale) reaches the
/// threshold. Rejection-sampled; throws DataError when the retry budget runs
/// out (static source or threshold too high).
std::vector<ClipSample> sample_patches(const std::vector<Tensor<float>>& frames,
                                       int patch_size, double motion_threshold,
                                       int m, int n, int count, Rng& rng,
                                       const std::string& source_id = "",
                                       int max_retries_per_sample = 1000);

// ---------------------------------------------------------------------------
// Synthetic sources
// ---------------------------------------------------------------------------

struct BouncingParams {
  int canvas = 32;
  int frames = 20;
  int shapes = 2;
  int min_size = 3;
  int max_size = 6;
  int min_speed = 1;  // per-axis speed magnitude range, pixels per frame
  int max_speed = 3;
  int channels = 1;
  void validate() const;
};

/// Rectangles and discs translating with elastic boundary reflection, no
/// anti-aliasing. Frames in [0, 255]; deterministic per seed.
std::vector<Tensor<float>> synth_bouncing_shapes(const BouncingParams& params,
                                                 uint64_t seed);

struct BimodalParams {
  int canvas = 16;
  int dot = 2;   // dot side length
  int m = 4;     // input frames showing the rightward approach
  int channels = 1;
  void validate() const;
  /// Valid ranges of the dot start position (top-left corner).
  std::pair<int, int> row_range() const;  // inclusive
  std::pair<int, int> col_range() const;
};

/// One sample of the two-mode toy task: X shows a dot moving right one pixel
/// per frame; Y continues either up-right (mode 0) or down-right (mode 1)
/// with equal probability. origin_r/origin_c record the start position.
ClipSample synth_bimodal_sample(const BimodalParams& params, Rng& rng);

/// The two possible continuations for the sample's input, normalized.
/// first = mode 0 (up-right), second = mode 1 (down-right).
std::pair<Tensor<float>, Tensor<float>> bimodal_continuations(
    const BimodalParams& params, const ClipSample& sample);

// Dataset builders shared by the CLI, the tests, and the bindings.
std::vector<ClipSample> sample_bouncing_dataset(const BouncingParams& params,
                                                int clips, int patches_per_clip,
                                                int patch_size,
                                                double motion_threshold, int m,
                                                int n, uint64_t seed);
std::vector<ClipSample> sample_bimodal_dataset(const BimodalParams& params,
                                               int count, uint64_t seed);

extern template Tensor<float> normalize_frames(const Tensor<float>&);
extern template Tensor<double> normalize_frames(const Tensor<double>&);
extern template Tensor<float> denormalize_frames(const Tensor<float>&);
extern template Tensor<double> denormalize_frames(const Tensor<double>&);

}  // namespace framepred
