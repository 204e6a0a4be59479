#pragma once

#include <string>
#include <vector>

#include "framepred/data.hpp"
#include "framepred/training.hpp"

namespace framepred {

/// Per-pixel evaluation mask; a set bit means the pixel participates.
struct EvalMask {
  int h = 0, w = 0;
  std::vector<uint8_t> on;

  static EvalMask full(int h, int w);
  bool at(int r, int c) const {
    return on[static_cast<size_t>(r) * w + c] != 0;
  }
  int64_t count() const;
  double coverage() const;
};

// Metrics operate on denormalized images (channels, h, w) in [0, 255].
// A null mask means the full image.

/// 10*log10(255^2 / MSE) over unmasked pixels; the MSE is floored at 1e-10,
/// which caps the score for identical images. Throws on an empty mask.
double psnr(const Tensor<float>& target, const Tensor<float>& pred,
            const EvalMask* mask = nullptr);

/// Mean structural similarity with the standard 11x11 Gaussian window
/// (sigma 1.5), C1=(0.01*255)^2, C2=(0.03*255)^2. RGB inputs are converted
/// to luma first. A window counts when its center pixel is unmasked; centers
/// keep the window inside the image. Throws if the image is smaller than the
/// window or no window qualifies.
double ssim(const Tensor<float>& target, const Tensor<float>& pred,
            const EvalMask* mask = nullptr);

/// 10*log10(255^2 / mean |(grad_i Y + grad_j Y) - (grad_i Yhat + grad_j Yhat)|)
/// using absolute forward differences; valid positions exclude the first row
/// and column. Denominator floored at 1e-10.
double sharp_diff(const Tensor<float>& target, const Tensor<float>& pred,
                  const EvalMask* mask = nullptr);

/// Temporal-difference motion mask between consecutive ground-truth frames in
/// [0, 255]: a pixel is evaluated when the max-channel absolute difference
/// exceeds threshold (given on the [0, 1] scale, default 0.2).
EvalMask motion_mask(const Tensor<float>& frame_t, const Tensor<float>& frame_prev,
                     double threshold = 0.2);

/// The trivial baseline: repeats the last input frame for every predicted
/// step. Input (m*c, h, w), output `frames_out` copies of the final frame.
std::vector<Tensor<float>> baseline_last_input(const Tensor<float>& x,
                                               int channels, int frames_out);

struct MetricAccum {
  double sum = 0;
  int64_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  bool any() const { return n > 0; }
  double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
};

struct FrameReport {
  MetricAccum psnr_masked, ssim_masked, sharp_masked;
  MetricAccum psnr_full, ssim_full, sharp_full;
  MetricAccum coverage;  // over all samples, including zero-motion ones
};

struct MetricsReport {
  int frames = 0;       // predicted frames per sample
  int64_t samples = 0;
  double mask_threshold = 0.2;
  std::vector<FrameReport> model;
  std::vector<FrameReport> baseline;
};

/// Runs recursive prediction over the dataset and reports per-frame masked
/// and full-image metrics for the model and the last-input baseline. Samples
/// whose mask is empty contribute coverage 0 and no masked metric values.
MetricsReport evaluate_model(const Checkpoint& ckpt, const Dataset& data,
                             int steps, double mask_threshold = 0.2);

/// Line-oriented records, one per frame index per metric.
std::string report_records(const MetricsReport& report);
/// Human-readable table.
std::string report_table(const MetricsReport& report);

}  // namespace framepred
