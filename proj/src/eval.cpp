#include "framepred/eval.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace framepred {

namespace {

constexpr double kFloor = 1e-10;
constexpr double kPeak = 255.0;

void check_image_pair(const Tensor<float>& target, const Tensor<float>& pred,
                      const EvalMask* mask, const char* op) {
  if (target.rank() != 3 || pred.rank() != 3)
    throw ShapeError(std::string(op) + ": images must be (channels, h, w)");
  if (!shape_eq(target.shape(), pred.shape()))
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(target.shape()) + " vs " +
                     shape_str(pred.shape()));
  if (mask && (mask->h != target.dim(1) || mask->w != target.dim(2)))
    throw ShapeError(std::string(op) + ": mask size " +
                     shape_str({mask->h, mask->w}) + " does not match image " +
                     shape_str(target.shape()));
}

std::vector<double> to_luma(const Tensor<float>& img) {
  const int c = img.dim(0), h = img.dim(1), w = img.dim(2);
  const size_t plane = static_cast<size_t>(h) * w;
  std::vector<double> out(plane);
  if (c == 1) {
    for (size_t i = 0; i < plane; ++i) out[i] = img.data()[i];
  } else if (c == 3) {
    for (size_t i = 0; i < plane; ++i)
      out[i] = 0.299 * img.data()[i] + 0.587 * img.data()[plane + i] +
               0.114 * img.data()[2 * plane + i];
  } else {
    throw ShapeError("metrics expect 1 or 3 channels, got " +
                     std::to_string(c));
  }
  return out;
}

// 11x11 Gaussian window, sigma 1.5, normalized to sum 1.
const std::vector<double>& ssim_window() {
  static const std::vector<double> window = [] {
    std::vector<double> w(11 * 11);
    double total = 0;
    for (int i = 0; i < 11; ++i)
      for (int j = 0; j < 11; ++j) {
        const double dy = i - 5, dx = j - 5;
        const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * 1.5 * 1.5));
        w[static_cast<size_t>(i) * 11 + j] = v;
        total += v;
      }
    for (double& v : w) v /= total;
    return w;
  }();
  return window;
}

}  // namespace

EvalMask EvalMask::full(int h, int w) {
  EvalMask m;
  m.h = h;
  m.w = w;
  m.on.assign(static_cast<size_t>(h) * w, 1);
  return m;
}

int64_t EvalMask::count() const {
  int64_t n = 0;
  for (uint8_t v : on) n += v != 0;
  return n;
}

double EvalMask::coverage() const {
  return on.empty() ? 0.0
                    : static_cast<double>(count()) /
                          static_cast<double>(on.size());
}

double psnr(const Tensor<float>& target, const Tensor<float>& pred,
            const EvalMask* mask) {
  check_image_pair(target, pred, mask, "psnr");
  const int c = target.dim(0), h = target.dim(1), w = target.dim(2);
  const size_t plane = static_cast<size_t>(h) * w;
  double acc = 0;
  int64_t n = 0;
  for (int r = 0; r < h; ++r)
    for (int col = 0; col < w; ++col) {
      if (mask && !mask->at(r, col)) continue;
      for (int ch = 0; ch < c; ++ch) {
        const size_t i = static_cast<size_t>(ch) * plane +
                         static_cast<size_t>(r) * w + col;
        const double d = double(target.data()[i]) - double(pred.data()[i]);
        acc += d * d;
        ++n;
      }
    }
  if (n == 0) throw Error("psnr: empty mask");
  const double mse = std::max(acc / static_cast<double>(n), kFloor);
  return 10.0 * std::log10(kPeak * kPeak / mse);
}

double ssim(const Tensor<float>& target, const Tensor<float>& pred,
            const EvalMask* mask) {
  check_image_pair(target, pred, mask, "ssim");
  const int h = target.dim(1), w = target.dim(2);
  if (h < 11 || w < 11)
    throw Error("ssim: image " + shape_str({h, w}) +
                " smaller than the 11x11 window");
  const std::vector<double> y = to_luma(target);
  const std::vector<double> yhat = to_luma(pred);
  const std::vector<double>& win = ssim_window();
  const double c1 = (0.01 * kPeak) * (0.01 * kPeak);
  const double c2 = (0.03 * kPeak) * (0.03 * kPeak);
  double acc = 0;
  int64_t n = 0;
  for (int r = 5; r <= h - 6; ++r)
    for (int col = 5; col <= w - 6; ++col) {
      if (mask && !mask->at(r, col)) continue;
      double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
      for (int i = 0; i < 11; ++i)
        for (int j = 0; j < 11; ++j) {
          const double wgt = win[static_cast<size_t>(i) * 11 + j];
          const double a = y[static_cast<size_t>(r + i - 5) * w + (col + j - 5)];
          const double b =
              yhat[static_cast<size_t>(r + i - 5) * w + (col + j - 5)];
          mx += wgt * a;
          my += wgt * b;
          mxx += wgt * a * a;
          myy += wgt * b * b;
          mxy += wgt * a * b;
        }
      const double vx = mxx - mx * mx;
      const double vy = myy - my * my;
      const double vxy = mxy - mx * my;
      acc += ((2 * mx * my + c1) * (2 * vxy + c2)) /
             ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++n;
    }
  if (n == 0) throw Error("ssim: no unmasked window centers");
  return acc / static_cast<double>(n);
}

double sharp_diff(const Tensor<float>& target, const Tensor<float>& pred,
                  const EvalMask* mask) {
  check_image_pair(target, pred, mask, "sharp_diff");
  const int c = target.dim(0), h = target.dim(1), w = target.dim(2);
  if (h < 2 || w < 2)
    throw Error("sharp_diff: image too small for gradients");
  const size_t plane = static_cast<size_t>(h) * w;
  double acc = 0;
  int64_t n = 0;
  for (int r = 1; r < h; ++r)
    for (int col = 1; col < w; ++col) {
      if (mask && !mask->at(r, col)) continue;
      for (int ch = 0; ch < c; ++ch) {
        const float* yp = target.data() + static_cast<size_t>(ch) * plane;
        const float* pp = pred.data() + static_cast<size_t>(ch) * plane;
        const size_t i = static_cast<size_t>(r) * w + col;
        const double gy = std::abs(double(yp[i]) - yp[i - w]) +
                          std::abs(double(yp[i]) - yp[i - 1]);
        const double gp = std::abs(double(pp[i]) - pp[i - w]) +
                          std::abs(double(pp[i]) - pp[i - 1]);
        acc += std::abs(gy - gp);
        ++n;
      }
    }
  if (n == 0) throw Error("sharp_diff: empty valid set");
  const double denom = std::max(acc / static_cast<double>(n), kFloor);
  return 10.0 * std::log10(kPeak * kPeak / denom);
}

EvalMask motion_mask(const Tensor<float>& frame_t, const Tensor<float>& frame_prev,
                     double threshold) {
  if (!shape_eq(frame_t.shape(), frame_prev.shape()))
    throw ShapeError("motion_mask: shape mismatch " +
                     shape_str(frame_t.shape()) + " vs " +
                     shape_str(frame_prev.shape()));
  if (frame_t.rank() != 3)
    throw ShapeError("motion_mask: frames must be (channels, h, w)");
  const int c = frame_t.dim(0), h = frame_t.dim(1), w = frame_t.dim(2);
  const size_t plane = static_cast<size_t>(h) * w;
  EvalMask mask;
  mask.h = h;
  mask.w = w;
  mask.on.assign(plane, 0);
  const double limit = threshold * kPeak;
  for (size_t i = 0; i < plane; ++i) {
    double best = 0;
    for (int ch = 0; ch < c; ++ch)
      best = std::max(best,
                      std::abs(double(frame_t.data()[ch * plane + i]) -
                               frame_prev.data()[ch * plane + i]));
    mask.on[i] = best > limit ? 1 : 0;
  }
  return mask;
}

std::vector<Tensor<float>> baseline_last_input(const Tensor<float>& x,
                                               int channels, int frames_out) {
  if (x.rank() != 3 || x.dim(0) < channels || x.dim(0) % channels != 0)
    throw ShapeError("baseline_last_input: input shape " +
                     shape_str(x.shape()) + " is not a stack of " +
                     std::to_string(channels) + "-channel frames");
  const int h = x.dim(1), w = x.dim(2);
  const size_t plane = static_cast<size_t>(h) * w;
  Tensor<float> last({channels, h, w});
  std::copy(x.data() + (static_cast<size_t>(x.dim(0)) - channels) * plane,
            x.data() + static_cast<size_t>(x.dim(0)) * plane, last.data());
  return std::vector<Tensor<float>>(static_cast<size_t>(frames_out), last);
}

namespace {

Tensor<float> frame_of(const Tensor<float>& stacked, int frame, int channels) {
  const int h = stacked.dim(1), w = stacked.dim(2);
  const size_t plane = static_cast<size_t>(h) * w;
  Tensor<float> out({channels, h, w});
  std::copy(stacked.data() + static_cast<size_t>(frame) * channels * plane,
            stacked.data() + static_cast<size_t>(frame + 1) * channels * plane,
            out.data());
  return out;
}

Tensor<float> with_batch_dim(const Tensor<float>& t) {
  Tensor<float> out({1, t.dim(0), t.dim(1), t.dim(2)},
                    std::vector<float>(t.vec()));
  return out;
}

void add_frame_metrics(FrameReport& report, const Tensor<float>& truth,
                       const Tensor<float>& pred, const EvalMask& mask) {
  report.psnr_full.add(psnr(truth, pred, nullptr));
  report.ssim_full.add(ssim(truth, pred, nullptr));
  report.sharp_full.add(sharp_diff(truth, pred, nullptr));
  report.coverage.add(mask.coverage());
  if (mask.count() > 0) {
    report.psnr_masked.add(psnr(truth, pred, &mask));
    // the SSIM window and gradient valid regions may still be empty under a
    // sparse border-only mask; guard individually
    bool ssim_ok = false;
    const int h = truth.dim(1), w = truth.dim(2);
    for (int r = 5; r <= h - 6 && !ssim_ok; ++r)
      for (int c = 5; c <= w - 6; ++c)
        if (mask.at(r, c)) {
          ssim_ok = true;
          break;
        }
    if (ssim_ok) report.ssim_masked.add(ssim(truth, pred, &mask));
    bool sharp_ok = false;
    for (int r = 1; r < h && !sharp_ok; ++r)
      for (int c = 1; c < w; ++c)
        if (mask.at(r, c)) {
          sharp_ok = true;
          break;
        }
    if (sharp_ok) report.sharp_masked.add(sharp_diff(truth, pred, &mask));
  }
}

}  // namespace

MetricsReport evaluate_model(const Checkpoint& ckpt, const Dataset& data,
                             int steps, double mask_threshold) {
  if (data.size() == 0) throw DataError("evaluate_model: empty dataset");
  if (steps < 1) throw Error("evaluate_model: steps must be >= 1");
  const ModelSpec& spec = ckpt.spec;
  const int c = spec.g.channels;
  const int n = spec.g.out_frames;
  const int frames = n * steps;

  MetricsReport report;
  report.frames = frames;
  report.mask_threshold = mask_threshold;
  report.model.resize(static_cast<size_t>(frames));
  report.baseline.resize(static_cast<size_t>(frames));

  ParamStore<float> params = ckpt.g_params;  // shares storage; read-only use
  for (size_t si = 0; si < data.size(); ++si) {
    const ClipSample& sample = data.at(si);
    if (sample.y.dim(0) < frames * c)
      throw DataError("evaluate_model: sample " + std::to_string(si) + " has " +
                      std::to_string(sample.y.dim(0) / c) +
                      " target frames, rollout needs " + std::to_string(frames));
    const std::vector<Tensor<float>> rollout = recursive_predict(
        spec.g, spec.scales, params, with_batch_dim(sample.x), steps);
    // flatten rollout steps into per-frame denormalized images
    std::vector<Tensor<float>> pred_frames;
    for (const Tensor<float>& block : rollout)
      for (int f = 0; f < n; ++f) {
        Tensor<float> stacked({block.dim(1), block.dim(2), block.dim(3)},
                              std::vector<float>(block.vec()));
        pred_frames.push_back(denormalize_frames(frame_of(stacked, f, c)));
      }
    const std::vector<Tensor<float>> base_frames = baseline_last_input(
        denormalize_frames(sample.x), c, frames);
    Tensor<float> prev_truth =
        denormalize_frames(frame_of(sample.x, spec.g.in_frames - 1, c));
    for (int j = 0; j < frames; ++j) {
      const Tensor<float> truth = denormalize_frames(frame_of(sample.y, j, c));
      const EvalMask mask = motion_mask(truth, prev_truth, mask_threshold);
      add_frame_metrics(report.model[static_cast<size_t>(j)], truth,
                        pred_frames[static_cast<size_t>(j)], mask);
      add_frame_metrics(report.baseline[static_cast<size_t>(j)], truth,
                        base_frames[static_cast<size_t>(j)], mask);
      prev_truth = truth;
    }
  }
  report.samples = static_cast<int64_t>(data.size());
  return report;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

void emit_record(std::ostringstream& os, int frame, const char* variant,
                 const char* metric, const char* domain,
                 const MetricAccum& acc) {
  os << "frame=" << frame << " variant=" << variant << " metric=" << metric
     << " domain=" << domain << " value=" << (acc.any() ? fmt(acc.mean()) : "nan")
     << " n=" << acc.n << "\n";
}

}  // namespace

std::string report_records(const MetricsReport& report) {
  std::ostringstream os;
  os << "samples=" << report.samples
     << " frames=" << report.frames
     << " mask_threshold=" << fmt(report.mask_threshold) << "\n";
  for (int j = 0; j < report.frames; ++j) {
    for (const bool is_model : {true, false}) {
      const FrameReport& fr = is_model ? report.model[static_cast<size_t>(j)]
                                       : report.baseline[static_cast<size_t>(j)];
      const char* variant = is_model ? "model" : "last_input";
      emit_record(os, j + 1, variant, "psnr", "masked", fr.psnr_masked);
      emit_record(os, j + 1, variant, "ssim", "masked", fr.ssim_masked);
      emit_record(os, j + 1, variant, "sharp_diff", "masked", fr.sharp_masked);
      emit_record(os, j + 1, variant, "psnr", "full", fr.psnr_full);
      emit_record(os, j + 1, variant, "ssim", "full", fr.ssim_full);
      emit_record(os, j + 1, variant, "sharp_diff", "full", fr.sharp_full);
      emit_record(os, j + 1, variant, "coverage", "full", fr.coverage);
    }
  }
  return os.str();
}

std::string report_table(const MetricsReport& report) {
  std::ostringstream os;
  os << "frame  variant     psnr(m)   ssim(m)  sharp(m)   psnr(f)   ssim(f)  "
        "sharp(f)  coverage\n";
  auto cell = [](const MetricAccum& a) {
    std::ostringstream c;
    c << std::setw(9) << (a.any() ? fmt(a.mean()).substr(0, 8) : "     n/a");
    return c.str();
  };
  for (int j = 0; j < report.frames; ++j) {
    for (const bool is_model : {true, false}) {
      const FrameReport& fr = is_model ? report.model[static_cast<size_t>(j)]
                                       : report.baseline[static_cast<size_t>(j)];
      os << std::setw(5) << (j + 1) << "  " << std::setw(10) << std::left
         << (is_model ? "model" : "last_input") << std::right
         << cell(fr.psnr_masked) << " " << cell(fr.ssim_masked) << " "
         << cell(fr.sharp_masked) << " " << cell(fr.psnr_full) << " "
         << cell(fr.ssim_full) << " " << cell(fr.sharp_full) << " "
         << cell(fr.coverage) << "\n";
    }
  }
  return os.str();
}

}  // namespace framepred
