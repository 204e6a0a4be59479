// Independent reference implementations used as test oracles. Everything here
// is a direct, naive transcription of the defining formulas, structured
// differently from the library code on purpose: six plain nested loops for
// convolution, direct summations for the metrics. Keep this file free of
// library compute calls.
#pragma once

#include <cmath>
#include <vector>

#include "framepred/rng.hpp"
#include "framepred/tensor.hpp"

namespace oracles {

using framepred::Rng;
using framepred::Shape;
using framepred::Tensor;

template <typename T>
Tensor<T> random_tensor(const Shape& shape, Rng& rng, double lo = -1.0,
                        double hi = 1.0) {
  Tensor<T> t{shape};
  for (int64_t i = 0; i < t.numel(); ++i)
    t.data()[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
double max_abs_diff(const Tensor<T>& a, const Tensor<T>& b) {
  double m = 0;
  for (int64_t i = 0; i < a.numel(); ++i)
    m = std::max(m, std::abs(double(a.data()[i]) - double(b.data()[i])));
  return m;
}

template <typename T>
double max_rel_diff(const Tensor<T>& a, const Tensor<T>& b) {
  double m = 0;
  for (int64_t i = 0; i < a.numel(); ++i) {
    const double x = a.data()[i], y = b.data()[i];
    m = std::max(m, std::abs(x - y) / std::max(1.0, std::max(std::abs(x), std::abs(y))));
  }
  return m;
}

// Six nested loops, straight from the definition of a zero-padded valid
// cross-correlation.
template <typename T>
Tensor<T> conv2d_ref(const Tensor<T>& in, const Tensor<T>& w,
                     const Tensor<T>& b, int pad) {
  const int n_batch = in.dim(0), ic = in.dim(1), h = in.dim(2), wd = in.dim(3);
  const int oc = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const int oh = h + 2 * pad - kh + 1, ow = wd + 2 * pad - kw + 1;
  Tensor<T> out({n_batch, oc, oh, ow});
  for (int n = 0; n < n_batch; ++n)
    for (int o = 0; o < oc; ++o)
      for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
          double acc = b.data()[o];
          for (int c = 0; c < ic; ++c)
            for (int ky = 0; ky < kh; ++ky)
              for (int kx = 0; kx < kw; ++kx) {
                const int iy = y + ky - pad, ix = x + kx - pad;
                if (iy < 0 || iy >= h || ix < 0 || ix >= wd) continue;
                acc += double(in.at4(n, c, iy, ix)) * w.at4(o, c, ky, kx);
              }
          out.at4(n, o, y, x) = static_cast<T>(acc);
        }
  return out;
}

template <typename T>
Tensor<T> linear_ref(const Tensor<T>& in, const Tensor<T>& w,
                     const Tensor<T>& b) {
  const int n_batch = in.dim(0), f = in.dim(1), o = w.dim(0);
  Tensor<T> out({n_batch, o});
  for (int n = 0; n < n_batch; ++n)
    for (int i = 0; i < o; ++i) {
      double acc = b.data()[i];
      for (int j = 0; j < f; ++j)
        acc += double(in.data()[n * f + j]) * w.data()[i * f + j];
      out.data()[n * o + i] = static_cast<T>(acc);
    }
  return out;
}

// Mean over an arbitrary square window; factor-4 one-shot mean is the oracle
// for two applications of the 2x2 average.
template <typename T>
Tensor<T> mean_pool_ref(const Tensor<T>& in, int factor) {
  const int n_batch = in.dim(0), c = in.dim(1), h = in.dim(2), w = in.dim(3);
  Tensor<T> out({n_batch, c, h / factor, w / factor});
  for (int n = 0; n < n_batch; ++n)
    for (int ch = 0; ch < c; ++ch)
      for (int y = 0; y < h / factor; ++y)
        for (int x = 0; x < w / factor; ++x) {
          double acc = 0;
          for (int dy = 0; dy < factor; ++dy)
            for (int dx = 0; dx < factor; ++dx)
              acc += in.at4(n, ch, y * factor + dy, x * factor + dx);
          out.at4(n, ch, y, x) = static_cast<T>(acc / (factor * factor));
        }
  return out;
}

// ---------------------------------------------------------------------------
// Metric references: direct transcriptions of the formulas on (c,h,w) images
// in [0,255]. mask==nullptr means all pixels; mask entries are row-major h*w.
// ---------------------------------------------------------------------------

inline double psnr_ref(const Tensor<float>& y, const Tensor<float>& yhat,
                       const std::vector<uint8_t>* mask = nullptr) {
  const int c = y.dim(0), h = y.dim(1), w = y.dim(2);
  double sum = 0;
  long n = 0;
  for (int ch = 0; ch < c; ++ch)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        if (mask && !(*mask)[size_t(i) * w + j]) continue;
        const double d = double(y.data()[(size_t(ch) * h + i) * w + j]) -
                         double(yhat.data()[(size_t(ch) * h + i) * w + j]);
        sum += d * d;
        ++n;
      }
  const double mse = std::max(sum / n, 1e-10);
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

inline double sharp_diff_ref(const Tensor<float>& y, const Tensor<float>& yhat,
                             const std::vector<uint8_t>* mask = nullptr) {
  const int c = y.dim(0), h = y.dim(1), w = y.dim(2);
  double sum = 0;
  long n = 0;
  auto px = [&](const Tensor<float>& img, int ch, int i, int j) {
    return double(img.data()[(size_t(ch) * h + i) * w + j]);
  };
  for (int ch = 0; ch < c; ++ch)
    for (int i = 1; i < h; ++i)
      for (int j = 1; j < w; ++j) {
        if (mask && !(*mask)[size_t(i) * w + j]) continue;
        const double grad_y = std::abs(px(y, ch, i, j) - px(y, ch, i - 1, j)) +
                              std::abs(px(y, ch, i, j) - px(y, ch, i, j - 1));
        const double grad_p =
            std::abs(px(yhat, ch, i, j) - px(yhat, ch, i - 1, j)) +
            std::abs(px(yhat, ch, i, j) - px(yhat, ch, i, j - 1));
        sum += std::abs(grad_y - grad_p);
        ++n;
      }
  const double denom = std::max(sum / n, 1e-10);
  return 10.0 * std::log10(255.0 * 255.0 / denom);
}

inline double ssim_ref(const Tensor<float>& y, const Tensor<float>& yhat,
                       const std::vector<uint8_t>* mask = nullptr) {
  const int c = y.dim(0), h = y.dim(1), w = y.dim(2);
  std::vector<double> a(size_t(h) * w), b(size_t(h) * w);
  for (int i = 0; i < h * w; ++i) {
    if (c == 1) {
      a[i] = y.data()[i];
      b[i] = yhat.data()[i];
    } else {
      a[i] = 0.299 * y.data()[i] + 0.587 * y.data()[h * w + i] +
             0.114 * y.data()[2 * h * w + i];
      b[i] = 0.299 * yhat.data()[i] + 0.587 * yhat.data()[h * w + i] +
             0.114 * yhat.data()[2 * h * w + i];
    }
  }
  // gaussian weights
  std::vector<double> g(121);
  double total = 0;
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j) {
      g[size_t(i + 5) * 11 + (j + 5)] = std::exp(-(i * i + j * j) / 4.5);
      total += g[size_t(i + 5) * 11 + (j + 5)];
    }
  for (double& v : g) v /= total;
  const double c1 = 6.5025, c2 = 58.5225;  // (0.01*255)^2, (0.03*255)^2
  double acc = 0;
  long n = 0;
  for (int i = 5; i + 5 < h; ++i)
    for (int j = 5; j + 5 < w; ++j) {
      if (mask && !(*mask)[size_t(i) * w + j]) continue;
      double ma = 0, mb = 0;
      for (int di = -5; di <= 5; ++di)
        for (int dj = -5; dj <= 5; ++dj) {
          const double wt = g[size_t(di + 5) * 11 + (dj + 5)];
          ma += wt * a[size_t(i + di) * w + (j + dj)];
          mb += wt * b[size_t(i + di) * w + (j + dj)];
        }
      double va = 0, vb = 0, vab = 0;
      for (int di = -5; di <= 5; ++di)
        for (int dj = -5; dj <= 5; ++dj) {
          const double wt = g[size_t(di + 5) * 11 + (dj + 5)];
          const double da = a[size_t(i + di) * w + (j + dj)] - ma;
          const double db = b[size_t(i + di) * w + (j + dj)] - mb;
          va += wt * da * da;
          vb += wt * db * db;
          vab += wt * da * db;
        }
      acc += ((2 * ma * mb + c1) * (2 * vab + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++n;
    }
  return acc / n;
}

}  // namespace oracles
