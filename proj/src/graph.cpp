#include "framepred/graph.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <utility>

namespace framepred {

namespace {

template <typename T>
void check_4d(const Tensor<T>& t, const char* op, const char* role) {
  if (t.rank() != 4)
    throw ShapeError(std::string(op) + ": " + role + " must be 4D (N,C,H,W), got " +
                     shape_str(t.shape()));
}

template <typename T>
void conv2d_fwd(const Tensor<T>& in, const Tensor<T>& w, const Tensor<T>& b,
                int pad, Tensor<T>& out) {
  const int N = in.dim(0), IC = in.dim(1), H = in.dim(2), W = in.dim(3);
  const int OC = w.dim(0), KH = w.dim(2), KW = w.dim(3);
  const int OH = out.dim(2), OW = out.dim(3);
  const T* ip = in.data();
  const T* wp = w.data();
  const T* bp = b.data();
  T* op = out.data();
  for (int n = 0; n < N; ++n) {
    for (int oc = 0; oc < OC; ++oc) {
      T* oplane = op + (static_cast<size_t>(n) * OC + oc) * OH * OW;
      std::fill(oplane, oplane + static_cast<size_t>(OH) * OW, bp[oc]);
      for (int ic = 0; ic < IC; ++ic) {
        const T* iplane = ip + (static_cast<size_t>(n) * IC + ic) * H * W;
        const T* wk = wp + (static_cast<size_t>(oc) * IC + ic) * KH * KW;
        for (int kh = 0; kh < KH; ++kh) {
          for (int kw = 0; kw < KW; ++kw) {
            const T wv = wk[kh * KW + kw];
            const int oh0 = std::max(0, pad - kh);
            const int oh1 = std::min(OH, H + pad - kh);
            const int ow0 = std::max(0, pad - kw);
            const int ow1 = std::min(OW, W + pad - kw);
            for (int oh = oh0; oh < oh1; ++oh) {
              const T* irow =
                  iplane + static_cast<size_t>(oh + kh - pad) * W + (ow0 + kw - pad);
              T* orow = oplane + static_cast<size_t>(oh) * OW + ow0;
              for (int i = 0; i < ow1 - ow0; ++i) orow[i] += wv * irow[i];
            }
          }
        }
      }
    }
  }
}

template <typename T>
void conv2d_bwd(Tensor<T>& in, Tensor<T>& w, Tensor<T>& b, int pad,
                const Tensor<T>& out) {
  const int N = in.dim(0), IC = in.dim(1), H = in.dim(2), W = in.dim(3);
  const int OC = w.dim(0), KH = w.dim(2), KW = w.dim(3);
  const int OH = out.dim(2), OW = out.dim(3);
  const T* og = out.grad();
  const bool want_in = in.has_grad();
  const bool want_w = w.has_grad();
  const bool want_b = b.has_grad();
  if (want_b) {
    T* bg = b.grad();
    for (int n = 0; n < N; ++n)
      for (int oc = 0; oc < OC; ++oc) {
        const T* oplane = og + (static_cast<size_t>(n) * OC + oc) * OH * OW;
        T s = 0;
        for (int64_t i = 0; i < static_cast<int64_t>(OH) * OW; ++i) s += oplane[i];
        bg[oc] += s;
      }
  }
  if (!want_in && !want_w) return;
  const T* ip = in.data();
  const T* wp = w.data();
  T* ig = want_in ? in.grad() : nullptr;
  T* wg = want_w ? w.grad() : nullptr;
  for (int n = 0; n < N; ++n) {
    for (int oc = 0; oc < OC; ++oc) {
      const T* oplane = og + (static_cast<size_t>(n) * OC + oc) * OH * OW;
      for (int ic = 0; ic < IC; ++ic) {
        const T* iplane = ip + (static_cast<size_t>(n) * IC + ic) * H * W;
        T* igplane = want_in ? ig + (static_cast<size_t>(n) * IC + ic) * H * W : nullptr;
        const size_t wbase = (static_cast<size_t>(oc) * IC + ic) * KH * KW;
        for (int kh = 0; kh < KH; ++kh) {
          for (int kw = 0; kw < KW; ++kw) {
            const int oh0 = std::max(0, pad - kh);
            const int oh1 = std::min(OH, H + pad - kh);
            const int ow0 = std::max(0, pad - kw);
            const int ow1 = std::min(OW, W + pad - kw);
            const T wv = wp[wbase + kh * KW + kw];
            T wacc = 0;
            for (int oh = oh0; oh < oh1; ++oh) {
              const size_t ioff =
                  static_cast<size_t>(oh + kh - pad) * W + (ow0 + kw - pad);
              const T* orow = oplane + static_cast<size_t>(oh) * OW + ow0;
              const int len = ow1 - ow0;
              if (want_w) {
                const T* irow = iplane + ioff;
                for (int i = 0; i < len; ++i) wacc += irow[i] * orow[i];
              }
              if (want_in) {
                T* igrow = igplane + ioff;
                for (int i = 0; i < len; ++i) igrow[i] += wv * orow[i];
              }
            }
            if (want_w) wg[wbase + kh * KW + kw] += wacc;
          }
        }
      }
    }
  }
}

}  // namespace

template <typename T>
Var<T> Graph<T>::make_node(Tensor<T> value, bool needs_grad,
                           std::function<void()> back) {
  Node nd;
  nd.value = std::move(value);
  nd.needs_grad = needs_grad;
  nd.back = std::move(back);
  nodes_.push_back(std::move(nd));
  return Var<T>{static_cast<int>(nodes_.size()) - 1};
}

template <typename T>
bool Graph<T>::any_needs_grad(const std::vector<Var<T>>& parents) const {
  for (Var<T> p : parents)
    if (node(p).needs_grad) return true;
  return false;
}

template <typename T>
Var<T> Graph<T>::leaf(Tensor<T> value, bool needs_grad) {
  if (!value.defined()) throw Error("leaf: undefined tensor");
  if (needs_grad) value.ensure_grad();
  return make_node(std::move(value), needs_grad, nullptr);
}

template <typename T>
Var<T> Graph<T>::param(ParamStore<T>& store, const std::string& name,
                       bool trainable) {
  Tensor<T> t = store.get(name);  // shallow: shares value and gradient
  return make_node(std::move(t), trainable, nullptr);
}

template <typename T>
void Graph<T>::backward(Var<T> loss) {
  if (backward_done_) throw Error("backward already run on this graph");
  const Node& ln = node(loss);
  if (ln.value.numel() != 1)
    throw ShapeError("backward: loss must be scalar, got " +
                     shape_str(ln.value.shape()));
  backward_done_ = true;
  if (!ln.needs_grad) return;
  node(loss).value.grad()[0] += T(1);
  for (int id = loss.id; id >= 0; --id) {
    Node& nd = nodes_[static_cast<size_t>(id)];
    if (nd.needs_grad && nd.back) nd.back();
  }
}

template <typename T>
Var<T> Graph<T>::conv2d(Var<T> input, Var<T> weight, Var<T> bias, int padding) {
  const Tensor<T>& in = node(input).value;
  const Tensor<T>& w = node(weight).value;
  const Tensor<T>& b = node(bias).value;
  check_4d(in, "conv2d", "input");
  check_4d(w, "conv2d", "weight");
  if (b.rank() != 1 || b.dim(0) != w.dim(0))
    throw ShapeError("conv2d: bias must have shape (" + std::to_string(w.dim(0)) +
                     "), got " + shape_str(b.shape()));
  if (padding < 0) throw ShapeError("conv2d: padding must be >= 0");
  if (in.dim(1) != w.dim(1))
    throw ShapeError("conv2d: input has " + std::to_string(in.dim(1)) +
                     " channels but weight expects " + std::to_string(w.dim(1)));
  const int oh = in.dim(2) + 2 * padding - w.dim(2) + 1;
  const int ow = in.dim(3) + 2 * padding - w.dim(3) + 1;
  if (oh < 1 || ow < 1)
    throw ShapeError("conv2d: kernel " + shape_str({w.dim(2), w.dim(3)}) +
                     " larger than padded input " + shape_str(in.shape()));
  Tensor<T> out({in.dim(0), w.dim(0), oh, ow});
  conv2d_fwd(in, w, b, padding, out);
  if (!any_needs_grad({input, weight, bias}))
    return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, w_t = w, b_t = b, out_t = out;
  return make_node(std::move(out), true, [in_t, w_t, b_t, out_t, padding]() mutable {
    conv2d_bwd(in_t, w_t, b_t, padding, out_t);
  });
}

template <typename T>
Var<T> Graph<T>::relu(Var<T> x) {
  const Tensor<T>& in = node(x).value;
  Tensor<T> out{in.shape()};
  const T* ip = in.data();
  T* op = out.data();
  const int64_t n = in.numel();
  for (int64_t i = 0; i < n; ++i) op[i] = ip[i] > T(0) ? ip[i] : T(0);
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t]() mutable {
    const T* ip = in_t.data();
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    const int64_t n = in_t.numel();
    // subgradient 0 at exactly 0
    for (int64_t i = 0; i < n; ++i)
      if (ip[i] > T(0)) ig[i] += og[i];
  });
}

template <typename T>
Var<T> Graph<T>::tanh_act(Var<T> x) {
  const Tensor<T>& in = node(x).value;
  Tensor<T> out{in.shape()};
  const T* ip = in.data();
  T* op = out.data();
  const int64_t n = in.numel();
  for (int64_t i = 0; i < n; ++i) op[i] = std::tanh(ip[i]);
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t]() mutable {
    const T* op = out_t.data();
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    const int64_t n = in_t.numel();
    for (int64_t i = 0; i < n; ++i) ig[i] += og[i] * (T(1) - op[i] * op[i]);
  });
}

template <typename T>
Var<T> Graph<T>::sigmoid(Var<T> x) {
  const Tensor<T>& in = node(x).value;
  Tensor<T> out{in.shape()};
  const T* ip = in.data();
  T* op = out.data();
  const int64_t n = in.numel();
  for (int64_t i = 0; i < n; ++i) {
    const T v = ip[i];
    if (v >= T(0)) {
      op[i] = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      op[i] = e / (T(1) + e);
    }
  }
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t]() mutable {
    const T* op = out_t.data();
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    const int64_t n = in_t.numel();
    for (int64_t i = 0; i < n; ++i) ig[i] += og[i] * op[i] * (T(1) - op[i]);
  });
}

template <typename T>
Var<T> Graph<T>::linear(Var<T> input, Var<T> weight, Var<T> bias) {
  const Tensor<T>& in = node(input).value;
  const Tensor<T>& w = node(weight).value;
  const Tensor<T>& b = node(bias).value;
  if (in.rank() != 2)
    throw ShapeError("linear: input must be 2D (batch, features), got " +
                     shape_str(in.shape()));
  if (w.rank() != 2)
    throw ShapeError("linear: weight must be 2D (out, in), got " +
                     shape_str(w.shape()));
  if (w.dim(1) != in.dim(1))
    throw ShapeError("linear: input features " + std::to_string(in.dim(1)) +
                     " do not match weight columns " + std::to_string(w.dim(1)));
  if (b.rank() != 1 || b.dim(0) != w.dim(0))
    throw ShapeError("linear: bias must have shape (" + std::to_string(w.dim(0)) +
                     "), got " + shape_str(b.shape()));
  const int N = in.dim(0), F = in.dim(1), O = w.dim(0);
  Tensor<T> out({N, O});
  const T* ip = in.data();
  const T* wp = w.data();
  const T* bp = b.data();
  T* op = out.data();
  for (int n = 0; n < N; ++n) {
    const T* irow = ip + static_cast<size_t>(n) * F;
    T* orow = op + static_cast<size_t>(n) * O;
    for (int o = 0; o < O; ++o) {
      const T* wrow = wp + static_cast<size_t>(o) * F;
      T s = bp[o];
      for (int f = 0; f < F; ++f) s += irow[f] * wrow[f];
      orow[o] = s;
    }
  }
  if (!any_needs_grad({input, weight, bias}))
    return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, w_t = w, b_t = b, out_t = out;
  return make_node(std::move(out), true, [in_t, w_t, b_t, out_t]() mutable {
    const int N = in_t.dim(0), F = in_t.dim(1), O = w_t.dim(0);
    const T* og = out_t.grad();
    const T* ip = in_t.data();
    const T* wp = w_t.data();
    if (b_t.has_grad()) {
      T* bg = b_t.grad();
      for (int n = 0; n < N; ++n)
        for (int o = 0; o < O; ++o) bg[o] += og[static_cast<size_t>(n) * O + o];
    }
    if (w_t.has_grad()) {
      T* wg = w_t.grad();
      for (int n = 0; n < N; ++n)
        for (int o = 0; o < O; ++o) {
          const T g = og[static_cast<size_t>(n) * O + o];
          const T* irow = ip + static_cast<size_t>(n) * F;
          T* wrow = wg + static_cast<size_t>(o) * F;
          for (int f = 0; f < F; ++f) wrow[f] += g * irow[f];
        }
    }
    if (in_t.has_grad()) {
      T* ig = in_t.grad();
      for (int n = 0; n < N; ++n)
        for (int o = 0; o < O; ++o) {
          const T g = og[static_cast<size_t>(n) * O + o];
          const T* wrow = wp + static_cast<size_t>(o) * F;
          T* irow = ig + static_cast<size_t>(n) * F;
          for (int f = 0; f < F; ++f) irow[f] += g * wrow[f];
        }
    }
  });
}

template <typename T>
Var<T> Graph<T>::maxpool2x2(Var<T> x) {
  const Tensor<T>& in = node(x).value;
  check_4d(in, "maxpool2x2", "input");
  if (in.dim(2) % 2 != 0 || in.dim(3) % 2 != 0)
    throw ShapeError("maxpool2x2: spatial dims must be even, got " +
                     shape_str(in.shape()));
  const int N = in.dim(0), C = in.dim(1), H = in.dim(2), W = in.dim(3);
  const int OH = H / 2, OW = W / 2;
  Tensor<T> out({N, C, OH, OW});
  auto argmax = std::make_shared<std::vector<int32_t>>(
      static_cast<size_t>(out.numel()));
  const T* ip = in.data();
  T* op = out.data();
  size_t oi = 0;
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      const T* plane = ip + (static_cast<size_t>(n) * C + c) * H * W;
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow, ++oi) {
          // row-major scan of the 2x2 cell; first max wins on ties
          int best = (2 * oh) * W + 2 * ow;
          T bv = plane[best];
          const int cand[3] = {(2 * oh) * W + 2 * ow + 1, (2 * oh + 1) * W + 2 * ow,
                               (2 * oh + 1) * W + 2 * ow + 1};
          for (int k = 0; k < 3; ++k)
            if (plane[cand[k]] > bv) {
              best = cand[k];
              bv = plane[best];
            }
          op[oi] = bv;
          (*argmax)[oi] = best;
        }
    }
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t, argmax]() mutable {
    const int N = in_t.dim(0), C = in_t.dim(1), H = in_t.dim(2), W = in_t.dim(3);
    const int OH = H / 2, OW = W / 2;
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    size_t oi = 0;
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        T* plane = ig + (static_cast<size_t>(n) * C + c) * H * W;
        for (int k = 0; k < OH * OW; ++k, ++oi) plane[(*argmax)[oi]] += og[oi];
      }
  });
}

template <typename T>
Var<T> Graph<T>::upsample(Var<T> x, int target_h, int target_w, Upsample mode) {
  const Tensor<T>& in = node(x).value;
  check_4d(in, "upsample", "input");
  const int N = in.dim(0), C = in.dim(1), H = in.dim(2), W = in.dim(3);
  if (target_h < H || target_w < W)
    throw ShapeError("upsample: target " + shape_str({target_h, target_w}) +
                     " smaller than input " + shape_str({H, W}));
  const int TH = target_h, TW = target_w;
  Tensor<T> out({N, C, TH, TW});
  T* op = out.data();
  const T* ip = in.data();
  if (mode == Upsample::kNearest) {
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        const T* plane = ip + (static_cast<size_t>(n) * C + c) * H * W;
        T* oplane = op + (static_cast<size_t>(n) * C + c) * TH * TW;
        for (int oh = 0; oh < TH; ++oh) {
          const int ih = static_cast<int>((int64_t(2 * oh + 1) * H) / (2 * TH));
          for (int ow = 0; ow < TW; ++ow) {
            const int iw = static_cast<int>((int64_t(2 * ow + 1) * W) / (2 * TW));
            oplane[static_cast<size_t>(oh) * TW + ow] =
                plane[static_cast<size_t>(ih) * W + iw];
          }
        }
      }
  } else {
    // half-pixel-center sampling with edge clamping
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        const T* plane = ip + (static_cast<size_t>(n) * C + c) * H * W;
        T* oplane = op + (static_cast<size_t>(n) * C + c) * TH * TW;
        for (int oh = 0; oh < TH; ++oh) {
          const double fy = (oh + 0.5) * double(H) / double(TH) - 0.5;
          const int y0 = static_cast<int>(std::floor(fy));
          const T wy = static_cast<T>(fy - y0);
          const int y0c = std::clamp(y0, 0, H - 1);
          const int y1c = std::clamp(y0 + 1, 0, H - 1);
          for (int ow = 0; ow < TW; ++ow) {
            const double fx = (ow + 0.5) * double(W) / double(TW) - 0.5;
            const int x0 = static_cast<int>(std::floor(fx));
            const T wx = static_cast<T>(fx - x0);
            const int x0c = std::clamp(x0, 0, W - 1);
            const int x1c = std::clamp(x0 + 1, 0, W - 1);
            oplane[static_cast<size_t>(oh) * TW + ow] =
                (T(1) - wy) * ((T(1) - wx) * plane[static_cast<size_t>(y0c) * W + x0c] +
                               wx * plane[static_cast<size_t>(y0c) * W + x1c]) +
                wy * ((T(1) - wx) * plane[static_cast<size_t>(y1c) * W + x0c] +
                      wx * plane[static_cast<size_t>(y1c) * W + x1c]);
          }
        }
      }
  }
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t, mode]() mutable {
    const int N = in_t.dim(0), C = in_t.dim(1), H = in_t.dim(2), W = in_t.dim(3);
    const int TH = out_t.dim(2), TW = out_t.dim(3);
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        T* plane = ig + (static_cast<size_t>(n) * C + c) * H * W;
        const T* oplane = og + (static_cast<size_t>(n) * C + c) * TH * TW;
        for (int oh = 0; oh < TH; ++oh) {
          for (int ow = 0; ow < TW; ++ow) {
            const T g = oplane[static_cast<size_t>(oh) * TW + ow];
            if (mode == Upsample::kNearest) {
              const int ih = static_cast<int>((int64_t(2 * oh + 1) * H) / (2 * TH));
              const int iw = static_cast<int>((int64_t(2 * ow + 1) * W) / (2 * TW));
              plane[static_cast<size_t>(ih) * W + iw] += g;
            } else {
              const double fy = (oh + 0.5) * double(H) / double(TH) - 0.5;
              const int y0 = static_cast<int>(std::floor(fy));
              const T wy = static_cast<T>(fy - y0);
              const int y0c = std::clamp(y0, 0, H - 1);
              const int y1c = std::clamp(y0 + 1, 0, H - 1);
              const double fx = (ow + 0.5) * double(W) / double(TW) - 0.5;
              const int x0 = static_cast<int>(std::floor(fx));
              const T wx = static_cast<T>(fx - x0);
              const int x0c = std::clamp(x0, 0, W - 1);
              const int x1c = std::clamp(x0 + 1, 0, W - 1);
              plane[static_cast<size_t>(y0c) * W + x0c] += g * (T(1) - wy) * (T(1) - wx);
              plane[static_cast<size_t>(y0c) * W + x1c] += g * (T(1) - wy) * wx;
              plane[static_cast<size_t>(y1c) * W + x0c] += g * wy * (T(1) - wx);
              plane[static_cast<size_t>(y1c) * W + x1c] += g * wy * wx;
            }
          }
        }
      }
  });
}

namespace {

template <typename T>
Tensor<T> downsample_fwd(const Tensor<T>& in) {
  check_4d(in, "downsample_avg2x", "input");
  if (in.dim(2) % 2 != 0 || in.dim(3) % 2 != 0)
    throw ShapeError("downsample_avg2x: spatial dims must be even, got " +
                     shape_str(in.shape()));
  const int N = in.dim(0), C = in.dim(1), H = in.dim(2), W = in.dim(3);
  const int OH = H / 2, OW = W / 2;
  Tensor<T> out({N, C, OH, OW});
  const T* ip = in.data();
  T* op = out.data();
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c) {
      const T* plane = ip + (static_cast<size_t>(n) * C + c) * H * W;
      T* oplane = op + (static_cast<size_t>(n) * C + c) * OH * OW;
      for (int oh = 0; oh < OH; ++oh)
        for (int ow = 0; ow < OW; ++ow) {
          const size_t p = static_cast<size_t>(2 * oh) * W + 2 * ow;
          oplane[static_cast<size_t>(oh) * OW + ow] =
              (plane[p] + plane[p + 1] + plane[p + W] + plane[p + W + 1]) / T(4);
        }
    }
  return out;
}

template <typename T>
Tensor<T> concat_fwd(const Tensor<T>& a, const Tensor<T>& b) {
  check_4d(a, "concat_channels", "first input");
  check_4d(b, "concat_channels", "second input");
  if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw ShapeError("concat_channels: batch/spatial mismatch between " +
                     shape_str(a.shape()) + " and " + shape_str(b.shape()));
  const int N = a.dim(0), CA = a.dim(1), CB = b.dim(1), H = a.dim(2), W = a.dim(3);
  Tensor<T> out({N, CA + CB, H, W});
  const size_t plane = static_cast<size_t>(H) * W;
  for (int n = 0; n < N; ++n) {
    std::copy(a.data() + static_cast<size_t>(n) * CA * plane,
              a.data() + static_cast<size_t>(n + 1) * CA * plane,
              out.data() + static_cast<size_t>(n) * (CA + CB) * plane);
    std::copy(b.data() + static_cast<size_t>(n) * CB * plane,
              b.data() + static_cast<size_t>(n + 1) * CB * plane,
              out.data() + (static_cast<size_t>(n) * (CA + CB) + CA) * plane);
  }
  return out;
}

template <typename T>
Tensor<T> slice_fwd(const Tensor<T>& in, int c0, int c1) {
  check_4d(in, "slice_channels", "input");
  if (c0 < 0 || c1 < c0 || c1 > in.dim(1))
    throw ShapeError("slice_channels: bad channel range [" + std::to_string(c0) +
                     "," + std::to_string(c1) + ") for " + shape_str(in.shape()));
  const int N = in.dim(0), C = in.dim(1), H = in.dim(2), W = in.dim(3);
  Tensor<T> out({N, c1 - c0, H, W});
  const size_t plane = static_cast<size_t>(H) * W;
  for (int n = 0; n < N; ++n)
    std::copy(in.data() + (static_cast<size_t>(n) * C + c0) * plane,
              in.data() + (static_cast<size_t>(n) * C + c1) * plane,
              out.data() + static_cast<size_t>(n) * (c1 - c0) * plane);
  return out;
}

}  // namespace

template <typename T>
Var<T> Graph<T>::downsample_avg2x(Var<T> x) {
  Tensor<T> out = downsample_fwd(node(x).value);
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = node(x).value, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t]() mutable {
    const int N = in_t.dim(0), C = in_t.dim(1), H = in_t.dim(2), W = in_t.dim(3);
    const int OH = H / 2, OW = W / 2;
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c) {
        T* plane = ig + (static_cast<size_t>(n) * C + c) * H * W;
        const T* oplane = og + (static_cast<size_t>(n) * C + c) * OH * OW;
        for (int oh = 0; oh < OH; ++oh)
          for (int ow = 0; ow < OW; ++ow) {
            const T g = oplane[static_cast<size_t>(oh) * OW + ow] / T(4);
            const size_t p = static_cast<size_t>(2 * oh) * W + 2 * ow;
            plane[p] += g;
            plane[p + 1] += g;
            plane[p + W] += g;
            plane[p + W + 1] += g;
          }
      }
  });
}

template <typename T>
Var<T> Graph<T>::concat_channels(Var<T> a, Var<T> b) {
  Tensor<T> out = concat_fwd(node(a).value, node(b).value);
  if (!any_needs_grad({a, b})) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> a_t = node(a).value, b_t = node(b).value, out_t = out;
  return make_node(std::move(out), true, [a_t, b_t, out_t]() mutable {
    const int N = a_t.dim(0), CA = a_t.dim(1), CB = b_t.dim(1);
    const int H = a_t.dim(2), W = a_t.dim(3);
    const size_t plane = static_cast<size_t>(H) * W;
    const T* og = out_t.grad();
    for (int n = 0; n < N; ++n) {
      if (a_t.has_grad()) {
        T* ag = a_t.grad() + static_cast<size_t>(n) * CA * plane;
        const T* src = og + static_cast<size_t>(n) * (CA + CB) * plane;
        for (size_t i = 0; i < CA * plane; ++i) ag[i] += src[i];
      }
      if (b_t.has_grad()) {
        T* bg = b_t.grad() + static_cast<size_t>(n) * CB * plane;
        const T* src = og + (static_cast<size_t>(n) * (CA + CB) + CA) * plane;
        for (size_t i = 0; i < CB * plane; ++i) bg[i] += src[i];
      }
    }
  });
}

template <typename T>
Var<T> Graph<T>::slice_channels(Var<T> x, int c0, int c1) {
  Tensor<T> out = slice_fwd(node(x).value, c0, c1);
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = node(x).value, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t, c0, c1]() mutable {
    const int N = in_t.dim(0), C = in_t.dim(1), H = in_t.dim(2), W = in_t.dim(3);
    const size_t plane = static_cast<size_t>(H) * W;
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    for (int n = 0; n < N; ++n) {
      T* dst = ig + (static_cast<size_t>(n) * C + c0) * plane;
      const T* src = og + static_cast<size_t>(n) * (c1 - c0) * plane;
      for (size_t i = 0; i < static_cast<size_t>(c1 - c0) * plane; ++i)
        dst[i] += src[i];
    }
  });
}

template <typename T>
Var<T> Graph<T>::add(Var<T> a, Var<T> b) {
  const Tensor<T>& av = node(a).value;
  const Tensor<T>& bv = node(b).value;
  if (!shape_eq(av.shape(), bv.shape()))
    throw ShapeError("add: shape mismatch " + shape_str(av.shape()) + " vs " +
                     shape_str(bv.shape()));
  Tensor<T> out{av.shape()};
  const int64_t n = av.numel();
  for (int64_t i = 0; i < n; ++i) out.data()[i] = av.data()[i] + bv.data()[i];
  if (!any_needs_grad({a, b})) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> a_t = av, b_t = bv, out_t = out;
  return make_node(std::move(out), true, [a_t, b_t, out_t]() mutable {
    const T* og = out_t.grad();
    const int64_t n = out_t.numel();
    if (a_t.has_grad()) {
      T* ag = a_t.grad();
      for (int64_t i = 0; i < n; ++i) ag[i] += og[i];
    }
    if (b_t.has_grad()) {
      T* bg = b_t.grad();
      for (int64_t i = 0; i < n; ++i) bg[i] += og[i];
    }
  });
}

template <typename T>
Var<T> Graph<T>::scale(Var<T> x, T factor) {
  const Tensor<T>& in = node(x).value;
  Tensor<T> out{in.shape()};
  const int64_t n = in.numel();
  for (int64_t i = 0; i < n; ++i) out.data()[i] = factor * in.data()[i];
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t, factor]() mutable {
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    const int64_t n = in_t.numel();
    for (int64_t i = 0; i < n; ++i) ig[i] += factor * og[i];
  });
}

template <typename T>
Var<T> Graph<T>::clamp_unit(Var<T> x) {
  const Tensor<T>& in = node(x).value;
  Tensor<T> out{in.shape()};
  const int64_t n = in.numel();
  for (int64_t i = 0; i < n; ++i)
    out.data()[i] = std::clamp(in.data()[i], T(-1), T(1));
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t]() mutable {
    const T* ip = in_t.data();
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    const int64_t n = in_t.numel();
    for (int64_t i = 0; i < n; ++i)
      if (ip[i] >= T(-1) && ip[i] <= T(1)) ig[i] += og[i];
  });
}

template <typename T>
Var<T> Graph<T>::flatten(Var<T> x) {
  const Tensor<T>& in = node(x).value;
  check_4d(in, "flatten", "input");
  Tensor<T> out({in.dim(0), in.dim(1) * in.dim(2) * in.dim(3)},
                std::vector<T>(in.vec()));
  if (!node(x).needs_grad) return make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> in_t = in, out_t = out;
  return make_node(std::move(out), true, [in_t, out_t]() mutable {
    const T* og = out_t.grad();
    T* ig = in_t.grad();
    const int64_t n = in_t.numel();
    for (int64_t i = 0; i < n; ++i) ig[i] += og[i];
  });
}

template <typename T>
Tensor<T> downsample_avg2x_value(const Tensor<T>& x) {
  return downsample_fwd(x);
}
template <typename T>
Tensor<T> concat_channels_value(const Tensor<T>& a, const Tensor<T>& b) {
  return concat_fwd(a, b);
}
template <typename T>
Tensor<T> slice_channels_value(const Tensor<T>& x, int c0, int c1) {
  return slice_fwd(x, c0, c1);
}

template class Graph<float>;
template class Graph<double>;
template Tensor<float> downsample_avg2x_value(const Tensor<float>&);
template Tensor<double> downsample_avg2x_value(const Tensor<double>&);
template Tensor<float> concat_channels_value(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> concat_channels_value(const Tensor<double>&, const Tensor<double>&);
template Tensor<float> slice_channels_value(const Tensor<float>&, int, int);
template Tensor<double> slice_channels_value(const Tensor<double>&, int, int);

}  // namespace framepred
