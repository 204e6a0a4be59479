#include "framepred/losses.hpp"

#include <cmath>

namespace framepred {

namespace {

template <typename T>
T sign_of(T v) {
  return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0));
}

template <typename T>
T pow_int(T base, int e) {
  T r = T(1);
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

template <typename T>
Tensor<T> scalar_tensor(T v) {
  return Tensor<T>{{1}, {v}};
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_adv < 0 || lambda_lp < 0 || lambda_gdl < 0)
    throw ConfigError("loss weights must be >= 0");
  if (lambda_adv == 0 && lambda_lp == 0 && lambda_gdl == 0)
    throw ConfigError("at least one loss weight must be strictly positive");
  if (p != 1 && p != 2) throw ConfigError("p must be 1 or 2");
  if (alpha < 1) throw ConfigError("alpha must be >= 1");
}

template <typename T>
Var<T> lp_loss(Graph<T>& g, Var<T> pred, const Tensor<T>& target, int p) {
  if (p != 1 && p != 2) throw Error("lp_loss: p must be 1 or 2");
  const Tensor<T>& pv = g.value(pred);
  if (!shape_eq(pv.shape(), target.shape()))
    throw ShapeError("lp_loss: shape mismatch " + shape_str(pv.shape()) +
                     " vs " + shape_str(target.shape()));
  if (pv.rank() < 1 || pv.dim(0) < 1)
    throw ShapeError("lp_loss: needs a leading batch dimension");
  const int64_t n = pv.numel();
  const T batch = static_cast<T>(pv.dim(0));
  double acc = 0;
  const T* pp = pv.data();
  const T* tp = target.data();
  for (int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(pp[i]) - static_cast<double>(tp[i]);
    acc += (p == 2) ? d * d : std::abs(d);
  }
  Tensor<T> out = scalar_tensor(static_cast<T>(acc / batch));
  if (!g.needs_grad(pred)) return g.make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> pred_t = pv, out_t = out, target_t = target;
  return g.make_node(std::move(out), true, [pred_t, target_t, out_t, p, batch]() mutable {
    const T g0 = out_t.grad()[0];
    const T* pp = pred_t.data();
    const T* tp = target_t.data();
    T* pg = pred_t.grad();
    const int64_t n = pred_t.numel();
    for (int64_t i = 0; i < n; ++i) {
      const T d = pp[i] - tp[i];
      pg[i] += g0 * ((p == 2) ? T(2) * d : sign_of(d)) / batch;
    }
  });
}

template <typename T>
Var<T> gdl_loss(Graph<T>& g, Var<T> pred, const Tensor<T>& target, int alpha) {
  if (alpha < 1) throw Error("gdl_loss: alpha must be >= 1");
  const Tensor<T>& pv = g.value(pred);
  if (!shape_eq(pv.shape(), target.shape()))
    throw ShapeError("gdl_loss: shape mismatch " + shape_str(pv.shape()) +
                     " vs " + shape_str(target.shape()));
  if (pv.rank() != 4)
    throw ShapeError("gdl_loss: expects 4D (N,C,H,W) images, got " +
                     shape_str(pv.shape()));
  const int N = pv.dim(0), C = pv.dim(1), H = pv.dim(2), W = pv.dim(3);
  if (H < 2 || W < 2)
    throw ShapeError("gdl_loss: spatial dims must be >= 2, got " +
                     shape_str(pv.shape()));
  double acc = 0;
  for (int n = 0; n < N; ++n)
    for (int c = 0; c < C; ++c)
      for (int i = 0; i < H; ++i)
        for (int j = 0; j < W; ++j) {
          if (i >= 1) {
            const double ty = std::abs(target.at4(n, c, i, j) - target.at4(n, c, i - 1, j));
            const double py = std::abs(pv.at4(n, c, i, j) - pv.at4(n, c, i - 1, j));
            acc += pow_int(std::abs(ty - py), alpha);
          }
          if (j >= 1) {
            const double tx = std::abs(target.at4(n, c, i, j) - target.at4(n, c, i, j - 1));
            const double px = std::abs(pv.at4(n, c, i, j) - pv.at4(n, c, i, j - 1));
            acc += pow_int(std::abs(tx - px), alpha);
          }
        }
  Tensor<T> out = scalar_tensor(static_cast<T>(acc / N));
  if (!g.needs_grad(pred)) return g.make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> pred_t = pv, out_t = out, target_t = target;
  return g.make_node(std::move(out), true, [pred_t, target_t, out_t, alpha]() mutable {
    const int N = pred_t.dim(0), C = pred_t.dim(1), H = pred_t.dim(2), W = pred_t.dim(3);
    const T g0 = out_t.grad()[0] / static_cast<T>(N);
    T* pg = pred_t.grad();
    auto scatter = [&](int n, int c, int i1, int j1, int i0, int j0) {
      // pair (i1,j1)-(i0,j0): d = pred(i1,j1) - pred(i0,j0)
      const T td = target_t.at4(n, c, i1, j1) - target_t.at4(n, c, i0, j0);
      const T pd = pred_t.at4(n, c, i1, j1) - pred_t.at4(n, c, i0, j0);
      const T u = std::abs(td) - std::abs(pd);
      const T coef = g0 * static_cast<T>(alpha) *
                     pow_int(std::abs(u), alpha - 1) * sign_of(u) *
                     (-sign_of(pd));
      pg[pred_t.offset4(n, c, i1, j1)] += coef;
      pg[pred_t.offset4(n, c, i0, j0)] -= coef;
    };
    for (int n = 0; n < N; ++n)
      for (int c = 0; c < C; ++c)
        for (int i = 0; i < H; ++i)
          for (int j = 0; j < W; ++j) {
            if (i >= 1) scatter(n, c, i, j, i - 1, j);
            if (j >= 1) scatter(n, c, i, j, i, j - 1);
          }
  });
}

template <typename T>
Var<T> bce_loss(Graph<T>& g, Var<T> pred, const std::vector<T>& targets) {
  const Tensor<T>& pv = g.value(pred);
  const int64_t n = pv.numel();
  if (pv.rank() < 1 || pv.dim(0) != static_cast<int>(targets.size()) ||
      n != static_cast<int64_t>(targets.size()))
    throw ShapeError("bce_loss: prediction shape " + shape_str(pv.shape()) +
                     " does not give one scalar per target (" +
                     std::to_string(targets.size()) + ")");
  for (const T t : targets)
    if (t != T(0) && t != T(1))
      throw Error("bce_loss: targets must be exactly 0 or 1");
  const T eps = T(1e-7);
  double acc = 0;
  const T* pp = pv.data();
  for (int64_t i = 0; i < n; ++i) {
    const double p = std::clamp(static_cast<double>(pp[i]), 1e-7, 1.0 - 1e-7);
    const double t = static_cast<double>(targets[static_cast<size_t>(i)]);
    acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
  }
  Tensor<T> out = scalar_tensor(static_cast<T>(acc / static_cast<double>(n)));
  if (!g.needs_grad(pred)) return g.make_node(std::move(out), false, nullptr);
  out.ensure_grad();
  Tensor<T> pred_t = pv, out_t = out;
  std::vector<T> tcopy = targets;
  return g.make_node(std::move(out), true, [pred_t, out_t, tcopy, eps]() mutable {
    const T g0 = out_t.grad()[0] / static_cast<T>(pred_t.numel());
    const T* pp = pred_t.data();
    T* pg = pred_t.grad();
    const int64_t n = pred_t.numel();
    for (int64_t i = 0; i < n; ++i) {
      const T p = pp[i];
      if (p <= eps || p >= T(1) - eps) continue;  // clamped region: flat
      const T t = tcopy[static_cast<size_t>(i)];
      pg[i] += g0 * (-t / p + (T(1) - t) / (T(1) - p));
    }
  });
}

template <typename T>
Var<T> bce_loss(Graph<T>& g, Var<T> pred, T target) {
  const int64_t n = g.value(pred).numel();
  return bce_loss(g, pred, std::vector<T>(static_cast<size_t>(n), target));
}

template <typename T>
Var<T> adv_d_loss(Graph<T>& g, const DiscriminatorSpec& spec,
                  const ScaleConfig& sc, ParamStore<T>& d_params,
                  const Pyramid<T>& pyramid,
                  const std::vector<Tensor<T>>& generated) {
  const size_t n_scales = static_cast<size_t>(sc.n_scales);
  if (pyramid.x.size() != n_scales || pyramid.y.size() != n_scales ||
      generated.size() != n_scales)
    throw ShapeError("adv_d_loss: scale-count mismatch");
  Var<T> total;
  for (int k = 1; k <= sc.n_scales; ++k) {
    Var<T> xk = g.constant(pyramid.x[static_cast<size_t>(k - 1)]);
    Var<T> real = g.constant(pyramid.y[static_cast<size_t>(k - 1)]);
    Var<T> fake = g.constant(generated[static_cast<size_t>(k - 1)]);
    Var<T> d_real =
        discriminator_forward(g, spec, sc, d_params, xk, real, k, true);
    Var<T> d_fake =
        discriminator_forward(g, spec, sc, d_params, xk, fake, k, true);
    Var<T> term = g.add(bce_loss(g, d_real, T(1)), bce_loss(g, d_fake, T(0)));
    total = (k == 1) ? term : g.add(total, term);
  }
  return total;
}

template <typename T>
Var<T> adv_g_loss(Graph<T>& g, const DiscriminatorSpec& spec,
                  const ScaleConfig& sc, ParamStore<T>& d_params,
                  const Pyramid<T>& pyramid,
                  const std::vector<Var<T>>& generated) {
  const size_t n_scales = static_cast<size_t>(sc.n_scales);
  if (pyramid.x.size() != n_scales || generated.size() != n_scales)
    throw ShapeError("adv_g_loss: scale-count mismatch");
  Var<T> total;
  for (int k = 1; k <= sc.n_scales; ++k) {
    Var<T> xk = g.constant(pyramid.x[static_cast<size_t>(k - 1)]);
    Var<T> d_out = discriminator_forward(
        g, spec, sc, d_params, xk, generated[static_cast<size_t>(k - 1)], k,
        /*trainable=*/false);
    Var<T> term = bce_loss(g, d_out, T(1));
    total = (k == 1) ? term : g.add(total, term);
  }
  return total;
}

template <typename T>
Var<T> combined_loss(Graph<T>& g, const LossWeights& weights,
                     const DiscriminatorSpec* d_spec, const ScaleConfig& sc,
                     ParamStore<T>* d_params, const Pyramid<T>& pyramid,
                     const std::vector<Var<T>>& generated,
                     CombinedTerms* terms) {
  weights.validate();
  if (generated.size() != static_cast<size_t>(sc.n_scales))
    throw ShapeError("combined_loss: scale-count mismatch");
  CombinedTerms out{};
  Var<T> total;
  bool have_total = false;
  auto accumulate = [&](Var<T> term, double weight) {
    Var<T> scaled = g.scale(term, static_cast<T>(weight));
    total = have_total ? g.add(total, scaled) : scaled;
    have_total = true;
  };
  if (weights.lambda_lp > 0 || weights.lambda_gdl > 0) {
    if (pyramid.y.size() != static_cast<size_t>(sc.n_scales))
      throw ShapeError("combined_loss: pyramid carries no targets");
  }
  if (weights.lambda_lp > 0) {
    Var<T> lp_total;
    for (int k = 1; k <= sc.n_scales; ++k) {
      Var<T> term = lp_loss(g, generated[static_cast<size_t>(k - 1)],
                            pyramid.y[static_cast<size_t>(k - 1)], weights.p);
      lp_total = (k == 1) ? term : g.add(lp_total, term);
    }
    out.lp = static_cast<double>(g.value(lp_total).data()[0]);
    accumulate(lp_total, weights.lambda_lp);
  }
  if (weights.lambda_gdl > 0) {
    Var<T> gdl_total;
    for (int k = 1; k <= sc.n_scales; ++k) {
      Var<T> term = gdl_loss(g, generated[static_cast<size_t>(k - 1)],
                             pyramid.y[static_cast<size_t>(k - 1)], weights.alpha);
      gdl_total = (k == 1) ? term : g.add(gdl_total, term);
    }
    out.gdl = static_cast<double>(g.value(gdl_total).data()[0]);
    accumulate(gdl_total, weights.lambda_gdl);
  }
  if (weights.lambda_adv > 0) {
    if (!d_spec || !d_params)
      throw ConfigError("combined_loss: lambda_adv > 0 needs a discriminator");
    Var<T> adv = adv_g_loss(g, *d_spec, sc, *d_params, pyramid, generated);
    out.adv = static_cast<double>(g.value(adv).data()[0]);
    accumulate(adv, weights.lambda_adv);
  }
  out.total = static_cast<double>(g.value(total).data()[0]);
  if (terms) *terms = out;
  return total;
}

template <typename T>
T lp_loss_value(const Tensor<T>& pred, const Tensor<T>& target, int p) {
  Graph<T> g;
  return g.value(lp_loss(g, g.constant(pred), target, p)).data()[0];
}

template <typename T>
T gdl_loss_value(const Tensor<T>& pred, const Tensor<T>& target, int alpha) {
  Graph<T> g;
  return g.value(gdl_loss(g, g.constant(pred), target, alpha)).data()[0];
}

template <typename T>
T bce_loss_value(const std::vector<T>& pred, const std::vector<T>& targets) {
  Graph<T> g;
  Tensor<T> pt{{static_cast<int>(pred.size())}, std::vector<T>(pred)};
  return g.value(bce_loss(g, g.constant(pt), targets)).data()[0];
}

template Var<float> lp_loss(Graph<float>&, Var<float>, const Tensor<float>&, int);
template Var<double> lp_loss(Graph<double>&, Var<double>, const Tensor<double>&, int);
template Var<float> gdl_loss(Graph<float>&, Var<float>, const Tensor<float>&, int);
template Var<double> gdl_loss(Graph<double>&, Var<double>, const Tensor<double>&, int);
template Var<float> bce_loss(Graph<float>&, Var<float>, const std::vector<float>&);
template Var<double> bce_loss(Graph<double>&, Var<double>, const std::vector<double>&);
template Var<float> bce_loss(Graph<float>&, Var<float>, float);
template Var<double> bce_loss(Graph<double>&, Var<double>, double);
template Var<float> adv_d_loss(Graph<float>&, const DiscriminatorSpec&,
                               const ScaleConfig&, ParamStore<float>&,
                               const Pyramid<float>&,
                               const std::vector<Tensor<float>>&);
template Var<double> adv_d_loss(Graph<double>&, const DiscriminatorSpec&,
                                const ScaleConfig&, ParamStore<double>&,
                                const Pyramid<double>&,
                                const std::vector<Tensor<double>>&);
template Var<float> adv_g_loss(Graph<float>&, const DiscriminatorSpec&,
                               const ScaleConfig&, ParamStore<float>&,
                               const Pyramid<float>&,
                               const std::vector<Var<float>>&);
template Var<double> adv_g_loss(Graph<double>&, const DiscriminatorSpec&,
                                const ScaleConfig&, ParamStore<double>&,
                                const Pyramid<double>&,
                                const std::vector<Var<double>>&);
template Var<float> combined_loss(Graph<float>&, const LossWeights&,
                                  const DiscriminatorSpec*, const ScaleConfig&,
                                  ParamStore<float>*, const Pyramid<float>&,
                                  const std::vector<Var<float>>&, CombinedTerms*);
template Var<double> combined_loss(Graph<double>&, const LossWeights&,
                                   const DiscriminatorSpec*, const ScaleConfig&,
                                   ParamStore<double>*, const Pyramid<double>&,
                                   const std::vector<Var<double>>&,
                                   CombinedTerms*);
template float lp_loss_value(const Tensor<float>&, const Tensor<float>&, int);
template double lp_loss_value(const Tensor<double>&, const Tensor<double>&, int);
template float gdl_loss_value(const Tensor<float>&, const Tensor<float>&, int);
template double gdl_loss_value(const Tensor<double>&, const Tensor<double>&, int);
template float bce_loss_value(const std::vector<float>&, const std::vector<float>&);
template double bce_loss_value(const std::vector<double>&, const std::vector<double>&);

}  // namespace framepred
