#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <functional>

#include "framepred/grad_check.hpp"
#include "framepred/losses.hpp"
#include "framepred/model.hpp"
#include "oracles.hpp"

using namespace framepred;
using oracles::random_tensor;

namespace {

// Builds f(with_grad) for grad_check from an op that maps graph+params to an
// output node. The output is reduced to a scalar with a fixed random target
// through the smooth p=2 loss so a single backward covers every element.
template <typename T>
std::function<T(bool)> objective(
    ParamStore<T>& params,
    std::function<Var<T>(Graph<T>&, ParamStore<T>&)> build, uint64_t seed) {
  return [&params, build, seed](bool with_grad) -> T {
    Graph<T> g;
    Var<T> out = build(g, params);
    Rng rng(seed);
    Tensor<T> target = random_tensor<T>(g.value(out).shape(), rng);
    Var<T> loss = lp_loss(g, out, target, 2);
    const T value = g.value(loss).data()[0];
    if (with_grad) g.backward(loss);
    return value;
  };
}

template <typename T>
double check(ParamStore<T>& params,
             std::function<Var<T>(Graph<T>&, ParamStore<T>&)> build,
             T eps = T(1e-6), uint64_t seed = 999) {
  return grad_check<T>(objective<T>(params, build, seed), params, eps)
      .max_rel_err;
}

}  // namespace

TEST_CASE("grad_check on the quadratic is near-exact") {
  ParamStore<double> params;
  params.add("w", Tensor<double>({1}, {3.0}));
  auto f = [&params](bool with_grad) {
    const double w = params.get("w").data()[0];
    if (with_grad) params.get("w").grad()[0] += 2.0 * w;
    return w * w;
  };
  const auto report = grad_check<double>(f, params, 1e-4);
  CHECK(report.max_rel_err < 1e-9);
}

TEST_CASE("grad_check on a constant function returns zero error") {
  ParamStore<double> params;
  params.add("w", Tensor<double>({3}, {1, 2, 3}));
  auto f = [](bool) { return 5.0; };
  CHECK(grad_check<double>(f, params, 1e-5).max_rel_err == 0.0);
}

TEST_CASE("grad_check rejects a non-finite objective") {
  ParamStore<double> params;
  params.add("w", Tensor<double>({1}, {1.0}));
  auto f = [](bool) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(grad_check<double>(f, params, 1e-5), Error);
}

TEST_CASE("tanh gradient matches central differences at 0.3") {
  ParamStore<double> params;
  params.add("x", Tensor<double>({1, 1, 1, 1}, {0.3}));
  auto build = [](Graph<double>& g, ParamStore<double>& p) {
    return g.tanh_act(g.param(p, "x"));
  };
  CHECK(check<double>(params, build, 1e-6) < 1e-6);
}

TEST_CASE("conv2d gradients (input, weight, bias)") {
  Rng rng(101);
  for (int pad : {0, 1, 2}) {
    ParamStore<double> params;
    params.add("in", random_tensor<double>({2, 2, 5, 5}, rng));
    params.add("w", random_tensor<double>({3, 2, 3, 3}, rng));
    params.add("b", random_tensor<double>({3}, rng));
    auto build = [pad](Graph<double>& g, ParamStore<double>& p) {
      return g.conv2d(g.param(p, "in"), g.param(p, "w"), g.param(p, "b"), pad);
    };
    CHECK(check<double>(params, build) < 1e-5);
  }
}

TEST_CASE("linear gradients") {
  Rng rng(102);
  ParamStore<double> params;
  params.add("in", random_tensor<double>({3, 4}, rng));
  params.add("w", random_tensor<double>({2, 4}, rng));
  params.add("b", random_tensor<double>({2}, rng));
  auto build = [](Graph<double>& g, ParamStore<double>& p) {
    return g.linear(g.param(p, "in"), g.param(p, "w"), g.param(p, "b"));
  };
  CHECK(check<double>(params, build) < 1e-5);
}

TEST_CASE("activation gradients away from kinks") {
  Rng rng(103);
  // relu: keep inputs clear of 0
  ParamStore<double> params;
  Tensor<double> x = random_tensor<double>({2, 1, 4, 4}, rng, 0.2, 1.5);
  Rng sign(104);
  for (int64_t i = 0; i < x.numel(); ++i)
    if (sign.coin()) x.data()[i] = -x.data()[i];
  params.add("x", x);
  auto relu_build = [](Graph<double>& g, ParamStore<double>& p) {
    return g.relu(g.param(p, "x"));
  };
  CHECK(check<double>(params, relu_build) < 1e-5);

  ParamStore<double> p2;
  p2.add("x", random_tensor<double>({1, 2, 3, 3}, rng, -2, 2));
  auto tanh_build = [](Graph<double>& g, ParamStore<double>& p) {
    return g.tanh_act(g.param(p, "x"));
  };
  CHECK(check<double>(p2, tanh_build) < 1e-5);

  ParamStore<double> p3;
  p3.add("x", random_tensor<double>({1, 2, 3, 3}, rng, -3, 3));
  auto sig_build = [](Graph<double>& g, ParamStore<double>& p) {
    return g.sigmoid(g.param(p, "x"));
  };
  CHECK(check<double>(p3, sig_build) < 1e-5);
}

TEST_CASE("maxpool gradient with well-separated values") {
  ParamStore<double> params;
  Tensor<double> x({1, 1, 4, 4});
  for (int i = 0; i < 16; ++i) x.data()[i] = i * 0.37 - 2.0;  // all distinct
  params.add("x", x);
  auto build = [](Graph<double>& g, ParamStore<double>& p) {
    return g.maxpool2x2(g.param(p, "x"));
  };
  CHECK(check<double>(params, build, 1e-7) < 1e-5);
}

TEST_CASE("upsample and downsample gradients") {
  Rng rng(105);
  for (Upsample mode : {Upsample::kBilinear, Upsample::kNearest}) {
    ParamStore<double> params;
    params.add("x", random_tensor<double>({2, 2, 3, 4}, rng));
    auto build = [mode](Graph<double>& g, ParamStore<double>& p) {
      return g.upsample(g.param(p, "x"), 7, 9, mode);
    };
    CHECK(check<double>(params, build) < 1e-5);
  }
  ParamStore<double> params;
  params.add("x", random_tensor<double>({2, 2, 4, 6}, rng));
  auto build = [](Graph<double>& g, ParamStore<double>& p) {
    return g.downsample_avg2x(g.param(p, "x"));
  };
  CHECK(check<double>(params, build) < 1e-5);
}

TEST_CASE("concat, slice, add, scale, clamp, flatten gradients") {
  Rng rng(106);
  ParamStore<double> params;
  params.add("a", random_tensor<double>({2, 2, 3, 3}, rng, -0.9, 0.9));
  params.add("b", random_tensor<double>({2, 1, 3, 3}, rng, -0.9, 0.9));
  auto build = [](Graph<double>& g, ParamStore<double>& p) {
    Var<double> cat = g.concat_channels(g.param(p, "a"), g.param(p, "b"));
    Var<double> left = g.slice_channels(cat, 0, 2);
    Var<double> scaled = g.scale(g.param(p, "a"), 0.7);
    Var<double> sum = g.add(left, scaled);
    return g.flatten(g.clamp_unit(sum));
  };
  CHECK(check<double>(params, build) < 1e-5);
}

TEST_CASE("loss gradients: lp, gdl, bce") {
  Rng rng(107);
  // p = 2 everywhere, p = 1 with a margin from zero difference
  {
    ParamStore<double> params;
    params.add("pred", random_tensor<double>({2, 1, 4, 4}, rng));
    // targets offset well away from the predictions: no |.| kinks for p=1
    Tensor<double> target = random_tensor<double>({2, 1, 4, 4}, rng, 2.0, 3.0);
    for (int p_norm : {1, 2}) {
      auto f = [&params, &target, p_norm](bool with_grad) {
        Graph<double> g;
        Var<double> loss = lp_loss(g, g.param(params, "pred"), target, p_norm);
        const double v = g.value(loss).data()[0];
        if (with_grad) g.backward(loss);
        return v;
      };
      CHECK(grad_check<double>(f, params, 1e-6).max_rel_err < 1e-5);
    }
  }
  for (int alpha : {1, 2}) {
    ParamStore<double> params;
    params.add("pred", random_tensor<double>({1, 1, 5, 5}, rng));
    Tensor<double> target = random_tensor<double>({1, 1, 5, 5}, rng, 3.0, 6.0);
    auto f = [&params, &target, alpha](bool with_grad) {
      Graph<double> g;
      Var<double> loss = gdl_loss(g, g.param(params, "pred"), target, alpha);
      const double v = g.value(loss).data()[0];
      if (with_grad) g.backward(loss);
      return v;
    };
    CHECK(grad_check<double>(f, params, 1e-6).max_rel_err < 1e-5);
  }
  {
    ParamStore<double> params;
    params.add("logit", random_tensor<double>({3, 1}, rng, -2.0, 2.0));
    const std::vector<double> targets = {1, 0, 1};
    auto f = [&params, &targets](bool with_grad) {
      Graph<double> g;
      Var<double> pred = g.sigmoid(g.param(params, "logit"));
      Var<double> loss = bce_loss(g, pred, targets);
      const double v = g.value(loss).data()[0];
      if (with_grad) g.backward(loss);
      return v;
    };
    CHECK(grad_check<double>(f, params, 1e-6).max_rel_err < 1e-5);
  }
}

TEST_CASE("full generator + combined loss gradient on a 4x4 clip") {
  ModelSpec spec;
  spec.scales = {2, 2};  // scales 2x2 and 4x4
  spec.g.in_frames = 2;
  spec.g.out_frames = 1;
  spec.g.channels = 1;
  spec.g.scales = {{{3}, {3, 3}}, {{4}, {3, 3}}};
  spec.d.in_frames = 2;
  spec.d.out_frames = 1;
  spec.d.channels = 1;
  spec.d.scales = {{{2}, {1}, false, {4}}, {{3}, {3}, false, {4}}};
  spec.validate();

  ParamStore<double> g_params = init_generator_params<double>(spec.g, 42);
  ParamStore<double> d_params =
      init_discriminator_params<double>(spec.d, spec.scales, 43);

  Rng rng(55);
  Tensor<double> x = random_tensor<double>({2, 2, 4, 4}, rng, -0.8, 0.8);
  Tensor<double> y = random_tensor<double>({2, 1, 4, 4}, rng, -0.8, 0.8);
  const Pyramid<double> pyr = build_pyramid(x, y, spec.scales);

  LossWeights weights{0.05, 1.0, 1.0, 2, 1};
  auto f = [&](bool with_grad) {
    Graph<double> g;
    std::vector<Var<double>> gen =
        generator_forward(g, spec.g, g_params, pyr, true);
    Var<double> loss = combined_loss(g, weights, &spec.d, spec.scales,
                                     &d_params, pyr, gen, nullptr);
    const double v = g.value(loss).data()[0];
    if (with_grad) g.backward(loss);
    return v;
  };
  CHECK(grad_check<double>(f, g_params, 1e-6).max_rel_err < 1e-5);
}

TEST_CASE("32-bit gradients hold to the looser tolerance") {
  Rng rng(108);
  ParamStore<float> params;
  params.add("in", random_tensor<float>({1, 2, 4, 4}, rng));
  params.add("w", random_tensor<float>({2, 2, 3, 3}, rng));
  params.add("b", random_tensor<float>({2}, rng));
  auto f = [&params](bool with_grad) {
    Graph<float> g;
    Var<float> out = g.tanh_act(g.conv2d(g.param(params, "in"),
                                         g.param(params, "w"),
                                         g.param(params, "b"), 1));
    Rng trng(11);
    Tensor<float> target = random_tensor<float>(g.value(out).shape(), trng);
    Var<float> loss = lp_loss(g, out, target, 2);
    const float v = g.value(loss).data()[0];
    if (with_grad) g.backward(loss);
    return v;
  };
  CHECK(grad_check<float>(f, params, 1e-2f).max_rel_err < 1e-2f);
}
