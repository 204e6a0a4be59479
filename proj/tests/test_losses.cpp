#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "framepred/losses.hpp"
#include "oracles.hpp"

using namespace framepred;
using oracles::random_tensor;

namespace {

// Tiny 1-scale model used by the adversarial loss tests: m=1, n=1, c=1,
// scale size 4. D is one 3x3 conv (1 map) and a single output unit.
ModelSpec tiny_spec() {
  ModelSpec spec;
  spec.scales = {1, 4};
  spec.g.in_frames = spec.d.in_frames = 1;
  spec.g.out_frames = spec.d.out_frames = 1;
  spec.g.channels = spec.d.channels = 1;
  spec.g.scales = {{{2}, {3, 3}}};
  spec.d.scales = {{{1}, {3}, false, {}}};
  spec.validate();
  return spec;
}

// D that fires on the sign of the candidate frame: conv averages the
// candidate channel, ReLU keeps the positive case, and the output unit
// saturates the sigmoid either way.
ParamStore<float> sign_discriminator(const ModelSpec& spec) {
  ParamStore<float> d =
      init_discriminator_params<float>(spec.d, spec.scales, 0);
  for (const auto& name : d.names()) {
    Tensor<float>& t = d.get(name);
    std::fill(t.vec().begin(), t.vec().end(), 0.0f);
  }
  Tensor<float>& conv = d.get("s1.conv0.w");  // (1, 2, 3, 3): [X | candidate]
  for (int i = 0; i < 9; ++i) conv.data()[conv.offset4(0, 1, i / 3, i % 3)] = 1.0f / 9.0f;
  Tensor<float>& fc = d.get("s1.fc0.w");  // (1, 4)
  std::fill(fc.vec().begin(), fc.vec().end(), 40.0f);
  d.get("s1.fc0.b").data()[0] = -80.0f;
  return d;
}

}  // namespace

TEST_CASE("lp_loss point examples") {
  Tensor<float> a({1, 1, 1, 1}, {0.5f});
  Tensor<float> z({1, 1, 1, 1}, {0.0f});
  CHECK(lp_loss_value(a, a, 2) == 0.0f);
  CHECK(lp_loss_value(a, z, 2) == doctest::Approx(0.25));
  Tensor<float> p({1, 1, 1, 2}, {0.2f, -0.3f});
  Tensor<float> t({1, 1, 1, 2}, {0.0f, 0.1f});
  CHECK(lp_loss_value(p, t, 1) == doctest::Approx(0.6));
  CHECK_THROWS_AS(lp_loss_value(p, a, 1), ShapeError);
}

TEST_CASE("lp_loss is batch-averaged") {
  Tensor<float> p({2, 1, 1, 1}, {1.0f, 3.0f});
  Tensor<float> t({2, 1, 1, 1}, {0.0f, 0.0f});
  // (1 + 9) / 2
  CHECK(lp_loss_value(p, t, 2) == doctest::Approx(5.0));
}

TEST_CASE("lp_loss p=2 equals the squared Frobenius distance") {
  Rng rng(41);
  Tensor<double> p = random_tensor<double>({3, 2, 4, 4}, rng);
  Tensor<double> t = random_tensor<double>({3, 2, 4, 4}, rng);
  double direct = 0;
  for (int64_t i = 0; i < p.numel(); ++i) {
    const double d = p.data()[i] - t.data()[i];
    direct += d * d;
  }
  direct /= 3.0;
  CHECK(lp_loss_value(p, t, 2) == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("gdl_loss hand-enumerated example") {
  Tensor<float> y({1, 1, 2, 2}, {0, 1, 0, 1});
  Tensor<float> yhat({1, 1, 2, 2}, {0, 0, 0, 0});
  CHECK(gdl_loss_value(yhat, y, 1) == doctest::Approx(2.0));
  CHECK(gdl_loss_value(y, y, 1) == 0.0f);

  // matching absolute gradients despite inverted intensities
  Tensor<float> inv({1, 1, 2, 2}, {1, 0, 1, 0});
  CHECK(gdl_loss_value(inv, y, 1) == doctest::Approx(0.0));
}

TEST_CASE("gdl_loss is symmetric and positive, errors on tiny images") {
  Rng rng(42);
  Tensor<float> a = random_tensor<float>({2, 1, 5, 5}, rng);
  Tensor<float> b = random_tensor<float>({2, 1, 5, 5}, rng);
  for (int alpha : {1, 2}) {
    const float ab = gdl_loss_value(a, b, alpha);
    const float ba = gdl_loss_value(b, a, alpha);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-6));
    CHECK(ab >= 0.0f);
  }
  Tensor<float> thin({1, 1, 1, 5});
  CHECK_THROWS_AS(gdl_loss_value(thin, thin, 1), ShapeError);
}

TEST_CASE("gdl_loss is zero iff absolute forward differences agree") {
  // shifted image: same gradients, zero loss
  Tensor<float> a({1, 1, 2, 3}, {0, 1, 3, 2, 3, 5});
  Tensor<float> shifted({1, 1, 2, 3}, {10, 11, 13, 12, 13, 15});
  CHECK(gdl_loss_value(shifted, a, 1) == doctest::Approx(0.0));
  // any gradient mismatch shows up
  Tensor<float> off({1, 1, 2, 3}, {0, 1, 3.5f, 2, 3, 5});
  CHECK(gdl_loss_value(off, a, 1) > 0.0f);
}

TEST_CASE("bce_loss point values") {
  CHECK(bce_loss_value<float>({0.9999999f}, {1}) ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(bce_loss_value<float>({0.5f}, {0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-6));
  CHECK(bce_loss_value<float>({0.5f}, {1}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-6));
  // -ln(0.1)
  CHECK(bce_loss_value<float>({0.9f}, {0}) ==
        doctest::Approx(2.302585093).epsilon(1e-6));
  CHECK_THROWS_AS(bce_loss_value<float>({0.5f}, {0.5f}), Error);
}

TEST_CASE("adv_d_loss: perfect and chance discriminators") {
  const ModelSpec spec = tiny_spec();
  // real candidate = +1 everywhere, generated = -1 everywhere
  Tensor<float> x = Tensor<float>::full({2, 1, 4, 4}, 0.0f);
  Tensor<float> y = Tensor<float>::full({2, 1, 4, 4}, 1.0f);
  const Pyramid<float> pyr = build_pyramid(x, y, spec.scales);
  std::vector<Tensor<float>> fake = {Tensor<float>::full({2, 1, 4, 4}, -1.0f)};

  ParamStore<float> sharp = sign_discriminator(spec);
  Graph<float> g;
  Var<float> loss = adv_d_loss(g, spec.d, spec.scales, sharp, pyr, fake);
  CHECK(g.value(loss).data()[0] < 1e-4f);

  // all-zero D outputs 0.5 on everything: 2 * N_scales * ln 2
  ParamStore<float> chance =
      init_discriminator_params<float>(spec.d, spec.scales, 0);
  for (const auto& name : chance.names()) {
    Tensor<float>& t = chance.get(name);
    std::fill(t.vec().begin(), t.vec().end(), 0.0f);
  }
  Graph<float> g2;
  Var<float> loss2 = adv_d_loss(g2, spec.d, spec.scales, chance, pyr, fake);
  CHECK(g2.value(loss2).data()[0] ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-5));

  // scale-count mismatch
  Graph<float> g3;
  std::vector<Tensor<float>> wrong;
  CHECK_THROWS_AS(adv_d_loss(g3, spec.d, spec.scales, chance, pyr, wrong),
                  ShapeError);
}

TEST_CASE("adv_d_loss matches a hand-composed per-scale sum") {
  ModelSpec spec;
  spec.scales = {2, 4};
  spec.g.in_frames = spec.d.in_frames = 2;
  spec.g.out_frames = spec.d.out_frames = 1;
  spec.g.channels = spec.d.channels = 1;
  spec.g.scales = {{{2}, {3, 3}}, {{2}, {3, 3}}};
  spec.d.scales = {{{2}, {3}, false, {6}}, {{2}, {3}, true, {6}}};
  spec.validate();
  ParamStore<float> d = init_discriminator_params<float>(spec.d, spec.scales, 5);

  Rng rng(77);
  Tensor<float> x = random_tensor<float>({3, 2, 8, 8}, rng);
  Tensor<float> y = random_tensor<float>({3, 1, 8, 8}, rng);
  const Pyramid<float> pyr = build_pyramid(x, y, spec.scales);
  std::vector<Tensor<float>> fake = {random_tensor<float>({3, 1, 4, 4}, rng),
                                     random_tensor<float>({3, 1, 8, 8}, rng)};

  Graph<float> g;
  const float combined =
      g.value(adv_d_loss(g, spec.d, spec.scales, d, pyr, fake)).data()[0];

  double manual = 0;
  for (int k = 1; k <= 2; ++k) {
    Graph<float> gk;
    Var<float> xk = gk.constant(pyr.x[k - 1]);
    Var<float> real = discriminator_forward(gk, spec.d, spec.scales, d, xk,
                                            gk.constant(pyr.y[k - 1]), k, false);
    Var<float> fk = discriminator_forward(gk, spec.d, spec.scales, d, xk,
                                          gk.constant(fake[k - 1]), k, false);
    std::vector<float> rv = gk.value(real).vec();
    std::vector<float> fv = gk.value(fk).vec();
    manual += bce_loss_value(rv, std::vector<float>(rv.size(), 1.0f));
    manual += bce_loss_value(fv, std::vector<float>(fv.size(), 0.0f));
  }
  CHECK(combined == doctest::Approx(manual).epsilon(1e-5));
}

TEST_CASE("adv_g_loss values and parameter freezing") {
  const ModelSpec spec = tiny_spec();
  Tensor<float> x = Tensor<float>::full({2, 1, 4, 4}, 0.0f);
  const Pyramid<float> pyr = build_pyramid(x, Tensor<float>{}, spec.scales);

  // D says 1 on the fake: loss ~ 0
  ParamStore<float> sharp = sign_discriminator(spec);
  Graph<float> g;
  std::vector<Var<float>> gen = {g.constant(Tensor<float>::full({2, 1, 4, 4}, 1.0f))};
  CHECK(g.value(adv_g_loss(g, spec.d, spec.scales, sharp, pyr, gen)).data()[0] <
        1e-4f);

  // chance D: N_scales * ln 2, and no gradient reaches D parameters
  ParamStore<float> chance =
      init_discriminator_params<float>(spec.d, spec.scales, 3);
  Graph<float> g2;
  Var<float> pred = g2.leaf(Tensor<float>::full({2, 1, 4, 4}, 0.25f), true);
  chance.zero_grads();
  for (const auto& name : chance.names())
    std::fill(chance.get(name).vec().begin(), chance.get(name).vec().end(), 0.0f);
  Var<float> loss =
      adv_g_loss(g2, spec.d, spec.scales, chance, pyr, {pred});
  CHECK(g2.value(loss).data()[0] == doctest::Approx(std::log(2.0)).epsilon(1e-5));
  g2.backward(loss);
  for (const auto& name : chance.names())
    for (float gv : chance.get(name).grad_vec()) CHECK(gv == 0.0f);
}

TEST_CASE("combined_loss composes the weighted terms") {
  const ModelSpec spec = tiny_spec();
  Rng rng(9);
  Tensor<float> x = random_tensor<float>({2, 1, 4, 4}, rng);
  Tensor<float> y = random_tensor<float>({2, 1, 4, 4}, rng);
  const Pyramid<float> pyr = build_pyramid(x, y, spec.scales);
  ParamStore<float> d = init_discriminator_params<float>(spec.d, spec.scales, 1);

  Graph<float> g;
  Var<float> pred = g.constant(random_tensor<float>({2, 1, 4, 4}, rng));
  CombinedTerms terms;
  LossWeights w{0.05, 1.0, 1.0, 2, 1};
  Var<float> total =
      combined_loss(g, w, &spec.d, spec.scales, &d, pyr, {pred}, &terms);
  CHECK(g.value(total).data()[0] ==
        doctest::Approx(0.05 * terms.adv + terms.lp + terms.gdl).epsilon(1e-5));

  // lambda_adv = lambda_gdl = 0 reduces to the multi-scale lp sum exactly
  Graph<float> g2;
  Var<float> pred2 = g2.constant(g.value(pred));
  LossWeights lp_only{0.0, 1.0, 0.0, 2, 1};
  Var<float> total2 =
      combined_loss(g2, lp_only, nullptr, spec.scales, nullptr, pyr, {pred2},
                    nullptr);
  CHECK(g2.value(total2).data()[0] ==
        lp_loss_value(g.value(pred), pyr.y[0], 2));

  LossWeights zero{0.0, 0.0, 0.0, 2, 1};
  Graph<float> g3;
  Var<float> pred3 = g3.constant(g.value(pred));
  CHECK_THROWS_AS(combined_loss(g3, zero, nullptr, spec.scales, nullptr, pyr,
                                {pred3}, nullptr),
                  ConfigError);
}

TEST_CASE("expected-loss minimizers: mean for l2, median band for l1") {
  // pixel target is v1 or v2 with probability 1/2; scan candidate values
  const double v1 = 0.2, v2 = 0.8;
  auto e_l2 = [&](double z) {
    return 0.5 * (z - v1) * (z - v1) + 0.5 * (z - v2) * (z - v2);
  };
  auto e_l1 = [&](double z) {
    return 0.5 * std::abs(z - v1) + 0.5 * std::abs(z - v2);
  };
  double best_l2 = -1, best_l2_val = 1e9;
  for (double z = -0.5; z <= 1.5; z += 0.001) {
    if (e_l2(z) < best_l2_val) {
      best_l2_val = e_l2(z);
      best_l2 = z;
    }
  }
  CHECK(best_l2 == doctest::Approx((v1 + v2) / 2).epsilon(1e-2));
  // expected l1 is flat (and minimal) on the whole median band [v1, v2]
  const double floor_val = (v2 - v1) / 2;
  for (double z : {0.25, 0.5, 0.75})
    CHECK(e_l1(z) == doctest::Approx(floor_val).epsilon(1e-9));
  CHECK(e_l1(0.1) > floor_val + 1e-6);
  CHECK(e_l1(0.9) > floor_val + 1e-6);
}

TEST_CASE("loss weights validation") {
  LossWeights bad{0, 0, 0, 2, 1};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  LossWeights badp{0, 1, 0, 3, 1};
  CHECK_THROWS_AS(badp.validate(), ConfigError);
  LossWeights neg{-0.1, 1, 0, 2, 1};
  CHECK_THROWS_AS(neg.validate(), ConfigError);
  LossWeights ok{0.05, 1, 1, 2, 1};
  CHECK_NOTHROW(ok.validate());
}
