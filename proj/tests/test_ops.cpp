#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "framepred/graph.hpp"
#include "oracles.hpp"

using namespace framepred;
using oracles::max_abs_diff;
using oracles::max_rel_diff;
using oracles::random_tensor;

TEST_CASE("conv2d identity kernel") {
  Graph<float> g;
  Tensor<float> in({1, 1, 3, 3}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor<float> w({1, 1, 1, 1}, {1});
  Tensor<float> b({1}, {0});
  Var<float> out = g.conv2d(g.constant(in), g.constant(w), g.constant(b), 0);
  CHECK(max_abs_diff(g.value(out), in) == 0.0);
}

TEST_CASE("conv2d constant field with all-ones 3x3 kernel") {
  Graph<float> g;
  const float c = 0.37f, bias = 0.25f;
  Tensor<float> in = Tensor<float>::full({2, 1, 5, 6}, c);
  Tensor<float> w = Tensor<float>::full({1, 1, 3, 3}, 1.0f);
  Tensor<float> b({1}, {bias});
  const Tensor<float>& out =
      g.value(g.conv2d(g.constant(in), g.constant(w), g.constant(b), 0));
  CHECK(out.shape() == Shape{2, 1, 3, 4});
  for (int64_t i = 0; i < out.numel(); ++i)
    CHECK(out.data()[i] == doctest::Approx(9 * c + bias).epsilon(1e-6));
}

TEST_CASE("conv2d matches the nested-loop reference") {
  Rng rng(123);
  for (int trial = 0; trial < 5; ++trial) {
    const int pad = trial % 3;
    Graph<float> g;
    Tensor<float> in = random_tensor<float>({2, 3, 8, 8}, rng);
    Tensor<float> w = random_tensor<float>({4, 3, 3, 3}, rng);
    Tensor<float> b = random_tensor<float>({4}, rng);
    const Tensor<float>& out =
        g.value(g.conv2d(g.constant(in), g.constant(w), g.constant(b), pad));
    Tensor<float> ref = oracles::conv2d_ref(in, w, b, pad);
    CHECK(max_rel_diff(out, ref) < 1e-5);
  }
}

TEST_CASE("conv2d shape errors") {
  Graph<float> g;
  Tensor<float> in({1, 2, 4, 4});
  Tensor<float> w({1, 3, 3, 3});  // channel mismatch
  Tensor<float> b({1});
  CHECK_THROWS_AS(g.conv2d(g.constant(in), g.constant(w), g.constant(b), 0),
                  ShapeError);
  Tensor<float> w2({1, 2, 7, 7});  // kernel larger than padded input
  CHECK_THROWS_AS(g.conv2d(g.constant(in), g.constant(w2), g.constant(b), 1),
                  ShapeError);
  Tensor<float> w3({1, 2, 3, 3});
  CHECK_THROWS_AS(g.conv2d(g.constant(in), g.constant(w3), g.constant(b), -1),
                  ShapeError);
}

TEST_CASE("conv2d with padding (k-1)/2 preserves spatial dims") {
  Rng rng(7);
  for (int k : {1, 3, 5, 7}) {
    Graph<float> g;
    Tensor<float> in = random_tensor<float>({1, 2, 9, 11}, rng);
    Tensor<float> w = random_tensor<float>({3, 2, k, k}, rng);
    Tensor<float> b = random_tensor<float>({3}, rng);
    const Tensor<float>& out =
        g.value(g.conv2d(g.constant(in), g.constant(w), g.constant(b), (k - 1) / 2));
    CHECK(out.dim(2) == 9);
    CHECK(out.dim(3) == 11);
  }
}

TEST_CASE("relu forward and subgradient convention") {
  Graph<float> g;
  Tensor<float> in({1, 1, 1, 3}, {-1, 0, 2});
  Var<float> x = g.leaf(in.clone(), true);
  Var<float> y = g.relu(x);
  CHECK(g.value(y).vec() == std::vector<float>{0, 0, 2});

  // all-positive tensor is unchanged
  Graph<float> g2;
  Tensor<float> pos({1, 1, 2, 2}, {0.5f, 1, 2, 3});
  CHECK(max_abs_diff(g2.value(g2.relu(g2.constant(pos))), pos) == 0.0);

  // gradient at [-1, 2] with upstream [1, 1] -> [0, 1]
  Graph<float> g4;
  Var<float> x4 = g4.leaf(Tensor<float>({1, 1, 1, 2}, {-1, 2}), true);
  Var<float> y4 = g4.relu(x4);
  // seed output gradient with ones via a scalar node: sum = flatten+linear(1s)
  Var<float> flat = g4.flatten(y4);
  Var<float> w = g4.constant(Tensor<float>({1, 2}, {1, 1}));
  Var<float> b = g4.constant(Tensor<float>({1}));
  Var<float> total = g4.linear(flat, w, b);
  g4.backward(total);
  CHECK(g4.grad(x4) == std::vector<float>{0, 1});
}

TEST_CASE("tanh and sigmoid point values") {
  Graph<float> g;
  Tensor<float> in({1, 1, 1, 3}, {0.0f, 20.0f, -20.0f});
  const Tensor<float>& t = g.value(g.tanh_act(g.constant(in)));
  CHECK(t.data()[0] == 0.0f);
  CHECK(t.data()[1] == doctest::Approx(1.0).epsilon(1e-6));
  const Tensor<float>& s = g.value(g.sigmoid(g.constant(in)));
  CHECK(s.data()[0] == 0.5f);
  CHECK(s.data()[1] > 0.999999f);
  CHECK(s.data()[2] < 1e-6f);
}

TEST_CASE("sigmoid(x) + sigmoid(-x) == 1") {
  Rng rng(5);
  Graph<float> g;
  Tensor<float> x = random_tensor<float>({1, 1, 4, 4}, rng, -8, 8);
  Tensor<float> nx = x.clone();
  for (int64_t i = 0; i < nx.numel(); ++i) nx.data()[i] = -nx.data()[i];
  const Tensor<float>& a = g.value(g.sigmoid(g.constant(x)));
  const Tensor<float>& b = g.value(g.sigmoid(g.constant(nx)));
  for (int64_t i = 0; i < a.numel(); ++i)
    CHECK(a.data()[i] + b.data()[i] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("linear identity, bias broadcast, and reference") {
  Graph<float> g;
  Tensor<float> in({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor<float> eye({3, 3}, {1, 0, 0, 0, 1, 0, 0, 0, 1});
  Tensor<float> zero3({3});
  CHECK(max_abs_diff(g.value(g.linear(g.constant(in), g.constant(eye),
                                      g.constant(zero3))),
                     in) == 0.0);

  Tensor<float> wz({2, 3});
  Tensor<float> bias({2}, {0.5f, -1.5f});
  const Tensor<float>& out =
      g.value(g.linear(g.constant(in), g.constant(wz), g.constant(bias)));
  CHECK(out.vec() == std::vector<float>{0.5f, -1.5f, 0.5f, -1.5f});

  Rng rng(88);
  Tensor<float> rin = random_tensor<float>({3, 7}, rng);
  Tensor<float> rw = random_tensor<float>({4, 7}, rng);
  Tensor<float> rb = random_tensor<float>({4}, rng);
  CHECK(max_rel_diff(g.value(g.linear(g.constant(rin), g.constant(rw),
                                      g.constant(rb))),
                     oracles::linear_ref(rin, rw, rb)) < 1e-5);

  Tensor<float> bad({4, 6});
  CHECK_THROWS_AS(g.linear(g.constant(bad), g.constant(rw), g.constant(rb)),
                  ShapeError);
}

TEST_CASE("maxpool2x2 forward, errors, gradient routing") {
  Graph<float> g;
  Tensor<float> in({1, 1, 2, 2}, {1, 2, 3, 4});
  CHECK(g.value(g.maxpool2x2(g.constant(in))).vec() == std::vector<float>{4});

  Tensor<float> constant = Tensor<float>::full({1, 2, 4, 4}, 3.25f);
  const Tensor<float>& pooled = g.value(g.maxpool2x2(g.constant(constant)));
  CHECK(pooled.shape() == Shape{1, 2, 2, 2});
  for (int64_t i = 0; i < pooled.numel(); ++i) CHECK(pooled.data()[i] == 3.25f);

  Tensor<float> odd({1, 1, 3, 4});
  CHECK_THROWS_AS(g.maxpool2x2(g.constant(odd)), ShapeError);

  // upstream gradient lands only on the argmax (position (1,1))
  Graph<float> g2;
  Var<float> x = g2.leaf(in.clone(), true);
  Var<float> y = g2.maxpool2x2(x);
  Var<float> total = g2.linear(g2.flatten(y), g2.constant(Tensor<float>({1, 1}, {1})),
                               g2.constant(Tensor<float>({1})));
  g2.backward(total);
  CHECK(g2.grad(x) == std::vector<float>{0, 0, 0, 1});
}

TEST_CASE("maxpool tie-break goes to the first element in row-major order") {
  Graph<float> g;
  Var<float> x = g.leaf(Tensor<float>({1, 1, 2, 2}, {5, 5, 5, 5}), true);
  Var<float> y = g.maxpool2x2(x);
  Var<float> total = g.linear(g.flatten(y), g.constant(Tensor<float>({1, 1}, {1})),
                              g.constant(Tensor<float>({1})));
  g.backward(total);
  CHECK(g.grad(x) == std::vector<float>{1, 0, 0, 0});
}

TEST_CASE("upsample constants, nearest replication, bilinear coordinates") {
  Graph<float> g;
  Tensor<float> one = Tensor<float>::full({1, 1, 1, 1}, 0.77f);
  for (Upsample mode : {Upsample::kBilinear, Upsample::kNearest}) {
    const Tensor<float>& out = g.value(g.upsample(g.constant(one), 2, 2, mode));
    for (int64_t i = 0; i < 4; ++i) CHECK(out.data()[i] == 0.77f);
  }

  Tensor<float> quad({1, 1, 2, 2}, {0, 1, 2, 3});
  const Tensor<float>& nn =
      g.value(g.upsample(g.constant(quad), 4, 4, Upsample::kNearest));
  const std::vector<float> want = {0, 0, 1, 1, 0, 0, 1, 1,
                                   2, 2, 3, 3, 2, 2, 3, 3};
  CHECK(nn.vec() == want);

  // hand evaluation of the half-pixel-center formula
  Tensor<float> cols({1, 1, 2, 2}, {0, 2, 0, 2});
  const Tensor<float>& bl =
      g.value(g.upsample(g.constant(cols), 4, 4, Upsample::kBilinear));
  for (int r = 0; r < 4; ++r) {
    CHECK(bl.data()[r * 4 + 0] == doctest::Approx(0.0));
    CHECK(bl.data()[r * 4 + 1] == doctest::Approx(0.5));
    CHECK(bl.data()[r * 4 + 2] == doctest::Approx(1.5));
    CHECK(bl.data()[r * 4 + 3] == doctest::Approx(2.0));
  }

  CHECK_THROWS_AS(g.upsample(g.constant(quad), 1, 4, Upsample::kBilinear),
                  ShapeError);
}

TEST_CASE("downsample_avg2x examples and repeated-mean oracle") {
  Graph<float> g;
  Tensor<float> in({1, 1, 2, 2}, {0, 2, 4, 6});
  CHECK(g.value(g.downsample_avg2x(g.constant(in))).vec() ==
        std::vector<float>{3});

  Tensor<float> constant = Tensor<float>::full({2, 3, 4, 4}, -0.4f);
  const Tensor<float>& down = g.value(g.downsample_avg2x(g.constant(constant)));
  for (int64_t i = 0; i < down.numel(); ++i)
    CHECK(down.data()[i] == doctest::Approx(-0.4f));

  // applying twice to an 8x8 ramp equals a one-shot 4x-area mean
  Tensor<float> ramp({1, 1, 8, 8});
  for (int i = 0; i < 64; ++i) ramp.data()[i] = static_cast<float>(i);
  Tensor<float> twice =
      downsample_avg2x_value(downsample_avg2x_value(ramp));
  CHECK(max_abs_diff(twice, oracles::mean_pool_ref(ramp, 4)) < 1e-6);

  Tensor<float> odd({1, 1, 6, 5});
  CHECK_THROWS_AS(g.downsample_avg2x(g.constant(odd)), ShapeError);
}

TEST_CASE("upsample then downsample of a constant is the identity") {
  Graph<float> g;
  for (Upsample mode : {Upsample::kBilinear, Upsample::kNearest}) {
    Tensor<float> c = Tensor<float>::full({1, 2, 3, 5}, 1.23f);
    Var<float> up = g.upsample(g.constant(c), 6, 10, mode);
    const Tensor<float>& back = g.value(g.downsample_avg2x(up));
    CHECK(max_abs_diff(back, c) < 1e-6);
  }
}

TEST_CASE("concat_channels basics, empty input, slice inverse") {
  Graph<float> g;
  Rng rng(3);
  Tensor<float> a = random_tensor<float>({2, 1, 3, 3}, rng);
  Tensor<float> b = random_tensor<float>({2, 1, 3, 3}, rng);
  Var<float> cat = g.concat_channels(g.constant(a), g.constant(b));
  CHECK(g.value(cat).shape() == Shape{2, 2, 3, 3});

  // concat with a zero-channel tensor is the identity
  Tensor<float> empty({2, 0, 3, 3});
  const Tensor<float>& same =
      g.value(g.concat_channels(g.constant(a), g.constant(empty)));
  CHECK(max_abs_diff(same, a) == 0.0);

  // channel slicing recovers both inputs bit-exactly
  const Tensor<float>& ra = g.value(g.slice_channels(cat, 0, 1));
  const Tensor<float>& rb = g.value(g.slice_channels(cat, 1, 2));
  CHECK(max_abs_diff(ra, a) == 0.0);
  CHECK(max_abs_diff(rb, b) == 0.0);

  Tensor<float> wrong({2, 1, 4, 3});
  CHECK_THROWS_AS(g.concat_channels(g.constant(a), g.constant(wrong)),
                  ShapeError);
}

TEST_CASE("concat_channels splits gradients") {
  Graph<float> g;
  Var<float> a = g.leaf(Tensor<float>({1, 1, 1, 2}, {1, 2}), true);
  Var<float> b = g.leaf(Tensor<float>({1, 1, 1, 2}, {3, 4}), true);
  Var<float> cat = g.concat_channels(a, b);
  Var<float> total =
      g.linear(g.flatten(cat), g.constant(Tensor<float>({1, 4}, {1, 2, 3, 4})),
               g.constant(Tensor<float>({1})));
  g.backward(total);
  CHECK(g.grad(a) == std::vector<float>{1, 2});
  CHECK(g.grad(b) == std::vector<float>{3, 4});
}

TEST_CASE("clamp_unit saturates and gates gradients") {
  Graph<float> g;
  Var<float> x = g.leaf(Tensor<float>({1, 1, 1, 4}, {-2, -0.5f, 0.5f, 2}), true);
  Var<float> y = g.clamp_unit(x);
  CHECK(g.value(y).vec() == std::vector<float>{-1, -0.5f, 0.5f, 1});
  Var<float> total =
      g.linear(g.flatten(y), g.constant(Tensor<float>({1, 4}, {1, 1, 1, 1})),
               g.constant(Tensor<float>({1})));
  g.backward(total);
  CHECK(g.grad(x) == std::vector<float>{0, 1, 1, 0});
}

TEST_CASE("ops keep values finite on finite inputs") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    Graph<float> g;
    Tensor<float> in = random_tensor<float>({2, 3, 8, 8}, rng, -3, 3);
    Tensor<float> w = random_tensor<float>({4, 3, 3, 3}, rng, -2, 2);
    Tensor<float> b = random_tensor<float>({4}, rng);
    Var<float> x = g.leaf(in, true);
    Var<float> h = g.conv2d(x, g.constant(w), g.constant(b), 1);
    h = g.relu(h);
    h = g.maxpool2x2(h);
    h = g.tanh_act(h);
    h = g.upsample(h, 8, 8, trial % 2 ? Upsample::kBilinear : Upsample::kNearest);
    h = g.sigmoid(h);
    h = g.downsample_avg2x(h);
    CHECK(g.value(h).all_finite());
    Var<float> flat = g.flatten(h);
    Var<float> total = g.linear(
        flat, g.constant(Tensor<float>::full({1, g.value(flat).dim(1)}, 0.01f)),
        g.constant(Tensor<float>({1})));
    g.backward(total);
    bool finite = true;
    for (float v : g.grad(x))
      finite = finite && std::isfinite(v);
    CHECK(finite);
  }
}

TEST_CASE("backward may only run once per graph") {
  Graph<float> g;
  Var<float> x = g.leaf(Tensor<float>({1, 1}, {2}), true);
  Var<float> y = g.linear(x, g.constant(Tensor<float>({1, 1}, {3})),
                          g.constant(Tensor<float>({1})));
  g.backward(y);
  CHECK_THROWS_AS(g.backward(y), Error);
}
