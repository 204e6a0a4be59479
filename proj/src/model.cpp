#include "framepred/model.hpp"

#include <cmath>
#include <sstream>

namespace framepred {

namespace {

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

// Comma-separated integer list; an empty string is an empty list.
std::vector<int> split_ints(const std::string& s, const std::string& what) {
  std::vector<int> out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) throw ConfigError("empty entry in integer list for " + what);
    size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(cur, &pos);
    } catch (const std::exception&) {
      throw ConfigError("bad integer '" + cur + "' in " + what);
    }
    if (pos != cur.size()) throw ConfigError("bad integer '" + cur + "' in " + what);
    out.push_back(v);
    cur.clear();
  };
  for (char ch : s) {
    if (ch == ',')
      flush();
    else if (!std::isspace(static_cast<unsigned char>(ch)))
      cur.push_back(ch);
  }
  if (!cur.empty()) flush();
  return out;
}

std::string gname_w(int k, size_t layer) {
  return "s" + std::to_string(k) + ".conv" + std::to_string(layer) + ".w";
}
std::string gname_b(int k, size_t layer) {
  return "s" + std::to_string(k) + ".conv" + std::to_string(layer) + ".b";
}
std::string dname_fc_w(int k, size_t layer) {
  return "s" + std::to_string(k) + ".fc" + std::to_string(layer) + ".w";
}
std::string dname_fc_b(int k, size_t layer) {
  return "s" + std::to_string(k) + ".fc" + std::to_string(layer) + ".b";
}

template <typename T>
Tensor<T> uniform_tensor(const Shape& shape, double bound, Rng& rng) {
  Tensor<T> t{shape};
  T* p = t.data();
  const int64_t n = t.numel();
  for (int64_t i = 0; i < n; ++i)
    p[i] = static_cast<T>(rng.uniform(-bound, bound));
  return t;
}

template <typename T>
void check_param(const ParamStore<T>& store, const std::string& name,
                 const Shape& want) {
  if (!store.has(name))
    throw Error("parameter store does not match spec: missing " + name);
  const Tensor<T>& t = store.get(name);
  if (!shape_eq(t.shape(), want))
    throw Error("parameter " + name + " has shape " + shape_str(t.shape()) +
                ", spec wants " + shape_str(want));
}

}  // namespace

void ScaleConfig::validate() const {
  if (n_scales < 1) throw ConfigError("n_scales must be >= 1");
  if (base_size < 1) throw ConfigError("base_size must be >= 1");
}

void GeneratorSpec::validate(const ScaleConfig& sc) const {
  sc.validate();
  if (in_frames < 1 || out_frames < 1)
    throw ConfigError("generator needs in_frames >= 1 and out_frames >= 1");
  if (channels < 1) throw ConfigError("channels must be >= 1");
  if (static_cast<int>(scales.size()) != sc.n_scales)
    throw ConfigError("generator defines " + std::to_string(scales.size()) +
                      " scales, scale config wants " +
                      std::to_string(sc.n_scales));
  for (size_t i = 0; i < scales.size(); ++i) {
    const GeneratorScale& s = scales[i];
    if (s.kernels.size() != s.maps.size() + 1)
      throw ConfigError("generator scale " + std::to_string(i + 1) + ": " +
                        std::to_string(s.maps.size()) + " feature maps need " +
                        std::to_string(s.maps.size() + 1) + " kernels, got " +
                        std::to_string(s.kernels.size()));
    for (int m : s.maps)
      if (m < 1) throw ConfigError("feature map counts must be >= 1");
    for (int k : s.kernels) {
      if (k < 1) throw ConfigError("kernel sizes must be >= 1");
      if (k % 2 == 0)
        throw ConfigError("generator kernels must be odd so padding preserves "
                          "size, got " + std::to_string(k));
    }
  }
}

int DiscriminatorSpec::conv_out_size(int k, const ScaleConfig& sc) const {
  const DiscriminatorScale& s = scales.at(static_cast<size_t>(k - 1));
  int size = sc.size_at(k);
  for (int kernel : s.kernels) {
    size = size - kernel + 1;
    if (size < 1)
      throw ConfigError("discriminator scale " + std::to_string(k) +
                        ": convolutions exhaust the " +
                        std::to_string(sc.size_at(k)) + "px input");
  }
  if (s.pool) {
    if (size % 2 != 0)
      throw ConfigError("discriminator scale " + std::to_string(k) +
                        ": 2x2 pool needs an even conv output, got " +
                        std::to_string(size));
    size /= 2;
  }
  return size;
}

void DiscriminatorSpec::validate(const ScaleConfig& sc) const {
  sc.validate();
  if (in_frames < 1 || out_frames < 1 || channels < 1)
    throw ConfigError("discriminator frame/channel counts must be >= 1");
  if (static_cast<int>(scales.size()) != sc.n_scales)
    throw ConfigError("discriminator defines " + std::to_string(scales.size()) +
                      " scales, scale config wants " +
                      std::to_string(sc.n_scales));
  for (int k = 1; k <= sc.n_scales; ++k) {
    const DiscriminatorScale& s = scales[static_cast<size_t>(k - 1)];
    if (s.maps.size() != s.kernels.size())
      throw ConfigError("discriminator scale " + std::to_string(k) +
                        ": feature map and kernel lists must have equal length");
    if (s.maps.empty())
      throw ConfigError("discriminator scale " + std::to_string(k) +
                        ": needs at least one convolution");
    for (int m : s.maps)
      if (m < 1) throw ConfigError("feature map counts must be >= 1");
    conv_out_size(k, sc);  // throws if the geometry does not work out
    for (int f : s.fc)
      if (f < 1) throw ConfigError("fully-connected sizes must be >= 1");
  }
}

void ModelSpec::validate() const {
  scales.validate();
  g.validate(scales);
  d.validate(scales);
  if (g.in_frames != d.in_frames || g.out_frames != d.out_frames ||
      g.channels != d.channels)
    throw ConfigError("generator and discriminator disagree on frame counts");
}

bool is_model_preset(const std::string& name) {
  return name == "table1-4to1" || name == "table3-8to8";
}

ModelSpec model_preset(const std::string& name, int channels) {
  ModelSpec spec;
  spec.scales.n_scales = 4;
  spec.scales.base_size = 4;
  spec.g.channels = channels;
  spec.d.channels = channels;
  if (name == "table1-4to1") {
    spec.g.in_frames = spec.d.in_frames = 4;
    spec.g.out_frames = spec.d.out_frames = 1;
    // G_3 lists five kernels for six conv layers; a 3 is inserted so the
    // interior stays 3x3 like its neighbors.
    spec.g.scales = {
        {{128, 256, 128}, {3, 3, 3, 3}},
        {{128, 256, 128}, {5, 3, 3, 5}},
        {{128, 256, 512, 256, 128}, {5, 3, 3, 3, 3, 5}},
        {{128, 256, 512, 256, 128}, {7, 5, 5, 5, 5, 7}},
    };
    spec.d.scales = {
        {{64}, {3}, false, {512, 256}},
        {{64, 128, 128}, {3, 3, 3}, false, {1024, 512}},
        {{128, 256, 256}, {5, 5, 5}, false, {1024, 512}},
        {{128, 256, 512, 128}, {7, 7, 5, 5}, true, {1024, 512}},
    };
  } else if (name == "table3-8to8") {
    spec.g.in_frames = spec.d.in_frames = 8;
    spec.g.out_frames = spec.d.out_frames = 8;
    spec.g.scales = {
        {{16, 32, 64}, {3, 3, 3, 3}},
        {{16, 32, 64}, {5, 3, 3, 3}},
        {{32, 64, 128}, {5, 5, 5, 5}},
        {{32, 64, 128, 128}, {7, 5, 5, 5, 5}},
    };
    spec.d.scales = {
        {{16}, {3}, false, {128, 64}},
        {{16, 32, 32}, {3, 3, 3}, false, {256, 128}},
        {{32, 64, 64}, {5, 5, 5}, false, {256, 128}},
        {{32, 64, 128, 128}, {7, 7, 5, 5}, true, {256, 128}},
    };
  } else {
    throw ConfigError("unknown model preset: " + name);
  }
  spec.validate();
  return spec;
}

std::string model_spec_to_text(const ModelSpec& spec) {
  std::ostringstream os;
  os << "scales=" << spec.scales.n_scales << "\n";
  os << "base_size=" << spec.scales.base_size << "\n";
  os << "in_frames=" << spec.g.in_frames << "\n";
  os << "out_frames=" << spec.g.out_frames << "\n";
  os << "channels=" << spec.g.channels << "\n";
  os << "upsample="
     << (spec.g.upsample_mode == Upsample::kBilinear ? "bilinear" : "nearest")
     << "\n";
  for (int k = 1; k <= spec.scales.n_scales; ++k) {
    const GeneratorScale& s = spec.g.scales[static_cast<size_t>(k - 1)];
    os << "g" << k << ".maps=" << join_ints(s.maps) << "\n";
    os << "g" << k << ".kernels=" << join_ints(s.kernels) << "\n";
  }
  for (int k = 1; k <= spec.scales.n_scales; ++k) {
    const DiscriminatorScale& s = spec.d.scales[static_cast<size_t>(k - 1)];
    os << "d" << k << ".maps=" << join_ints(s.maps) << "\n";
    os << "d" << k << ".kernels=" << join_ints(s.kernels) << "\n";
    os << "d" << k << ".pool=" << (s.pool ? 1 : 0) << "\n";
    os << "d" << k << ".fc=" << join_ints(s.fc) << "\n";
  }
  return os.str();
}

ModelSpec model_spec_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::pair<std::string, std::string>> kvs;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("bad model spec line: " + line);
    kvs.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  auto get = [&kvs](const std::string& key) -> const std::string& {
    for (const auto& [k, v] : kvs)
      if (k == key) return v;
    throw ConfigError("model spec is missing key: " + key);
  };
  auto get_int = [&get](const std::string& key) {
    const std::string& v = get(key);
    return split_ints(v, key).at(0);
  };

  ModelSpec spec;
  spec.scales.n_scales = get_int("scales");
  spec.scales.base_size = get_int("base_size");
  spec.g.in_frames = spec.d.in_frames = get_int("in_frames");
  spec.g.out_frames = spec.d.out_frames = get_int("out_frames");
  spec.g.channels = spec.d.channels = get_int("channels");
  const std::string& up = get("upsample");
  if (up == "bilinear")
    spec.g.upsample_mode = Upsample::kBilinear;
  else if (up == "nearest")
    spec.g.upsample_mode = Upsample::kNearest;
  else
    throw ConfigError("bad upsample mode: " + up);
  for (int k = 1; k <= spec.scales.n_scales; ++k) {
    const std::string gp = "g" + std::to_string(k);
    GeneratorScale gs;
    gs.maps = split_ints(get(gp + ".maps"), gp + ".maps");
    gs.kernels = split_ints(get(gp + ".kernels"), gp + ".kernels");
    spec.g.scales.push_back(std::move(gs));
    const std::string dp = "d" + std::to_string(k);
    DiscriminatorScale ds;
    ds.maps = split_ints(get(dp + ".maps"), dp + ".maps");
    ds.kernels = split_ints(get(dp + ".kernels"), dp + ".kernels");
    ds.pool = get_int(dp + ".pool") != 0;
    ds.fc = split_ints(get(dp + ".fc"), dp + ".fc");
    spec.d.scales.push_back(std::move(ds));
  }
  spec.validate();
  return spec;
}

template <typename T>
Pyramid<T> build_pyramid(const Tensor<T>& x, const Tensor<T>& y,
                         const ScaleConfig& scales) {
  scales.validate();
  if (x.rank() != 4)
    throw ShapeError("build_pyramid: input must be 4D, got " +
                     shape_str(x.shape()));
  const int div = scales.divisor();
  if (x.dim(2) % div != 0 || x.dim(3) % div != 0)
    throw ShapeError("build_pyramid: spatial size " +
                     shape_str({x.dim(2), x.dim(3)}) +
                     " not divisible by 2^(n_scales-1) = " + std::to_string(div));
  Pyramid<T> pyr;
  pyr.x.resize(static_cast<size_t>(scales.n_scales));
  pyr.x.back() = x;
  for (int i = scales.n_scales - 2; i >= 0; --i)
    pyr.x[static_cast<size_t>(i)] =
        downsample_avg2x_value(pyr.x[static_cast<size_t>(i + 1)]);
  if (y.defined()) {
    if (y.rank() != 4 || y.dim(0) != x.dim(0) || y.dim(2) != x.dim(2) ||
        y.dim(3) != x.dim(3))
      throw ShapeError("build_pyramid: target shape " + shape_str(y.shape()) +
                       " does not match input " + shape_str(x.shape()));
    pyr.y.resize(static_cast<size_t>(scales.n_scales));
    pyr.y.back() = y;
    for (int i = scales.n_scales - 2; i >= 0; --i)
      pyr.y[static_cast<size_t>(i)] =
          downsample_avg2x_value(pyr.y[static_cast<size_t>(i + 1)]);
  }
  return pyr;
}

namespace {

template <typename T>
std::vector<int> generator_layer_widths(const GeneratorSpec& spec,
                                        const GeneratorScale& gs, int k) {
  std::vector<int> widths;
  widths.push_back(spec.in_channels(k));
  for (int m : gs.maps) widths.push_back(m);
  widths.push_back(spec.out_channels());
  return widths;
}

template <typename T>
void check_generator_params(const GeneratorSpec& spec,
                            const ParamStore<T>& store) {
  size_t expected = 0;
  for (int k = 1; k <= static_cast<int>(spec.scales.size()); ++k) {
    const GeneratorScale& gs = spec.scales[static_cast<size_t>(k - 1)];
    const auto widths = generator_layer_widths<T>(spec, gs, k);
    for (size_t layer = 0; layer + 1 < widths.size(); ++layer) {
      const int kernel = gs.kernels[layer];
      check_param(store, gname_w(k, layer),
                  {widths[layer + 1], widths[layer], kernel, kernel});
      check_param(store, gname_b(k, layer), {widths[layer + 1]});
      expected += 2;
    }
  }
  if (store.size() != expected)
    throw Error("generator parameter store has " + std::to_string(store.size()) +
                " entries, spec wants " + std::to_string(expected));
}

template <typename T>
void check_discriminator_params(const DiscriminatorSpec& spec,
                                const ScaleConfig& sc,
                                const ParamStore<T>& store) {
  size_t expected = 0;
  for (int k = 1; k <= sc.n_scales; ++k) {
    const DiscriminatorScale& ds = spec.scales[static_cast<size_t>(k - 1)];
    int in_ch = spec.in_channels();
    for (size_t layer = 0; layer < ds.maps.size(); ++layer) {
      const int kernel = ds.kernels[layer];
      check_param(store, gname_w(k, layer),
                  {ds.maps[layer], in_ch, kernel, kernel});
      check_param(store, gname_b(k, layer), {ds.maps[layer]});
      in_ch = ds.maps[layer];
      expected += 2;
    }
    const int spatial = spec.conv_out_size(k, sc);
    int in_f = in_ch * spatial * spatial;
    std::vector<int> fcs = ds.fc;
    fcs.push_back(1);
    for (size_t layer = 0; layer < fcs.size(); ++layer) {
      check_param(store, dname_fc_w(k, layer), {fcs[layer], in_f});
      check_param(store, dname_fc_b(k, layer), {fcs[layer]});
      in_f = fcs[layer];
      expected += 2;
    }
  }
  if (store.size() != expected)
    throw Error("discriminator parameter store has " +
                std::to_string(store.size()) + " entries, spec wants " +
                std::to_string(expected));
}

}  // namespace

template <typename T>
ParamStore<T> init_generator_params(const GeneratorSpec& spec, uint64_t seed) {
  ParamStore<T> store;
  Rng rng = Rng::stream(seed, 11);
  for (int k = 1; k <= static_cast<int>(spec.scales.size()); ++k) {
    const GeneratorScale& gs = spec.scales[static_cast<size_t>(k - 1)];
    const auto widths = generator_layer_widths<T>(spec, gs, k);
    for (size_t layer = 0; layer + 1 < widths.size(); ++layer) {
      const int kernel = gs.kernels[layer];
      const int in_ch = widths[layer];
      const int out_ch = widths[layer + 1];
      const double bound = 1.0 / std::sqrt(double(in_ch) * kernel * kernel);
      store.add(gname_w(k, layer),
                uniform_tensor<T>({out_ch, in_ch, kernel, kernel}, bound, rng));
      store.add(gname_b(k, layer), Tensor<T>({out_ch}));
    }
  }
  return store;
}

template <typename T>
ParamStore<T> init_discriminator_params(const DiscriminatorSpec& spec,
                                        const ScaleConfig& sc, uint64_t seed) {
  spec.validate(sc);
  ParamStore<T> store;
  Rng rng = Rng::stream(seed, 12);
  for (int k = 1; k <= sc.n_scales; ++k) {
    const DiscriminatorScale& ds = spec.scales[static_cast<size_t>(k - 1)];
    int in_ch = spec.in_channels();
    for (size_t layer = 0; layer < ds.maps.size(); ++layer) {
      const int kernel = ds.kernels[layer];
      const int out_ch = ds.maps[layer];
      const double bound = 1.0 / std::sqrt(double(in_ch) * kernel * kernel);
      store.add(gname_w(k, layer),
                uniform_tensor<T>({out_ch, in_ch, kernel, kernel}, bound, rng));
      store.add(gname_b(k, layer), Tensor<T>({out_ch}));
      in_ch = out_ch;
    }
    const int spatial = spec.conv_out_size(k, sc);
    int in_f = in_ch * spatial * spatial;
    std::vector<int> fcs = ds.fc;
    fcs.push_back(1);
    for (size_t layer = 0; layer < fcs.size(); ++layer) {
      const double bound = 1.0 / std::sqrt(double(in_f));
      store.add(dname_fc_w(k, layer),
                uniform_tensor<T>({fcs[layer], in_f}, bound, rng));
      store.add(dname_fc_b(k, layer), Tensor<T>({fcs[layer]}));
      in_f = fcs[layer];
    }
  }
  return store;
}

template <typename T>
std::vector<Var<T>> generator_forward(Graph<T>& g, const GeneratorSpec& spec,
                                      ParamStore<T>& params,
                                      const Pyramid<T>& pyramid,
                                      bool trainable) {
  check_generator_params(spec, params);
  const int n_scales = static_cast<int>(spec.scales.size());
  if (static_cast<int>(pyramid.x.size()) != n_scales)
    throw ShapeError("generator_forward: pyramid has " +
                     std::to_string(pyramid.x.size()) + " scales, spec wants " +
                     std::to_string(n_scales));
  std::vector<Var<T>> outputs;
  Var<T> prev;  // prediction at the previous (coarser) scale
  for (int k = 1; k <= n_scales; ++k) {
    const GeneratorScale& gs = spec.scales[static_cast<size_t>(k - 1)];
    const Tensor<T>& xk = pyramid.x[static_cast<size_t>(k - 1)];
    if (xk.dim(1) != spec.in_frames * spec.channels)
      throw ShapeError("generator_forward: scale " + std::to_string(k) +
                       " input has " + std::to_string(xk.dim(1)) +
                       " channels, spec wants " +
                       std::to_string(spec.in_frames * spec.channels));
    Var<T> input = g.constant(xk);
    Var<T> upsampled;
    if (k > 1) {
      upsampled = g.upsample(prev, xk.dim(2), xk.dim(3), spec.upsample_mode);
      input = g.concat_channels(input, upsampled);
    }
    // conv stack: in -> maps... -> out, ReLU between, Tanh last
    const auto widths = generator_layer_widths<T>(spec, gs, k);
    Var<T> h = input;
    for (size_t layer = 0; layer + 1 < widths.size(); ++layer) {
      const int kernel = gs.kernels[layer];
      Var<T> w = g.param(params, gname_w(k, layer), trainable);
      Var<T> b = g.param(params, gname_b(k, layer), trainable);
      h = g.conv2d(h, w, b, (kernel - 1) / 2);
      h = (layer + 2 == widths.size()) ? g.tanh_act(h) : g.relu(h);
    }
    Var<T> yk = (k == 1) ? h : g.add(upsampled, h);
    yk = g.clamp_unit(yk);
    outputs.push_back(yk);
    prev = yk;
  }
  return outputs;
}

template <typename T>
Var<T> discriminator_forward(Graph<T>& g, const DiscriminatorSpec& spec,
                             const ScaleConfig& sc, ParamStore<T>& params,
                             Var<T> x_k, Var<T> candidate_k, int k,
                             bool trainable) {
  if (k < 1 || k > static_cast<int>(spec.scales.size()))
    throw ShapeError("discriminator_forward: no scale " + std::to_string(k));
  check_discriminator_params(spec, sc, params);
  const DiscriminatorScale& ds = spec.scales[static_cast<size_t>(k - 1)];
  const Tensor<T>& xv = g.value(x_k);
  const Tensor<T>& cv = g.value(candidate_k);
  const int s = sc.size_at(k);
  if (xv.dim(2) != s || xv.dim(3) != s || cv.dim(2) != s || cv.dim(3) != s)
    throw ShapeError("discriminator scale " + std::to_string(k) + " expects " +
                     std::to_string(s) + "x" + std::to_string(s) +
                     " inputs, got " + shape_str(xv.shape()) + " and " +
                     shape_str(cv.shape()));
  Var<T> h = g.concat_channels(x_k, candidate_k);
  int width = spec.in_channels();
  if (g.value(h).dim(1) != width)
    throw ShapeError("discriminator scale " + std::to_string(k) + " expects " +
                     std::to_string(width) + " input channels, got " +
                     std::to_string(g.value(h).dim(1)));
  for (size_t layer = 0; layer < ds.maps.size(); ++layer) {
    Var<T> w = g.param(params, gname_w(k, layer), trainable);
    Var<T> b = g.param(params, gname_b(k, layer), trainable);
    h = g.conv2d(h, w, b, 0);
    h = g.relu(h);
    width = ds.maps[layer];
  }
  if (ds.pool) h = g.maxpool2x2(h);
  h = g.flatten(h);
  for (size_t layer = 0; layer <= ds.fc.size(); ++layer) {
    Var<T> w = g.param(params, dname_fc_w(k, layer), trainable);
    Var<T> b = g.param(params, dname_fc_b(k, layer), trainable);
    h = g.linear(h, w, b);
    if (layer < ds.fc.size()) h = g.relu(h);
  }
  return g.sigmoid(h);
}

template <typename T>
std::vector<Tensor<T>> recursive_predict(const GeneratorSpec& spec,
                                         const ScaleConfig& sc,
                                         ParamStore<T>& params,
                                         const Tensor<T>& seed_frames,
                                         int steps) {
  if (steps < 1) throw Error("recursive_predict: steps must be >= 1");
  if (seed_frames.rank() != 4)
    throw ShapeError("recursive_predict: seed must be 4D, got " +
                     shape_str(seed_frames.shape()));
  const int window = spec.in_frames * spec.channels;
  if (seed_frames.dim(1) != window)
    throw ShapeError("recursive_predict: seed has " +
                     std::to_string(seed_frames.dim(1)) +
                     " channels, model wants " + std::to_string(window));
  std::vector<Tensor<T>> predictions;
  Tensor<T> current = seed_frames;
  for (int step = 0; step < steps; ++step) {
    Graph<T> graph;
    Pyramid<T> pyr = build_pyramid(current, Tensor<T>{}, sc);
    std::vector<Var<T>> outs =
        generator_forward(graph, spec, params, pyr, /*trainable=*/false);
    Tensor<T> pred = graph.value(outs.back());
    predictions.push_back(pred);
    Tensor<T> combined = concat_channels_value(current, pred);
    current = slice_channels_value(combined, combined.dim(1) - window,
                                   combined.dim(1));
  }
  return predictions;
}

template struct Pyramid<float>;
template struct Pyramid<double>;
template ParamStore<float> init_generator_params(const GeneratorSpec&, uint64_t);
template ParamStore<double> init_generator_params(const GeneratorSpec&, uint64_t);
template ParamStore<float> init_discriminator_params(const DiscriminatorSpec&,
                                                     const ScaleConfig&, uint64_t);
template ParamStore<double> init_discriminator_params(const DiscriminatorSpec&,
                                                      const ScaleConfig&,
                                                      uint64_t);
template Pyramid<float> build_pyramid(const Tensor<float>&, const Tensor<float>&,
                                      const ScaleConfig&);
template Pyramid<double> build_pyramid(const Tensor<double>&,
                                       const Tensor<double>&,
                                       const ScaleConfig&);
template std::vector<Var<float>> generator_forward(Graph<float>&,
                                                   const GeneratorSpec&,
                                                   ParamStore<float>&,
                                                   const Pyramid<float>&, bool);
template std::vector<Var<double>> generator_forward(Graph<double>&,
                                                    const GeneratorSpec&,
                                                    ParamStore<double>&,
                                                    const Pyramid<double>&, bool);
template Var<float> discriminator_forward(Graph<float>&, const DiscriminatorSpec&,
                                          const ScaleConfig&, ParamStore<float>&,
                                          Var<float>, Var<float>, int, bool);
template Var<double> discriminator_forward(Graph<double>&,
                                           const DiscriminatorSpec&,
                                           const ScaleConfig&,
                                           ParamStore<double>&, Var<double>,
                                           Var<double>, int, bool);
template std::vector<Tensor<float>> recursive_predict(const GeneratorSpec&,
                                                      const ScaleConfig&,
                                                      ParamStore<float>&,
                                                      const Tensor<float>&, int);
template std::vector<Tensor<double>> recursive_predict(const GeneratorSpec&,
                                                       const ScaleConfig&,
                                                       ParamStore<double>&,
                                                       const Tensor<double>&,
                                                       int);

}  // namespace framepred
