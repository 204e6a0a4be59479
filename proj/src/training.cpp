#include "framepred/training.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace framepred {

void TrainConfig::validate() const {
  weights.validate();
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (rho_g_initial <= 0 || rho_g_final <= 0 || rho_d <= 0)
    throw ConfigError("learning rates must be > 0");
  if (rho_g_initial < rho_g_final)
    throw ConfigError("rho_g_initial must be >= rho_g_final");
  if (rho_g_interval < 0) throw ConfigError("rho_g_interval must be >= 0");
  if (log_every < 1) throw ConfigError("log_every must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
}

float TrainConfig::rho_g_at(int64_t step) const {
  const int64_t decay_end = (3 * steps) / 4;
  if (step >= decay_end) return rho_g_final;
  const int64_t interval =
      rho_g_interval > 0 ? rho_g_interval : std::max<int64_t>(1, decay_end / 10);
  const int64_t n_stages = (decay_end + interval - 1) / interval;
  const int64_t stage = step / interval;
  const double ratio = double(rho_g_final) / double(rho_g_initial);
  return static_cast<float>(double(rho_g_initial) *
                            std::pow(ratio, double(stage) / double(n_stages)));
}

namespace {

Tensor<float> stack_samples(const Dataset& data, const std::vector<size_t>& idx,
                            bool target) {
  if (idx.empty()) throw DataError("empty batch");
  const Tensor<float>& first = target ? data.at(idx[0]).y : data.at(idx[0]).x;
  const int ch = first.dim(0), h = first.dim(1), w = first.dim(2);
  Tensor<float> out({static_cast<int>(idx.size()), ch, h, w});
  const size_t per = static_cast<size_t>(ch) * h * w;
  for (size_t i = 0; i < idx.size(); ++i) {
    const ClipSample& s = data.at(idx[i]);
    const Tensor<float>& t = target ? s.y : s.x;
    if (!shape_eq(t.shape(), first.shape()))
      throw ShapeError("dataset samples disagree on shape: " +
                       shape_str(first.shape()) + " vs " + shape_str(t.shape()));
    std::copy(t.data(), t.data() + per, out.data() + i * per);
  }
  return out;
}

ParamStore<float> clone_store(const ParamStore<float>& store) {
  ParamStore<float> out;
  for (const auto& name : store.names()) out.add(name, store.get(name).clone());
  return out;
}

std::vector<size_t> draw_batch(Rng& rng, size_t dataset_size, int batch) {
  std::vector<size_t> idx(static_cast<size_t>(batch));
  for (auto& i : idx)
    i = static_cast<size_t>(rng.uniform_int(static_cast<int64_t>(dataset_size)));
  return idx;
}

}  // namespace

Tensor<float> stack_batch_x(const Dataset& data, const std::vector<size_t>& idx) {
  return stack_samples(data, idx, false);
}
Tensor<float> stack_batch_y(const Dataset& data, const std::vector<size_t>& idx) {
  return stack_samples(data, idx, true);
}

double train_step_d(const TrainConfig& config, const ModelSpec& spec,
                    ParamStore<float>& g_params, ParamStore<float>& d_params,
                    const Tensor<float>& batch_x, const Tensor<float>& batch_y,
                    float rho_d) {
  if (!config.adversarial)
    throw ConfigError("train_step_d requires an adversarial config");
  Graph<float> g;
  Pyramid<float> pyr = build_pyramid(batch_x, batch_y, spec.scales);
  const std::vector<Var<float>> gen =
      generator_forward(g, spec.g, g_params, pyr, /*trainable=*/false);
  std::vector<Tensor<float>> detached;
  detached.reserve(gen.size());
  for (Var<float> v : gen) detached.push_back(g.value(v));
  Var<float> loss = adv_d_loss(g, spec.d, spec.scales, d_params, pyr, detached);
  const double value = static_cast<double>(g.value(loss).data()[0]);
  if (!std::isfinite(value))
    throw DivergenceError("discriminator loss is not finite");
  g.backward(loss);
  sgd_step(d_params, rho_d);
  return value;
}

double train_step_g(const TrainConfig& config, const ModelSpec& spec,
                    ParamStore<float>& g_params, ParamStore<float>* d_params,
                    const Tensor<float>& batch_x, const Tensor<float>& batch_y,
                    float rho_g, CombinedTerms* terms) {
  Graph<float> g;
  Pyramid<float> pyr = build_pyramid(batch_x, batch_y, spec.scales);
  const std::vector<Var<float>> gen =
      generator_forward(g, spec.g, g_params, pyr, /*trainable=*/true);
  const DiscriminatorSpec* d_spec =
      config.weights.lambda_adv > 0 ? &spec.d : nullptr;
  Var<float> loss = combined_loss(g, config.weights, d_spec, spec.scales,
                                  d_params, pyr, gen, terms);
  const double value = static_cast<double>(g.value(loss).data()[0]);
  if (!std::isfinite(value))
    throw DivergenceError("generator loss is not finite");
  g.backward(loss);
  sgd_step(g_params, rho_g);
  return value;
}

Checkpoint train_loop(const TrainConfig& config, const ModelSpec& spec,
                      const Dataset& data, const TrainLogFn& log,
                      const CheckpointSink& checkpoint_sink) {
  config.validate();
  spec.validate();
  if (data.size() == 0) throw DataError("train_loop: empty dataset");

  ParamStore<float> g_params = init_generator_params<float>(spec.g, config.seed);
  ParamStore<float> d_params;
  if (config.adversarial)
    d_params =
        init_discriminator_params<float>(spec.d, spec.scales, config.seed);
  // Independent batch streams: the G-batch sequence must not depend on
  // whether the D path runs.
  Rng rng_d = Rng::stream(config.seed, 4);
  Rng rng_g = Rng::stream(config.seed, 3);

  auto snapshot = [&](int64_t step) {
    Checkpoint ckpt;
    ckpt.spec = spec;
    ckpt.adversarial = config.adversarial;
    ckpt.g_params = clone_store(g_params);
    if (config.adversarial) ckpt.d_params = clone_store(d_params);
    ckpt.step = step;
    ckpt.rng_state_g = rng_g.save_state();
    ckpt.rng_state_d = rng_d.save_state();
    return ckpt;
  };

  for (int64_t step = 0; step < config.steps; ++step) {
    TrainLogEntry entry;
    entry.step = step;
    entry.rho_g = config.rho_g_at(step);
    if (config.adversarial) {
      const auto idx = draw_batch(rng_d, data.size(), config.batch);
      entry.loss_d =
          train_step_d(config, spec, g_params, d_params,
                       stack_batch_x(data, idx), stack_batch_y(data, idx),
                       config.rho_d);
    }
    {
      CombinedTerms terms;
      const auto idx = draw_batch(rng_g, data.size(), config.batch);
      entry.loss_g = train_step_g(
          config, spec, g_params, config.adversarial ? &d_params : nullptr,
          stack_batch_x(data, idx), stack_batch_y(data, idx), entry.rho_g,
          &terms);
      entry.term_lp = terms.lp;
      entry.term_gdl = terms.gdl;
      entry.term_adv = terms.adv;
    }
    if (log && (step % config.log_every == 0 || step + 1 == config.steps)) {
      entry.g_hash = param_hash(g_params);
      log(entry);
    }
    if (checkpoint_sink && config.checkpoint_every > 0 &&
        (step + 1) % config.checkpoint_every == 0 && step + 1 != config.steps)
      checkpoint_sink(snapshot(step + 1));
  }
  return snapshot(config.steps);
}

// ---------------------------------------------------------------------------
// Checkpoint serialization
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'F', 'P', 'C', 'K'};

void put_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void put_u16(std::ostream& os, uint16_t v) {
  const unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                              static_cast<unsigned char>(v >> 8)};
  put_bytes(os, b, 2);
}
void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 4);
}
void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  put_bytes(os, b, 8);
}
void put_string(std::ostream& os, const std::string& s) {
  put_u32(os, static_cast<uint32_t>(s.size()));
  put_bytes(os, s.data(), s.size());
}

void get_bytes(std::istream& is, void* p, size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (is.gcount() != static_cast<std::streamsize>(n))
    throw DataError("truncated checkpoint");
}
uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  get_bytes(is, b, 2);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}
uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  get_bytes(is, b, 4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
  return v;
}
uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  get_bytes(is, b, 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}
std::string get_string(std::istream& is) {
  const uint32_t n = get_u32(is);
  std::string s(n, '\0');
  if (n) get_bytes(is, s.data(), n);
  return s;
}

void put_params(std::ostream& os, const ParamStore<float>& store) {
  put_u32(os, static_cast<uint32_t>(store.size()));
  for (const auto& name : store.names()) {
    const Tensor<float>& t = store.get(name);
    put_u16(os, static_cast<uint16_t>(name.size()));
    put_bytes(os, name.data(), name.size());
    const unsigned char rank = static_cast<unsigned char>(t.rank());
    put_bytes(os, &rank, 1);
    for (int d : t.shape()) put_u32(os, static_cast<uint32_t>(d));
    for (int64_t i = 0; i < t.numel(); ++i) {
      uint32_t bits;
      std::memcpy(&bits, &t.data()[i], 4);
      put_u32(os, bits);
    }
  }
}

ParamStore<float> get_params(std::istream& is) {
  ParamStore<float> store;
  const uint32_t count = get_u32(is);
  for (uint32_t p = 0; p < count; ++p) {
    const uint16_t name_len = get_u16(is);
    std::string name(name_len, '\0');
    get_bytes(is, name.data(), name_len);
    unsigned char rank = 0;
    get_bytes(is, &rank, 1);
    Shape shape(rank);
    for (auto& d : shape) {
      const uint32_t v = get_u32(is);
      if (v > (1u << 24)) throw DataError("implausible dimension in checkpoint");
      d = static_cast<int>(v);
    }
    Tensor<float> t{shape};
    for (int64_t i = 0; i < t.numel(); ++i) {
      const uint32_t bits = get_u32(is);
      std::memcpy(&t.data()[i], &bits, 4);
    }
    store.add(name, std::move(t));
  }
  return store;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write checkpoint " + path);
  put_bytes(os, kMagic, 4);
  put_u16(os, ckpt.version);
  put_string(os, model_spec_to_text(ckpt.spec));
  put_params(os, ckpt.g_params);
  put_params(os, ckpt.d_params);
  put_u64(os, static_cast<uint64_t>(ckpt.step));
  put_string(os, ckpt.rng_state_g);
  put_string(os, ckpt.rng_state_d);
  if (!os) throw DataError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path);
  char magic[4];
  get_bytes(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a framepred checkpoint (bad magic): " + path);
  Checkpoint ckpt;
  ckpt.version = get_u16(is);
  if (ckpt.version != 1)
    throw DataError("unsupported checkpoint version " +
                    std::to_string(ckpt.version));
  ckpt.spec = model_spec_from_text(get_string(is));
  ckpt.g_params = get_params(is);
  ckpt.d_params = get_params(is);
  ckpt.adversarial = ckpt.d_params.size() > 0;
  ckpt.step = static_cast<int64_t>(get_u64(is));
  ckpt.rng_state_g = get_string(is);
  ckpt.rng_state_d = get_string(is);
  return ckpt;
}

}  // namespace framepred
