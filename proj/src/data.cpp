#include "framepred/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace framepred {

namespace fs = std::filesystem;

namespace {

// Reads the next header token, skipping whitespace and '#' comments.
std::string pnm_token(std::istream& is, const std::string& path) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  if (tok.empty()) throw DataError("truncated PNM header in " + path);
  return tok;
}

int pnm_int(std::istream& is, const std::string& path) {
  const std::string tok = pnm_token(is, path);
  try {
    size_t pos = 0;
    const int v = std::stoi(tok, &pos);
    if (pos != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw DataError("bad PNM header value '" + tok + "' in " + path);
  }
}

}  // namespace

Tensor<float> read_pnm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open " + path);
  const std::string magic = pnm_token(is, path);
  int channels = 0;
  if (magic == "P5")
    channels = 1;
  else if (magic == "P6")
    channels = 3;
  else
    throw DataError("unsupported PNM magic '" + magic + "' in " + path +
                    " (binary P5/P6 only)");
  const int w = pnm_int(is, path);
  const int h = pnm_int(is, path);
  const int maxval = pnm_int(is, path);
  if (maxval > 255 || maxval < 1)
    throw DataError("unsupported bit depth (maxval " + std::to_string(maxval) +
                    ") in " + path);
  // header ends with exactly one whitespace character (already consumed by
  // the tokenizer)
  std::vector<unsigned char> raw(static_cast<size_t>(w) * h * channels);
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (is.gcount() != static_cast<std::streamsize>(raw.size()))
    throw DataError("truncated pixel data in " + path);
  Tensor<float> frame({channels, h, w});
  float* out = frame.data();
  const size_t plane = static_cast<size_t>(h) * w;
  for (size_t i = 0; i < plane; ++i)
    for (int c = 0; c < channels; ++c)
      out[static_cast<size_t>(c) * plane + i] =
          static_cast<float>(raw[i * channels + c]);
  return frame;
}

void write_pnm(const std::string& path, const Tensor<float>& frame) {
  if (frame.rank() != 3)
    throw ShapeError("write_pnm: frame must be (channels, h, w), got " +
                     shape_str(frame.shape()));
  const int channels = frame.dim(0), h = frame.dim(1), w = frame.dim(2);
  if (channels != 1 && channels != 3)
    throw DataError("write_pnm: only 1 or 3 channels supported, got " +
                    std::to_string(channels));
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("cannot write " + path);
  os << (channels == 1 ? "P5" : "P6") << "\n" << w << " " << h << "\n255\n";
  const size_t plane = static_cast<size_t>(h) * w;
  std::vector<unsigned char> raw(plane * channels);
  const float* in = frame.data();
  for (size_t i = 0; i < plane; ++i)
    for (int c = 0; c < channels; ++c) {
      const float v = in[static_cast<size_t>(c) * plane + i];
      const float r = std::floor(std::clamp(v, 0.0f, 255.0f) + 0.5f);
      raw[i * channels + c] = static_cast<unsigned char>(std::min(r, 255.0f));
    }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw DataError("failed writing " + path);
}

std::vector<Tensor<float>> load_frame_sequence(const std::string& directory) {
  if (!fs::is_directory(directory))
    throw DataError("not a directory: " + directory);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm") names.push_back(entry.path().string());
  }
  if (names.empty())
    throw DataError("no .pgm/.ppm frames in " + directory);
  std::sort(names.begin(), names.end());
  std::vector<Tensor<float>> frames;
  frames.reserve(names.size());
  for (const auto& name : names) {
    Tensor<float> f = read_pnm(name);
    if (!frames.empty() && !shape_eq(f.shape(), frames.front().shape()))
      throw DataError("mixed frame dimensions in " + directory + ": " +
                      shape_str(frames.front().shape()) + " vs " +
                      shape_str(f.shape()) + " (" + name + ")");
    frames.push_back(std::move(f));
  }
  return frames;
}

template <typename T>
Tensor<T> normalize_frames(const Tensor<T>& frames) {
  Tensor<T> out{frames.shape()};
  const T* in = frames.data();
  T* o = out.data();
  const int64_t n = frames.numel();
  for (int64_t i = 0; i < n; ++i) o[i] = in[i] / T(127.5) - T(1);
  return out;
}

template <typename T>
Tensor<T> denormalize_frames(const Tensor<T>& frames) {
  Tensor<T> out{frames.shape()};
  const T* in = frames.data();
  T* o = out.data();
  const int64_t n = frames.numel();
  for (int64_t i = 0; i < n; ++i)
    o[i] = std::clamp((in[i] + T(1)) * T(127.5), T(0), T(255));
  return out;
}

void DatasetSpec::validate() const {
  if (patch_size < 1) throw ConfigError("patch_size must be >= 1");
  if (motion_threshold < 0) throw ConfigError("motion_threshold must be >= 0");
  if (channels != 1 && channels != 3)
    throw ConfigError("channels must be 1 or 3");
}

namespace {

Tensor<float> slice3(const Tensor<float>& t, int c0, int c1) {
  const int h = t.dim(1), w = t.dim(2);
  Tensor<float> out({c1 - c0, h, w});
  const size_t plane = static_cast<size_t>(h) * w;
  std::copy(t.data() + static_cast<size_t>(c0) * plane,
            t.data() + static_cast<size_t>(c1) * plane, out.data());
  return out;
}

}  // namespace

std::vector<ClipSample> sample_patches(const std::vector<Tensor<float>>& frames,
                                       int patch_size, double motion_threshold,
                                       int m, int n, int count, Rng& rng,
                                       const std::string& source_id,
                                       int max_retries_per_sample) {
  if (frames.empty()) throw DataError("sample_patches: empty frame sequence");
  const int window = m + n;
  const int f = static_cast<int>(frames.size());
  if (f < window)
    throw DataError("sample_patches: sequence has " + std::to_string(f) +
                    " frames, window needs " + std::to_string(window));
  const int c = frames[0].dim(0);
  const int h = frames[0].dim(1);
  const int w = frames[0].dim(2);
  if (patch_size > h || patch_size > w)
    throw DataError("sample_patches: patch " + std::to_string(patch_size) +
                    " larger than frames " + shape_str({h, w}));
  const int ps = patch_size;
  std::vector<ClipSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int s = 0; s < count; ++s) {
    bool accepted = false;
    for (int attempt = 0; attempt < max_retries_per_sample; ++attempt) {
      const int t0 = static_cast<int>(rng.uniform_int(f - window + 1));
      const int r0 = static_cast<int>(rng.uniform_int(h - ps + 1));
      const int c0 = static_cast<int>(rng.uniform_int(w - ps + 1));
      // normalized patch window, frames stacked along channels
      Tensor<float> win({window * c, ps, ps});
      for (int t = 0; t < window; ++t) {
        const Tensor<float>& frame = frames[static_cast<size_t>(t0 + t)];
        for (int ch = 0; ch < c; ++ch)
          for (int r = 0; r < ps; ++r)
            for (int col = 0; col < ps; ++col)
              win.data()[((static_cast<size_t>(t) * c + ch) * ps + r) * ps + col] =
                  frame.data()[(static_cast<size_t>(ch) * h + (r0 + r)) * w +
                               (c0 + col)] /
                      127.5f -
                  1.0f;
      }
      double score = 0;
      const size_t plane = static_cast<size_t>(c) * ps * ps;
      for (int t = 0; t + 1 < window; ++t) {
        const float* a = win.data() + static_cast<size_t>(t) * plane;
        const float* b = win.data() + static_cast<size_t>(t + 1) * plane;
        for (size_t i = 0; i < plane; ++i) {
          const double d = static_cast<double>(b[i]) - a[i];
          score += d * d;
        }
      }
      score /= static_cast<double>(window - 1) * static_cast<double>(plane);
      if (score >= motion_threshold) {
        ClipSample sample;
        sample.x = slice3(win, 0, m * c);
        sample.y = slice3(win, m * c, window * c);
        sample.source_id = source_id;
        sample.origin_t = t0;
        sample.origin_r = r0;
        sample.origin_c = c0;
        out.push_back(std::move(sample));
        accepted = true;
        break;
      }
    }
    if (!accepted)
      throw DataError(
          "sample_patches: retry budget exhausted; the source is too static "
          "for motion threshold " + std::to_string(motion_threshold));
  }
  return out;
}

void BouncingParams::validate() const {
  if (canvas < 1) throw ConfigError("bouncing: canvas must be >= 1");
  if (frames < 1) throw ConfigError("bouncing: frames must be >= 1");
  if (shapes < 1) throw ConfigError("bouncing: shapes must be >= 1");
  if (min_size < 1 || max_size < min_size)
    throw ConfigError("bouncing: need 1 <= min_size <= max_size");
  if (max_size > canvas)
    throw DataError("bouncing: shape larger than canvas (" +
                    std::to_string(max_size) + " > " + std::to_string(canvas) +
                    ")");
  if (min_speed < 0 || max_speed < min_speed)
    throw ConfigError("bouncing: need 0 <= min_speed <= max_speed");
  if (channels != 1 && channels != 3)
    throw ConfigError("bouncing: channels must be 1 or 3");
}

namespace {

struct Shape2D {
  bool disc = false;
  int size = 1;
  int row = 0, col = 0;
  int vr = 0, vc = 0;
  float color[3] = {255.0f, 255.0f, 255.0f};
};

void draw_shape(Tensor<float>& frame, const Shape2D& s) {
  const int c = frame.dim(0), h = frame.dim(1), w = frame.dim(2);
  const double cy = s.row + (s.size - 1) / 2.0;
  const double cx = s.col + (s.size - 1) / 2.0;
  const double r2 = (s.size / 2.0) * (s.size / 2.0);
  for (int i = s.row; i < s.row + s.size; ++i)
    for (int j = s.col; j < s.col + s.size; ++j) {
      if (s.disc) {
        const double dy = i - cy, dx = j - cx;
        if (dy * dy + dx * dx > r2) continue;
      }
      for (int ch = 0; ch < c; ++ch)
        frame.data()[(static_cast<size_t>(ch) * h + i) * w + j] = s.color[ch];
    }
}

int reflect(int pos, int lim, int& vel) {
  while (pos < 0 || pos > lim) {
    if (pos < 0) {
      pos = -pos;
      vel = -vel;
    } else {
      pos = 2 * lim - pos;
      vel = -vel;
    }
  }
  return pos;
}

}  // namespace

std::vector<Tensor<float>> synth_bouncing_shapes(const BouncingParams& params,
                                                 uint64_t seed) {
  params.validate();
  Rng rng = Rng::stream(seed, 21);
  std::vector<Shape2D> shapes(static_cast<size_t>(params.shapes));
  for (Shape2D& s : shapes) {
    s.size = params.min_size +
             static_cast<int>(rng.uniform_int(params.max_size - params.min_size + 1));
    s.disc = rng.coin();
    const int lim = params.canvas - s.size;
    s.row = static_cast<int>(rng.uniform_int(lim + 1));
    s.col = static_cast<int>(rng.uniform_int(lim + 1));
    for (int* v : {&s.vr, &s.vc}) {
      const int mag =
          params.min_speed +
          static_cast<int>(rng.uniform_int(params.max_speed - params.min_speed + 1));
      *v = rng.coin() ? mag : -mag;
      if (lim == 0) *v = 0;  // shape fills the canvas; nowhere to go
    }
    if (params.channels == 1) {
      s.color[0] = static_cast<float>(128 + rng.uniform_int(128));
    } else {
      for (int ch = 0; ch < 3; ++ch)
        s.color[ch] = static_cast<float>(64 + rng.uniform_int(192));
    }
  }
  std::vector<Tensor<float>> frames;
  frames.reserve(static_cast<size_t>(params.frames));
  for (int t = 0; t < params.frames; ++t) {
    Tensor<float> frame({params.channels, params.canvas, params.canvas});
    for (const Shape2D& s : shapes) draw_shape(frame, s);
    frames.push_back(std::move(frame));
    for (Shape2D& s : shapes) {
      const int lim = params.canvas - s.size;
      s.row = reflect(s.row + s.vr, lim, s.vr);
      s.col = reflect(s.col + s.vc, lim, s.vc);
    }
  }
  return frames;
}

void BimodalParams::validate() const {
  if (dot < 1) throw ConfigError("bimodal: dot must be >= 1");
  if (m < 1) throw ConfigError("bimodal: m must be >= 1");
  if (channels != 1 && channels != 3)
    throw ConfigError("bimodal: channels must be 1 or 3");
  if (canvas < dot + 2 || canvas < dot + m + 1)
    throw ConfigError("bimodal: canvas too small for dot size " +
                      std::to_string(dot) + " and m " + std::to_string(m));
}

std::pair<int, int> BimodalParams::row_range() const {
  return {1, canvas - dot - 1};
}
std::pair<int, int> BimodalParams::col_range() const {
  return {0, canvas - dot - m};
}

namespace {

Tensor<float> bimodal_frame(const BimodalParams& p, int row, int col) {
  Tensor<float> f = Tensor<float>::full({p.channels, p.canvas, p.canvas}, -1.0f);
  for (int i = row; i < row + p.dot; ++i)
    for (int j = col; j < col + p.dot; ++j)
      for (int ch = 0; ch < p.channels; ++ch)
        f.data()[(static_cast<size_t>(ch) * p.canvas + i) * p.canvas + j] = 1.0f;
  return f;
}

Tensor<float> stack_frames(const std::vector<Tensor<float>>& frames) {
  const int c = frames[0].dim(0), h = frames[0].dim(1), w = frames[0].dim(2);
  Tensor<float> out({static_cast<int>(frames.size()) * c, h, w});
  const size_t per = static_cast<size_t>(c) * h * w;
  for (size_t t = 0; t < frames.size(); ++t)
    std::copy(frames[t].data(), frames[t].data() + per, out.data() + t * per);
  return out;
}

}  // namespace

ClipSample synth_bimodal_sample(const BimodalParams& params, Rng& rng) {
  params.validate();
  const auto [r_lo, r_hi] = params.row_range();
  const auto [c_lo, c_hi] = params.col_range();
  const int r0 = r_lo + static_cast<int>(rng.uniform_int(r_hi - r_lo + 1));
  const int c0 = c_lo + static_cast<int>(rng.uniform_int(c_hi - c_lo + 1));
  const int mode = rng.coin() ? 1 : 0;
  std::vector<Tensor<float>> xs;
  for (int t = 0; t < params.m; ++t)
    xs.push_back(bimodal_frame(params, r0, c0 + t));
  ClipSample sample;
  sample.x = stack_frames(xs);
  sample.y = bimodal_frame(params, mode == 0 ? r0 - 1 : r0 + 1, c0 + params.m);
  sample.origin_t = 0;
  sample.origin_r = r0;
  sample.origin_c = c0;
  sample.mode_label = mode;
  return sample;
}

std::pair<Tensor<float>, Tensor<float>> bimodal_continuations(
    const BimodalParams& params, const ClipSample& sample) {
  const int r0 = sample.origin_r, c0 = sample.origin_c;
  return {bimodal_frame(params, r0 - 1, c0 + params.m),
          bimodal_frame(params, r0 + 1, c0 + params.m)};
}

std::vector<ClipSample> sample_bouncing_dataset(const BouncingParams& params,
                                                int clips, int patches_per_clip,
                                                int patch_size,
                                                double motion_threshold, int m,
                                                int n, uint64_t seed) {
  std::vector<ClipSample> out;
  for (int i = 0; i < clips; ++i) {
    const std::vector<Tensor<float>> frames =
        synth_bouncing_shapes(params, Rng::stream(seed, 100 + 2 * i).next_u64());
    Rng rng = Rng::stream(seed, 101 + 2 * i);
    auto samples =
        sample_patches(frames, patch_size, motion_threshold, m, n,
                       patches_per_clip, rng, "bouncing_" + std::to_string(i));
    for (auto& s : samples) out.push_back(std::move(s));
  }
  return out;
}

std::vector<ClipSample> sample_bimodal_dataset(const BimodalParams& params,
                                               int count, uint64_t seed) {
  Rng rng = Rng::stream(seed, 77);
  std::vector<ClipSample> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    ClipSample s = synth_bimodal_sample(params, rng);
    s.source_id = "bimodal_" + std::to_string(i);
    out.push_back(std::move(s));
  }
  return out;
}

template Tensor<float> normalize_frames(const Tensor<float>&);
template Tensor<double> normalize_frames(const Tensor<double>&);
template Tensor<float> denormalize_frames(const Tensor<float>&);
template Tensor<double> denormalize_frames(const Tensor<double>&);

}  // namespace framepred
