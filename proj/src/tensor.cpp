#include "framepred/tensor.hpp"

#include <sstream>

namespace framepred {

int64_t shape_numel(const Shape& s) {
  int64_t n = 1;
  for (int d : s) {
    if (d < 0) throw ShapeError("negative dimension in shape " + shape_str(s));
    n *= d;
  }
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) os << ",";
    os << s[i];
  }
  os << ")";
  return os.str();
}

bool shape_eq(const Shape& a, const Shape& b) { return a == b; }

template <typename T>
void sgd_step(ParamStore<T>& params, T lr) {
  for (const auto& name : params.names()) {
    Tensor<T>& p = params.get(name);
    if (!p.has_grad()) throw Error("sgd_step: parameter " + name + " has no gradient");
    T* w = p.data();
    const T* g = p.grad();
    const int64_t n = p.numel();
    for (int64_t i = 0; i < n; ++i) w[i] -= lr * g[i];
    p.zero_grad();
  }
  params.count_update();
}

namespace {

template <typename T>
uint64_t fnv1a_params(const ParamStore<T>& params) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](const void* p, size_t n) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& name : params.names()) {
    feed(name.data(), name.size());
    const Tensor<T>& t = params.get(name);
    feed(t.data(), sizeof(T) * static_cast<size_t>(t.numel()));
  }
  return h;
}

}  // namespace

uint64_t param_hash(const ParamStore<float>& params) { return fnv1a_params(params); }
uint64_t param_hash(const ParamStore<double>& params) { return fnv1a_params(params); }

template class Tensor<float>;
template class Tensor<double>;
template class ParamStore<float>;
template class ParamStore<double>;
template void sgd_step<float>(ParamStore<float>&, float);
template void sgd_step<double>(ParamStore<double>&, double);

}  // namespace framepred
