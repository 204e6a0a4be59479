#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "framepred/errors.hpp"

namespace framepred {

using Shape = std::vector<int>;

int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);
bool shape_eq(const Shape& a, const Shape& b);

/// Dense row-major array of scalars with an optional gradient buffer of the
/// same shape. Copies are shallow (buffers are shared); every op allocates a
/// fresh output, so a tensor's contents never change after the op that wrote
/// them. Image data uses NCHW order (batch, channels, height, width).
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(Shape shape)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<T>>(
            static_cast<size_t>(shape_numel(shape_)), T(0))) {}

  Tensor(Shape shape, std::vector<T> values)
      : shape_(std::move(shape)),
        data_(std::make_shared<std::vector<T>>(std::move(values))) {
    if (static_cast<int64_t>(data_->size()) != shape_numel(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_->size()) +
                       " does not match shape " + shape_str(shape_));
    }
  }

  static Tensor full(const Shape& s, T v) {
    Tensor t{Shape(s)};
    std::fill(t.data_->begin(), t.data_->end(), v);
    return t;
  }

  bool defined() const { return data_ != nullptr; }
  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_.at(static_cast<size_t>(i)); }
  int64_t numel() const {
    return data_ ? static_cast<int64_t>(data_->size()) : 0;
  }

  T* data() { return data_->data(); }
  const T* data() const { return data_->data(); }
  std::vector<T>& vec() { return *data_; }
  const std::vector<T>& vec() const { return *data_; }

  bool has_grad() const { return grad_ != nullptr; }

  /// Allocate a zero gradient buffer if absent. Keeps existing contents.
  void ensure_grad() {
    if (!grad_) grad_ = std::make_shared<std::vector<T>>(data_->size(), T(0));
  }
  void zero_grad() {
    if (grad_) std::fill(grad_->begin(), grad_->end(), T(0));
  }
  T* grad() { return require_grad_buffer().data(); }
  const T* grad() const { return require_grad_buffer().data(); }
  std::vector<T>& grad_vec() { return require_grad_buffer(); }
  const std::vector<T>& grad_vec() const { return require_grad_buffer(); }

  /// Deep copy of the data; the copy carries no gradient buffer.
  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.data_ = std::make_shared<std::vector<T>>(*data_);
    return t;
  }

  /// 4D accessors (NCHW). Bounds are the caller's responsibility.
  T& at4(int n, int c, int h, int w) { return (*data_)[offset4(n, c, h, w)]; }
  T at4(int n, int c, int h, int w) const {
    return (*data_)[offset4(n, c, h, w)];
  }
  size_t offset4(int n, int c, int h, int w) const {
    return ((static_cast<size_t>(n) * shape_[1] + c) * shape_[2] + h) *
               shape_[3] +
           w;
  }

  bool all_finite() const {
    for (const T v : *data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

 private:
  std::vector<T>& require_grad_buffer() const {
    if (!grad_) throw Error("tensor has no gradient buffer");
    return *grad_;
  }

  Shape shape_;
  std::shared_ptr<std::vector<T>> data_;
  mutable std::shared_ptr<std::vector<T>> grad_;
};

/// Named parameter tensors with gradients. Names are unique; iteration order
/// is insertion order, which keeps serialization and SGD deterministic.
template <typename T>
class ParamStore {
 public:
  Tensor<T>& add(const std::string& name, Tensor<T> value) {
    if (map_.count(name)) throw Error("duplicate parameter name: " + name);
    value.ensure_grad();
    order_.push_back(name);
    return map_.emplace(name, std::move(value)).first->second;
  }

  bool has(const std::string& name) const { return map_.count(name) != 0; }

  Tensor<T>& get(const std::string& name) {
    auto it = map_.find(name);
    if (it == map_.end()) throw Error("unknown parameter: " + name);
    return it->second;
  }
  const Tensor<T>& get(const std::string& name) const {
    auto it = map_.find(name);
    if (it == map_.end()) throw Error("unknown parameter: " + name);
    return it->second;
  }

  const std::vector<std::string>& names() const { return order_; }
  size_t size() const { return order_.size(); }

  int64_t scalar_count() const {
    int64_t n = 0;
    for (const auto& name : order_) n += map_.at(name).numel();
    return n;
  }

  void zero_grads() {
    for (const auto& name : order_) map_.at(name).zero_grad();
  }

  int64_t updates() const { return updates_; }
  void count_update() { ++updates_; }

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor<T>> map_;
  int64_t updates_ = 0;
};

/// One SGD update: p -= lr * grad for every parameter, then gradients are
/// zeroed and the store's update counter advances.
template <typename T>
void sgd_step(ParamStore<T>& params, T lr);

/// FNV-1a over the raw parameter bytes, in insertion order. Used by the
/// determinism tests and the training log.
uint64_t param_hash(const ParamStore<float>& params);
uint64_t param_hash(const ParamStore<double>& params);

extern template class Tensor<float>;
extern template class Tensor<double>;
extern template class ParamStore<float>;
extern template class ParamStore<double>;
extern template void sgd_step<float>(ParamStore<float>&, float);
extern template void sgd_step<double>(ParamStore<double>&, double);

}  // namespace framepred
