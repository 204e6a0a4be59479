#pragma once

#include <functional>
#include <string>
#include <vector>

#include "framepred/tensor.hpp"

namespace framepred {

enum class Upsample { kBilinear, kNearest };

/// Handle to a node of a Graph. Only meaningful together with the graph that
/// created it.
template <typename T>
struct Var {
  int id = -1;
};

/// Append-only reverse-mode differentiation tape. Every op records the
/// closure that scatters its output gradient back to its inputs; backward()
/// walks the tape once in reverse creation order. Nodes whose ancestors are
/// all constants skip gradient bookkeeping entirely, so forward-only
/// evaluation carries no autodiff cost.
///
/// Gradient buffers live on the tensors themselves; a leaf created from a
/// ParamStore shares both value and gradient storage with the store, so
/// backward() accumulates straight into the store's gradients.
template <typename T>
class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var<T> leaf(Tensor<T> value, bool needs_grad);
  Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }
  Var<T> param(ParamStore<T>& store, const std::string& name,
               bool trainable = true);

  const Tensor<T>& value(Var<T> v) const { return node(v).value; }
  bool needs_grad(Var<T> v) const { return node(v).needs_grad; }
  /// Gradient of a node after backward(); throws if the node has none.
  const std::vector<T>& grad(Var<T> v) const { return node(v).value.grad_vec(); }
  size_t size() const { return nodes_.size(); }

  /// Reverse pass from a scalar node. May be called once per graph.
  void backward(Var<T> loss);

  // -- primitives ---------------------------------------------------------

  /// 2D convolution, NCHW input, (out_ch, in_ch, kh, kw) weight, zero padding.
  Var<T> conv2d(Var<T> input, Var<T> weight, Var<T> bias, int padding);
  Var<T> relu(Var<T> x);
  Var<T> tanh_act(Var<T> x);
  Var<T> sigmoid(Var<T> x);
  /// Affine map on (batch, features) input with (out, in) weight.
  Var<T> linear(Var<T> input, Var<T> weight, Var<T> bias);
  /// Non-overlapping 2x2 max; ties route the gradient to the first element
  /// in row-major order.
  Var<T> maxpool2x2(Var<T> x);
  Var<T> upsample(Var<T> x, int target_h, int target_w, Upsample mode);
  /// Non-overlapping 2x2 mean.
  Var<T> downsample_avg2x(Var<T> x);
  Var<T> concat_channels(Var<T> a, Var<T> b);
  Var<T> slice_channels(Var<T> x, int c0, int c1);
  Var<T> add(Var<T> a, Var<T> b);
  Var<T> scale(Var<T> x, T factor);
  /// Clamp to [-1, 1]; gradient passes through inside the range (inclusive)
  /// and is zero outside.
  Var<T> clamp_unit(Var<T> x);
  /// (N,C,H,W) -> (N, C*H*W).
  Var<T> flatten(Var<T> x);

  // -- extension point for ops built outside this class (losses) ----------

  bool any_needs_grad(const std::vector<Var<T>>& parents) const;
  /// Append a node. If `back` is non-null the node participates in the
  /// reverse pass; its output gradient buffer must already be allocated.
  Var<T> make_node(Tensor<T> value, bool needs_grad, std::function<void()> back);

 private:
  struct Node {
    Tensor<T> value;
    bool needs_grad = false;
    std::function<void()> back;
  };

  Node& node(Var<T> v) {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
      throw Error("invalid graph variable");
    return nodes_[static_cast<size_t>(v.id)];
  }
  const Node& node(Var<T> v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
      throw Error("invalid graph variable");
    return nodes_[static_cast<size_t>(v.id)];
  }

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Forward-only kernels shared with non-graph callers.
template <typename T>
Tensor<T> downsample_avg2x_value(const Tensor<T>& x);
template <typename T>
Tensor<T> concat_channels_value(const Tensor<T>& a, const Tensor<T>& b);
template <typename T>
Tensor<T> slice_channels_value(const Tensor<T>& x, int c0, int c1);

extern template class Graph<float>;
extern template class Graph<double>;
extern template Tensor<float> downsample_avg2x_value(const Tensor<float>&);
extern template Tensor<double> downsample_avg2x_value(const Tensor<double>&);
extern template Tensor<float> concat_channels_value(const Tensor<float>&,
                                                    const Tensor<float>&);
extern template Tensor<double> concat_channels_value(const Tensor<double>&,
                                                     const Tensor<double>&);
extern template Tensor<float> slice_channels_value(const Tensor<float>&, int, int);
extern template Tensor<double> slice_channels_value(const Tensor<double>&, int, int);

}  // namespace framepred
