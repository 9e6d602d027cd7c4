#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sapgan/tensor/rng.hpp"

namespace sapgan {

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

namespace detail {

template <class T>
struct Node {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until first touched by backward/zero_grad
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> inputs;
  // Reads this node's grad and accumulates into inputs that require grad.
  std::function<void(Node&)> backward;

  bool is_leaf() const { return inputs.empty(); }
  std::vector<T>& ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), T{0});
    return grad;
  }
};

}  // namespace detail

/// N-dimensional array with optional reverse-mode gradient tracking.
///
/// A tensor is a shared handle to a graph node. Values produced by ops are
/// never mutated after creation; only leaves (parameters) are updated in
/// place by optimizers and checkpoint loading via data_mut().
template <class T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;
  BasicTensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static BasicTensor zeros(Shape shape, bool requires_grad = false);
  static BasicTensor full(Shape shape, T value, bool requires_grad = false);
  static BasicTensor scalar(T value, bool requires_grad = false);
  static BasicTensor randn(Shape shape, Rng& rng, T stddev = T{1}, bool requires_grad = false);
  static BasicTensor from_node(std::shared_ptr<detail::Node<T>> node);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  std::span<T> data_mut() { return node_->data; }
  T item() const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool has_grad() const { return node_->grad.size() == node_->data.size(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> grad_mut() { return node_->ensure_grad(); }
  void zero_grad() { node_->grad.assign(node_->data.size(), T{0}); }

  /// Copy of the values as a new leaf with no history.
  BasicTensor detach() const;
  const char* op_name() const { return node_->op; }
  const std::shared_ptr<detail::Node<T>>& node() const { return node_; }

 private:
  std::shared_ptr<detail::Node<T>> node_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

template <class T>
struct NamedParam {
  std::string name;
  BasicTensor<T> tensor;
};

template <class T>
using ParamList = std::vector<NamedParam<T>>;

/// Thread-local switch for graph recording. Disabled inside NoGradGuard.
class GradMode {
 public:
  static bool enabled();
  static void set_enabled(bool on);
};

class NoGradGuard {
 public:
  NoGradGuard() : prev_(GradMode::enabled()) { GradMode::set_enabled(false); }
  ~NoGradGuard() { GradMode::set_enabled(prev_); }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool prev_;
};

/// Topologically ordered record of the operations reachable from a root.
template <class T>
class Tape {
 public:
  static Tape record(const BasicTensor<T>& root);

  const std::vector<detail::Node<T>*>& nodes() const { return order_; }
  std::size_t size() const { return order_.size(); }

  /// Seeds d(root)/d(root) = 1 and runs every backward rule once, in reverse order.
  void run_backward(const BasicTensor<T>& root) const;

 private:
  std::vector<detail::Node<T>*> order_;
};

/// Accumulates d(loss)/d(leaf) into every reachable leaf that requires grad.
/// Throws ShapeError for a non-scalar loss and NumericError if a gradient goes non-finite.
template <class T>
void backward(const BasicTensor<T>& loss);

/// Builds an op result. Records history only when grad mode is on and some input requires grad.
template <class T>
BasicTensor<T> make_result(Shape shape, std::vector<T> data, std::initializer_list<BasicTensor<T>> inputs,
                           const char* op, std::function<void(detail::Node<T>&)> backward_rule);

template <class T>
bool all_finite(std::span<const T> values);

/// Converts between precisions, producing a fresh leaf.
template <class To, class From>
BasicTensor<To> cast(const BasicTensor<From>& t) {
  std::vector<To> out(t.data().begin(), t.data().end());
  return BasicTensor<To>(t.shape(), std::move(out), t.requires_grad());
}

}  // namespace sapgan
