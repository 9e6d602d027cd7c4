#include "sapgan/tensor/tensor.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "sapgan/errors.hpp"

namespace sapgan {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

namespace {
thread_local bool g_grad_enabled = true;
}

bool GradMode::enabled() { return g_grad_enabled; }
void GradMode::set_enabled(bool on) { g_grad_enabled = on; }

template <class T>
BasicTensor<T>::BasicTensor(Shape shape, std::vector<T> data, bool requires_grad)
    : node_(std::make_shared<detail::Node<T>>()) {
  for (auto d : shape)
    if (d == 0) throw ShapeError("tensor dims must be positive, got " + to_string(shape));
  if (sapgan::numel(shape) != data.size())
    throw ShapeError("shape " + to_string(shape) + " needs " + std::to_string(sapgan::numel(shape)) +
                     " values, got " + std::to_string(data.size()));
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

template <class T>
BasicTensor<T> BasicTensor<T>::zeros(Shape shape, bool requires_grad) {
  auto n = sapgan::numel(shape);
  return BasicTensor(std::move(shape), std::vector<T>(n, T{0}), requires_grad);
}

template <class T>
BasicTensor<T> BasicTensor<T>::full(Shape shape, T value, bool requires_grad) {
  auto n = sapgan::numel(shape);
  return BasicTensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <class T>
BasicTensor<T> BasicTensor<T>::scalar(T value, bool requires_grad) {
  return BasicTensor({1}, {value}, requires_grad);
}

template <class T>
BasicTensor<T> BasicTensor<T>::randn(Shape shape, Rng& rng, T stddev, bool requires_grad) {
  std::vector<T> v(sapgan::numel(shape));
  for (auto& x : v) x = static_cast<T>(rng.normal()) * stddev;
  return BasicTensor(std::move(shape), std::move(v), requires_grad);
}

template <class T>
BasicTensor<T> BasicTensor<T>::from_node(std::shared_ptr<detail::Node<T>> node) {
  BasicTensor t;
  t.node_ = std::move(node);
  return t;
}

template <class T>
T BasicTensor<T>::item() const {
  if (numel() != 1) throw ShapeError("item() on tensor of shape " + to_string(shape()));
  return node_->data[0];
}

template <class T>
BasicTensor<T> BasicTensor<T>::detach() const {
  return BasicTensor(node_->shape, node_->data, false);
}

template <class T>
bool all_finite(std::span<const T> values) {
  for (T v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

template <class T>
BasicTensor<T> make_result(Shape shape, std::vector<T> data, std::initializer_list<BasicTensor<T>> inputs,
                           const char* op, std::function<void(detail::Node<T>&)> backward_rule) {
  auto node = std::make_shared<detail::Node<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  bool track = false;
  if (GradMode::enabled()) {
    for (const auto& in : inputs) track = track || in.requires_grad();
  }
  if (track) {
    node->requires_grad = true;
    for (const auto& in : inputs) node->inputs.push_back(in.node());
    node->backward = std::move(backward_rule);
  }
  return BasicTensor<T>::from_node(std::move(node));
}

template <class T>
Tape<T> Tape<T>::record(const BasicTensor<T>& root) {
  Tape tape;
  if (!root.requires_grad()) return tape;
  // Iterative post-order DFS; each node is appended after all of its inputs.
  std::unordered_set<const detail::Node<T>*> visited;
  std::vector<std::pair<detail::Node<T>*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->inputs.size()) {
      detail::Node<T>* child = node->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) stack.emplace_back(child, 0);
    } else {
      tape.order_.push_back(node);
      stack.pop_back();
    }
  }
  return tape;
}

template <class T>
void Tape<T>::run_backward(const BasicTensor<T>& root) const {
  if (order_.empty()) return;
  for (auto* node : order_)
    if (!node->is_leaf()) node->grad.assign(node->data.size(), T{0});
  root.node()->ensure_grad()[0] += T{1};
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    detail::Node<T>& node = **it;
    if (!node.backward) continue;
    node.backward(node);
  }
  for (auto* node : order_) {
    if (node->is_leaf() && !all_finite<T>(node->grad))
      throw NumericError(std::string("non-finite gradient reached a leaf of shape ") + to_string(node->shape));
  }
}

template <class T>
void backward(const BasicTensor<T>& loss) {
  if (loss.numel() != 1) throw ShapeError("backward() needs a scalar loss, got shape " + to_string(loss.shape()));
  if (!all_finite<T>(loss.data())) throw NumericError("loss is not finite");
  Tape<T>::record(loss).run_backward(loss);
}

template class BasicTensor<float>;
template class BasicTensor<double>;
template class Tape<float>;
template class Tape<double>;
template void backward(const BasicTensor<float>&);
template void backward(const BasicTensor<double>&);
template bool all_finite<float>(std::span<const float>);
template bool all_finite<double>(std::span<const double>);
template BasicTensor<float> make_result(Shape, std::vector<float>, std::initializer_list<BasicTensor<float>>,
                                        const char*, std::function<void(detail::Node<float>&)>);
template BasicTensor<double> make_result(Shape, std::vector<double>, std::initializer_list<BasicTensor<double>>,
                                         const char*, std::function<void(detail::Node<double>&)>);

}  // namespace sapgan
