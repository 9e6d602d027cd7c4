#pragma once

// Differentiable operators. Every op is defined for float and double tensors
// and records a backward rule when any input requires grad.

#include <optional>
#include <type_traits>
#include <vector>

#include "sapgan/tensor/rng.hpp"
#include "sapgan/tensor/tensor.hpp"

namespace sapgan::ops {

// ---- elementwise ---------------------------------------------------------

// b may have the same shape as a, or hold a single element (broadcast).
template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <class T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b);
template <class T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <class T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor);
template <class T>
BasicTensor<T> add_scalar(const BasicTensor<T>& x, T value);
template <class T>
BasicTensor<T> square(const BasicTensor<T>& x);

// ---- activations ---------------------------------------------------------

enum class Activation { relu, leaky_relu, tanh, sigmoid };

template <class T>
BasicTensor<T> relu(const BasicTensor<T>& x);
template <class T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope = T(0.2));
template <class T>
BasicTensor<T> tanh(const BasicTensor<T>& x);
template <class T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x);
template <class T>
BasicTensor<T> activation(const BasicTensor<T>& x, Activation kind, T slope = T(0.2));

// ---- reductions & losses -------------------------------------------------

template <class T>
BasicTensor<T> sum(const BasicTensor<T>& x);
template <class T>
BasicTensor<T> mean(const BasicTensor<T>& x);

enum class Loss { l1, mse, bce_with_logits };

// Scalar mean over all elements. For bce_with_logits, a holds raw scores and
// b targets in [0,1]; no gradient flows to the targets.
template <class T>
BasicTensor<T> loss(const BasicTensor<T>& a, const BasicTensor<T>& b, Loss kind);
template <class T>
BasicTensor<T> l1_loss(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return loss(a, b, Loss::l1);
}
template <class T>
BasicTensor<T> mse_loss(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return loss(a, b, Loss::mse);
}
template <class T>
BasicTensor<T> bce_with_logits(const BasicTensor<T>& logits, const BasicTensor<T>& targets) {
  return loss(logits, targets, Loss::bce_with_logits);
}
// bce_with_logits against a constant target.
template <class T>
BasicTensor<T> bce_with_logits(const BasicTensor<T>& logits, T target) {
  return loss(logits, BasicTensor<T>::full(logits.shape(), target), Loss::bce_with_logits);
}

// ---- layout --------------------------------------------------------------

template <class T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape);
// Concatenates N×Ca×H×W and N×Cb×H×W along channels.
template <class T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b);

// ---- layers --------------------------------------------------------------

// Non-deduced so callers can pass std::nullopt directly.
template <class T>
using OptionalBias = std::optional<std::type_identity_t<BasicTensor<T>>>;

// x: N×in, weight: out×in, bias: out.
template <class T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                      const OptionalBias<T>& bias);

struct ConvGeometry {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// Cross-correlation. input N×Cin×H×W, weight Cout×Cin×kh×kw.
template <class T>
BasicTensor<T> conv2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const OptionalBias<T>& bias, ConvGeometry geom);

// Adjoint of conv2d. input N×Cin×H×W, weight Cin×Cout×kh×kw,
// output spatial (H-1)·stride - 2·padding + kh.
template <class T>
BasicTensor<T> conv_transpose2d(const BasicTensor<T>& input, const BasicTensor<T>& weight,
                                const OptionalBias<T>& bias, ConvGeometry geom);

template <class T>
struct RunningStats {
  std::vector<T> mean;
  std::vector<T> var;
  explicit RunningStats(std::size_t channels = 0) : mean(channels, T{0}), var(channels, T{1}) {}
};

struct BatchNormOptions {
  bool training = true;
  double eps = 1e-5;
  double momentum = 0.1;
};

// Per-channel normalization of N×C×H×W. Training mode uses batch statistics and
// updates `stats` (unbiased variance); eval mode uses `stats`.
template <class T>
BasicTensor<T> batch_norm2d(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                            RunningStats<T>& stats, BatchNormOptions opts);

// Inverted dropout. Identity when !training or p == 0.
template <class T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double p, bool training, Rng& rng);

}  // namespace sapgan::ops
