#pragma once

// Parameterized building blocks shared by both generators and discriminators.

#include <optional>
#include <string>
#include <vector>

#include "sapgan/tensor/ops.hpp"

namespace sapgan::nn {

/// Conv/linear weights are drawn from N(0, kInitStddev).
inline constexpr double kInitStddev = 0.02;

/// A named slice of model state (parameter or buffer) for checkpointing.
template <class T>
struct StateRef {
  std::string name;
  Shape shape;
  std::span<T> values;
};

template <class T>
using StateList = std::vector<StateRef<T>>;

template <class T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::size_t in, std::size_t out, std::size_t kernel, ops::ConvGeometry geom, bool with_bias, Rng& rng);

  BasicTensor<T> operator()(const BasicTensor<T>& x) const { return ops::conv2d(x, weight, bias, geom); }
  void collect(const std::string& prefix, ParamList<T>& params, StateList<T>& state);

  BasicTensor<T> weight;
  std::optional<BasicTensor<T>> bias;
  ops::ConvGeometry geom;
};

template <class T>
class ConvTranspose2d {
 public:
  ConvTranspose2d() = default;
  ConvTranspose2d(std::size_t in, std::size_t out, std::size_t kernel, ops::ConvGeometry geom, bool with_bias,
                  Rng& rng);

  BasicTensor<T> operator()(const BasicTensor<T>& x) const { return ops::conv_transpose2d(x, weight, bias, geom); }
  void collect(const std::string& prefix, ParamList<T>& params, StateList<T>& state);

  BasicTensor<T> weight;
  std::optional<BasicTensor<T>> bias;
  ops::ConvGeometry geom;
};

template <class T>
class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(std::size_t channels);

  BasicTensor<T> operator()(const BasicTensor<T>& x, bool training);
  void collect(const std::string& prefix, ParamList<T>& params, StateList<T>& state);

  BasicTensor<T> gamma;
  BasicTensor<T> beta;
  ops::RunningStats<T> stats;
  double eps = 1e-5;
  double momentum = 0.1;
};

template <class T>
class Linear {
 public:
  Linear() = default;
  Linear(std::size_t in, std::size_t out, bool with_bias, Rng& rng);

  BasicTensor<T> operator()(const BasicTensor<T>& x) const { return ops::linear(x, weight, bias); }
  void collect(const std::string& prefix, ParamList<T>& params, StateList<T>& state);

  BasicTensor<T> weight;
  std::optional<BasicTensor<T>> bias;
};

}  // namespace sapgan::nn
