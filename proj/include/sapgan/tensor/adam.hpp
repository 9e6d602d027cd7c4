#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sapgan/tensor/tensor.hpp"

namespace sapgan {

struct AdamConfig {
  double lr = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// Per-parameter Adam moments and step count.
template <class T>
struct AdamState {
  std::vector<T> m;
  std::vector<T> v;
  std::int64_t t = 0;

  explicit AdamState(std::size_t n = 0) : m(n, T{0}), v(n, T{0}) {}
};

/// One bias-corrected Adam update of `param` in place; increments state.t.
/// Throws ShapeError on size mismatch and NumericError on a non-finite gradient.
template <class T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamState<T>& state, const AdamConfig& cfg);

/// Adam over a fixed parameter list.
template <class T>
class Adam {
 public:
  Adam() = default;
  Adam(ParamList<T> params, AdamConfig cfg);

  void zero_grad();
  /// Updates every parameter from its accumulated gradient.
  void step();

  const AdamConfig& config() const { return cfg_; }
  AdamConfig& config() { return cfg_; }
  const ParamList<T>& params() const { return params_; }
  std::vector<AdamState<T>>& states() { return states_; }
  const std::vector<AdamState<T>>& states() const { return states_; }

 private:
  ParamList<T> params_;
  std::vector<AdamState<T>> states_;
  AdamConfig cfg_;
};

}  // namespace sapgan
