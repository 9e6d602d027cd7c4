#include "sapgan/tensor/adam.hpp"

#include <cmath>

#include "sapgan/errors.hpp"

namespace sapgan {

template <class T>
void adam_step(std::span<T> param, std::span<const T> grad, AdamState<T>& state, const AdamConfig& cfg) {
  if (grad.size() != param.size() || state.m.size() != param.size() || state.v.size() != param.size())
    throw ShapeError("adam_step: param has " + std::to_string(param.size()) + " values, grad " +
                     std::to_string(grad.size()) + ", moments " + std::to_string(state.m.size()));
  if (!all_finite(grad)) throw NumericError("adam_step: non-finite gradient");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const T b1 = static_cast<T>(cfg.beta1), b2 = static_cast<T>(cfg.beta2);
  const T wd = static_cast<T>(cfg.weight_decay);
  for (std::size_t i = 0; i < param.size(); ++i) {
    T g = grad[i] + wd * param[i];
    state.m[i] = b1 * state.m[i] + (T{1} - b1) * g;
    state.v[i] = b2 * state.v[i] + (T{1} - b2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    param[i] -= static_cast<T>(cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps));
  }
}

template <class T>
Adam<T>::Adam(ParamList<T> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  states_.reserve(params_.size());
  for (const auto& p : params_) states_.emplace_back(p.tensor.numel());
}

template <class T>
void Adam<T>::zero_grad() {
  for (auto& p : params_) p.tensor.zero_grad();
}

template <class T>
void Adam<T>::step() {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto& tensor = params_[i].tensor;
    if (!tensor.has_grad()) tensor.zero_grad();
    if (!all_finite(tensor.grad())) throw NumericError("non-finite gradient for parameter '" + params_[i].name + "'");
    adam_step<T>(tensor.data_mut(), tensor.grad(), states_[i], cfg_);
  }
}

template void adam_step<float>(std::span<float>, std::span<const float>, AdamState<float>&, const AdamConfig&);
template void adam_step<double>(std::span<double>, std::span<const double>, AdamState<double>&, const AdamConfig&);
template class Adam<float>;
template class Adam<double>;

}  // namespace sapgan
