#include "sapgan/tensor/nn.hpp"

namespace sapgan::nn {
namespace {

template <class T>
void add_param(const std::string& name, BasicTensor<T>& t, ParamList<T>& params, StateList<T>& state) {
  params.push_back({name, t});
  state.push_back({name, t.shape(), t.data_mut()});
}

}  // namespace

template <class T>
Conv2d<T>::Conv2d(std::size_t in, std::size_t out, std::size_t kernel, ops::ConvGeometry g, bool with_bias, Rng& rng)
    : weight(BasicTensor<T>::randn({out, in, kernel, kernel}, rng, static_cast<T>(kInitStddev), true)), geom(g) {
  if (with_bias) bias = BasicTensor<T>::zeros({out}, true);
}

template <class T>
void Conv2d<T>::collect(const std::string& prefix, ParamList<T>& params, StateList<T>& state) {
  add_param(prefix + ".weight", weight, params, state);
  if (bias) add_param(prefix + ".bias", *bias, params, state);
}

template <class T>
ConvTranspose2d<T>::ConvTranspose2d(std::size_t in, std::size_t out, std::size_t kernel, ops::ConvGeometry g,
                                    bool with_bias, Rng& rng)
    : weight(BasicTensor<T>::randn({in, out, kernel, kernel}, rng, static_cast<T>(kInitStddev), true)), geom(g) {
  if (with_bias) bias = BasicTensor<T>::zeros({out}, true);
}

template <class T>
void ConvTranspose2d<T>::collect(const std::string& prefix, ParamList<T>& params, StateList<T>& state) {
  add_param(prefix + ".weight", weight, params, state);
  if (bias) add_param(prefix + ".bias", *bias, params, state);
}

template <class T>
BatchNorm2d<T>::BatchNorm2d(std::size_t channels)
    : gamma(BasicTensor<T>::full({channels}, T{1}, true)),
      beta(BasicTensor<T>::zeros({channels}, true)),
      stats(channels) {}

template <class T>
BasicTensor<T> BatchNorm2d<T>::operator()(const BasicTensor<T>& x, bool training) {
  return ops::batch_norm2d(x, gamma, beta, stats, {training, eps, momentum});
}

template <class T>
void BatchNorm2d<T>::collect(const std::string& prefix, ParamList<T>& params, StateList<T>& state) {
  add_param(prefix + ".gamma", gamma, params, state);
  add_param(prefix + ".beta", beta, params, state);
  state.push_back({prefix + ".running_mean", {stats.mean.size()}, stats.mean});
  state.push_back({prefix + ".running_var", {stats.var.size()}, stats.var});
}

template <class T>
Linear<T>::Linear(std::size_t in, std::size_t out, bool with_bias, Rng& rng)
    : weight(BasicTensor<T>::randn({out, in}, rng, static_cast<T>(kInitStddev), true)) {
  if (with_bias) bias = BasicTensor<T>::zeros({out}, true);
}

template <class T>
void Linear<T>::collect(const std::string& prefix, ParamList<T>& params, StateList<T>& state) {
  add_param(prefix + ".weight", weight, params, state);
  if (bias) add_param(prefix + ".bias", *bias, params, state);
}

template class Conv2d<float>;
template class Conv2d<double>;
template class ConvTranspose2d<float>;
template class ConvTranspose2d<double>;
template class BatchNorm2d<float>;
template class BatchNorm2d<double>;
template class Linear<float>;
template class Linear<double>;

}  // namespace sapgan::nn
