#include "sapgan/tensor/ops.hpp"

#include <algorithm>
#include <cmath>

#include "sapgan/errors.hpp"
#include "sapgan/kernels/kernels.hpp"

namespace sapgan::ops {

using detail::Node;

namespace {

template <class T>
Node<T>* grad_target(Node<T>& self, std::size_t i) {
  Node<T>* in = self.inputs[i].get();
  return in->requires_grad ? in : nullptr;
}

template <class T>
void check_broadcastable(const BasicTensor<T>& a, const BasicTensor<T>& b, const char* op) {
  if (b.numel() != 1 && a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
}

template <class T, class Fwd, class Dfdx>
BasicTensor<T> unary(const BasicTensor<T>& x, const char* name, Fwd fwd, Dfdx dfdx) {
  std::vector<T> out(x.numel());
  auto in = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(in[i]);
  return make_result<T>(x.shape(), std::move(out), {x}, name, [dfdx](Node<T>& self) {
    auto* xn = grad_target(self, 0);
    if (!xn) return;
    auto& g = xn->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * dfdx(xn->data[i], self.data[i]);
  });
}

}  // namespace

template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  check_broadcastable(a, b, "add");
  const bool bcast = b.numel() == 1 && a.numel() != 1;
  std::vector<T> out(a.data().begin(), a.data().end());
  auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bcast ? bd[0] : bd[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, "add", [bcast](Node<T>& self) {
    if (auto* an = grad_target(self, 0)) kernels::axpy<T>(T{1}, self.grad, an->ensure_grad());
    if (auto* bn = grad_target(self, 1)) {
      auto& g = bn->ensure_grad();
      if (bcast) {
        T s = 0;
        for (T v : self.grad) s += v;
        g[0] += s;
      } else {
        kernels::axpy<T>(T{1}, self.grad, g);
      }
    }
  });
}

template <class T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  check_broadcastable(a, b, "sub");
  const bool bcast = b.numel() == 1 && a.numel() != 1;
  std::vector<T> out(a.data().begin(), a.data().end());
  auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bcast ? bd[0] : bd[i];
  return make_result<T>(a.shape(), std::move(out), {a, b}, "sub", [bcast](Node<T>& self) {
    if (auto* an = grad_target(self, 0)) kernels::axpy<T>(T{1}, self.grad, an->ensure_grad());
    if (auto* bn = grad_target(self, 1)) {
      auto& g = bn->ensure_grad();
      if (bcast) {
        T s = 0;
        for (T v : self.grad) s += v;
        g[0] -= s;
      } else {
        kernels::axpy<T>(T{-1}, self.grad, g);
      }
    }
  });
}

template <class T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  check_broadcastable(a, b, "mul");
  const bool bcast = b.numel() == 1 && a.numel() != 1;
  std::vector<T> out(a.numel());
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ad[i] * (bcast ? bd[0] : bd[i]);
  return make_result<T>(a.shape(), std::move(out), {a, b}, "mul", [bcast](Node<T>& self) {
    const auto& av = self.inputs[0]->data;
    const auto& bv = self.inputs[1]->data;
    if (auto* an = grad_target(self, 0)) {
      auto& g = an->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * (bcast ? bv[0] : bv[i]);
    }
    if (auto* bn = grad_target(self, 1)) {
      auto& g = bn->ensure_grad();
      for (std::size_t i = 0; i < self.grad.size(); ++i) g[bcast ? 0 : i] += self.grad[i] * av[i];
    }
  });
}

template <class T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor) {
  return unary(
      x, "scale", [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <class T>
BasicTensor<T> add_scalar(const BasicTensor<T>& x, T value) {
  return unary(
      x, "add_scalar", [value](T v) { return v + value; }, [](T, T) { return T{1}; });
}

template <class T>
BasicTensor<T> square(const BasicTensor<T>& x) {
  return unary(
      x, "square", [](T v) { return v * v; }, [](T v, T) { return T{2} * v; });
}

template <class T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  return unary(
      x, "relu", [](T v) { return v > T{0} ? v : T{0}; }, [](T v, T) { return v > T{0} ? T{1} : T{0}; });
}

template <class T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope) {
  return unary(
      x, "leaky_relu", [slope](T v) { return v > T{0} ? v : v * slope; },
      [slope](T v, T) { return v > T{0} ? T{1} : slope; });
}

template <class T>
BasicTensor<T> tanh(const BasicTensor<T>& x) {
  return unary(
      x, "tanh", [](T v) { return std::tanh(v); }, [](T, T y) { return T{1} - y * y; });
}

template <class T>
BasicTensor<T> sigmoid(const BasicTensor<T>& x) {
  return unary(
      x, "sigmoid",
      [](T v) {
        if (v >= T{0}) return T{1} / (T{1} + std::exp(-v));
        T e = std::exp(v);
        return e / (T{1} + e);
      },
      [](T, T y) { return y * (T{1} - y); });
}

template <class T>
BasicTensor<T> activation(const BasicTensor<T>& x, Activation kind, T slope) {
  switch (kind) {
    case Activation::relu: return relu(x);
    case Activation::leaky_relu: return leaky_relu(x, slope);
    case Activation::tanh: return tanh(x);
    case Activation::sigmoid: return sigmoid(x);
  }
  throw std::invalid_argument("unknown activation");
}

template <class T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
  T s = 0;
  for (T v : x.data()) s += v;
  return make_result<T>({1}, {s}, {x}, "sum", [](Node<T>& self) {
    auto* xn = grad_target(self, 0);
    if (!xn) return;
    for (auto& g : xn->ensure_grad()) g += self.grad[0];
  });
}

template <class T>
BasicTensor<T> mean(const BasicTensor<T>& x) {
  T s = 0;
  for (T v : x.data()) s += v;
  const T n = static_cast<T>(x.numel());
  return make_result<T>({1}, {s / n}, {x}, "mean", [n](Node<T>& self) {
    auto* xn = grad_target(self, 0);
    if (!xn) return;
    T g0 = self.grad[0] / n;
    for (auto& g : xn->ensure_grad()) g += g0;
  });
}

template <class T>
BasicTensor<T> loss(const BasicTensor<T>& a, const BasicTensor<T>& b, Loss kind) {
  if (a.shape() != b.shape())
    throw ShapeError("loss: shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  auto ad = a.data();
  auto bd = b.data();
  const std::size_t n = a.numel();
  T acc = 0;
  switch (kind) {
    case Loss::l1:
      for (std::size_t i = 0; i < n; ++i) acc += std::abs(ad[i] - bd[i]);
      break;
    case Loss::mse:
      for (std::size_t i = 0; i < n; ++i) acc += (ad[i] - bd[i]) * (ad[i] - bd[i]);
      break;
    case Loss::bce_with_logits:
      // max(x,0) - x*t + log(1 + exp(-|x|))
      for (std::size_t i = 0; i < n; ++i)
        acc += std::max(ad[i], T{0}) - ad[i] * bd[i] + std::log1p(std::exp(-std::abs(ad[i])));
      break;
  }
  const T inv_n = T{1} / static_cast<T>(n);
  static constexpr const char* kNames[] = {"l1_loss", "mse_loss", "bce_with_logits"};
  return make_result<T>({1}, {acc * inv_n}, {a, b}, kNames[static_cast<int>(kind)], [kind, inv_n](Node<T>& self) {
    const auto& av = self.inputs[0]->data;
    const auto& bv = self.inputs[1]->data;
    const T g0 = self.grad[0] * inv_n;
    auto* an = grad_target(self, 0);
    auto* bn = kind == Loss::bce_with_logits ? nullptr : grad_target(self, 1);
    std::vector<T>* ga = an ? &an->ensure_grad() : nullptr;
    std::vector<T>* gb = bn ? &bn->ensure_grad() : nullptr;
    for (std::size_t i = 0; i < av.size(); ++i) {
      T d = 0;
      switch (kind) {
        case Loss::l1: {
          T diff = av[i] - bv[i];
          d = diff > T{0} ? T{1} : (diff < T{0} ? T{-1} : T{0});
          break;
        }
        case Loss::mse: d = T{2} * (av[i] - bv[i]); break;
        case Loss::bce_with_logits: {
          T s = av[i] >= T{0} ? T{1} / (T{1} + std::exp(-av[i])) : std::exp(av[i]) / (T{1} + std::exp(av[i]));
          d = s - bv[i];
          break;
        }
      }
      if (ga) (*ga)[i] += g0 * d;
      if (gb) (*gb)[i] -= g0 * d;
    }
  });
}

template <class T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape) {
  if (sapgan::numel(shape) != x.numel())
    throw ShapeError("reshape: cannot view " + to_string(x.shape()) + " as " + to_string(shape));
  std::vector<T> out(x.data().begin(), x.data().end());
  return make_result<T>(std::move(shape), std::move(out), {x}, "reshape", [](Node<T>& self) {
    if (auto* xn = grad_target(self, 0)) kernels::axpy<T>(T{1}, self.grad, xn->ensure_grad());
  });
}

template <class T>
BasicTensor<T> concat_channels(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  if (a.rank() != 4 || b.rank() != 4 || a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
    throw ShapeError("concat_channels: incompatible " + to_string(a.shape()) + " and " + to_string(b.shape()));
  const std::size_t n = a.dim(0), ca = a.dim(1), cb = b.dim(1), hw = a.dim(2) * a.dim(3);
  std::vector<T> out(n * (ca + cb) * hw);
  auto ad = a.data();
  auto bd = b.data();
  for (std::size_t s = 0; s < n; ++s) {
    std::copy_n(ad.begin() + s * ca * hw, ca * hw, out.begin() + s * (ca + cb) * hw);
    std::copy_n(bd.begin() + s * cb * hw, cb * hw, out.begin() + (s * (ca + cb) + ca) * hw);
  }
  return make_result<T>({n, ca + cb, a.dim(2), a.dim(3)}, std::move(out), {a, b}, "concat_channels",
                        [n, ca, cb, hw](Node<T>& self) {
                          if (auto* an = grad_target(self, 0)) {
                            auto& g = an->ensure_grad();
                            for (std::size_t s = 0; s < n; ++s)
                              for (std::size_t i = 0; i < ca * hw; ++i) g[s * ca * hw + i] += self.grad[s * (ca + cb) * hw + i];
                          }
                          if (auto* bn = grad_target(self, 1)) {
                            auto& g = bn->ensure_grad();
                            for (std::size_t s = 0; s < n; ++s)
                              for (std::size_t i = 0; i < cb * hw; ++i)
                                g[s * cb * hw + i] += self.grad[(s * (ca + cb) + ca) * hw + i];
                          }
                        });
}

template <class T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& weight, const OptionalBias<T>& bias) {
  if (x.rank() != 2 || weight.rank() != 2 || x.dim(1) != weight.dim(1))
    throw ShapeError("linear: input " + to_string(x.shape()) + " incompatible with weight " + to_string(weight.shape()));
  const std::size_t n = x.dim(0), in = x.dim(1), out_f = weight.dim(0);
  if (bias && (bias->rank() != 1 || bias->dim(0) != out_f))
    throw ShapeError("linear: bias " + to_string(bias->shape()) + " must be [" + std::to_string(out_f) + "]");
  std::vector<T> out(n * out_f, T{0});
  kernels::active<T>().gemm_nt(n, out_f, in, x.data().data(), weight.data().data(), out.data());
  if (bias) {
    auto bd = bias->data();
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t o = 0; o < out_f; ++o) out[s * out_f + o] += bd[o];
  }
  auto rule = [n, in, out_f](Node<T>& self) {
    const auto& k = kernels::active<T>();
    const auto& xv = self.inputs[0]->data;
    const auto& wv = self.inputs[1]->data;
    if (auto* xn = grad_target(self, 0)) k.gemm_nn(n, in, out_f, self.grad.data(), wv.data(), xn->ensure_grad().data());
    if (auto* wn = grad_target(self, 1)) k.gemm_tn(out_f, in, n, self.grad.data(), xv.data(), wn->ensure_grad().data());
    if (self.inputs.size() > 2) {
      if (auto* bn = grad_target(self, 2)) {
        auto& g = bn->ensure_grad();
        for (std::size_t s = 0; s < n; ++s)
          for (std::size_t o = 0; o < out_f; ++o) g[o] += self.grad[s * out_f + o];
      }
    }
  };
  if (bias) return make_result<T>({n, out_f}, std::move(out), {x, weight, *bias}, "linear", rule);
  return make_result<T>({n, out_f}, std::move(out), {x, weight}, "linear", rule);
}

template <class T>
BasicTensor<T> batch_norm2d(const BasicTensor<T>& x, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                            RunningStats<T>& stats, BatchNormOptions opts) {
  if (x.rank() != 4) throw ShapeError("batch_norm2d: expected N×C×H×W, got " + to_string(x.shape()));
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3), m = n * hw;
  if (gamma.numel() != c || beta.numel() != c || stats.mean.size() != c || stats.var.size() != c)
    throw ShapeError("batch_norm2d: per-channel parameters must have " + std::to_string(c) + " entries");
  const T eps = static_cast<T>(opts.eps);
  auto xd = x.data();
  auto gd = gamma.data();
  auto bd = beta.data();
  std::vector<T> out(x.numel());
  std::vector<T> mu(c), invstd(c);
  for (std::size_t ch = 0; ch < c; ++ch) {
    T mean_c, var_c;
    if (opts.training) {
      double s = 0;
      for (std::size_t s_i = 0; s_i < n; ++s_i)
        for (std::size_t i = 0; i < hw; ++i) s += xd[(s_i * c + ch) * hw + i];
      double mu_d = s / static_cast<double>(m);
      double ss = 0;
      for (std::size_t s_i = 0; s_i < n; ++s_i)
        for (std::size_t i = 0; i < hw; ++i) {
          double d = xd[(s_i * c + ch) * hw + i] - mu_d;
          ss += d * d;
        }
      mean_c = static_cast<T>(mu_d);
      var_c = static_cast<T>(ss / static_cast<double>(m));
      const T mom = static_cast<T>(opts.momentum);
      T unbiased = m > 1 ? static_cast<T>(ss / static_cast<double>(m - 1)) : var_c;
      stats.mean[ch] = (T{1} - mom) * stats.mean[ch] + mom * mean_c;
      stats.var[ch] = (T{1} - mom) * stats.var[ch] + mom * unbiased;
    } else {
      mean_c = stats.mean[ch];
      var_c = stats.var[ch];
    }
    mu[ch] = mean_c;
    invstd[ch] = T{1} / std::sqrt(var_c + eps);
    for (std::size_t s_i = 0; s_i < n; ++s_i)
      for (std::size_t i = 0; i < hw; ++i) {
        std::size_t idx = (s_i * c + ch) * hw + i;
        out[idx] = gd[ch] * (xd[idx] - mean_c) * invstd[ch] + bd[ch];
      }
  }
  const bool training = opts.training;
  return make_result<T>(x.shape(), std::move(out), {x, gamma, beta}, "batch_norm2d",
                        [n, c, hw, m, mu, invstd, training](Node<T>& self) {
                          const auto& xv = self.inputs[0]->data;
                          const auto& gv = self.inputs[1]->data;
                          auto* xn = grad_target(self, 0);
                          auto* gn = grad_target(self, 1);
                          auto* bn = grad_target(self, 2);
                          for (std::size_t ch = 0; ch < c; ++ch) {
                            T sum_dy = 0, sum_dy_xhat = 0;
                            for (std::size_t s = 0; s < n; ++s)
                              for (std::size_t i = 0; i < hw; ++i) {
                                std::size_t idx = (s * c + ch) * hw + i;
                                T xhat = (xv[idx] - mu[ch]) * invstd[ch];
                                sum_dy += self.grad[idx];
                                sum_dy_xhat += self.grad[idx] * xhat;
                              }
                            if (gn) gn->ensure_grad()[ch] += sum_dy_xhat;
                            if (bn) bn->ensure_grad()[ch] += sum_dy;
                            if (!xn) continue;
                            auto& gx = xn->ensure_grad();
                            const T k = gv[ch] * invstd[ch];
                            const T inv_m = T{1} / static_cast<T>(m);
                            for (std::size_t s = 0; s < n; ++s)
                              for (std::size_t i = 0; i < hw; ++i) {
                                std::size_t idx = (s * c + ch) * hw + i;
                                if (training) {
                                  T xhat = (xv[idx] - mu[ch]) * invstd[ch];
                                  gx[idx] += k * (self.grad[idx] - inv_m * sum_dy - inv_m * xhat * sum_dy_xhat);
                                } else {
                                  gx[idx] += k * self.grad[idx];
                                }
                              }
                          }
                        });
}

template <class T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> mask(x.numel());
  for (auto& mv : mask) mv = rng.uniform() >= p ? keep_scale : T{0};
  std::vector<T> out(x.numel());
  auto xd = x.data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = xd[i] * mask[i];
  return make_result<T>(x.shape(), std::move(out), {x}, "dropout", [mask = std::move(mask)](Node<T>& self) {
    auto* xn = grad_target(self, 0);
    if (!xn) return;
    auto& g = xn->ensure_grad();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
  });
}

#define SAPGAN_INSTANTIATE_OPS(T)                                                                              \
  template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                                  \
  template BasicTensor<T> sub(const BasicTensor<T>&, const BasicTensor<T>&);                                  \
  template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                                  \
  template BasicTensor<T> scale(const BasicTensor<T>&, T);                                                    \
  template BasicTensor<T> add_scalar(const BasicTensor<T>&, T);                                               \
  template BasicTensor<T> square(const BasicTensor<T>&);                                                      \
  template BasicTensor<T> relu(const BasicTensor<T>&);                                                        \
  template BasicTensor<T> leaky_relu(const BasicTensor<T>&, T);                                               \
  template BasicTensor<T> tanh(const BasicTensor<T>&);                                                        \
  template BasicTensor<T> sigmoid(const BasicTensor<T>&);                                                     \
  template BasicTensor<T> activation(const BasicTensor<T>&, Activation, T);                                   \
  template BasicTensor<T> sum(const BasicTensor<T>&);                                                         \
  template BasicTensor<T> mean(const BasicTensor<T>&);                                                        \
  template BasicTensor<T> loss(const BasicTensor<T>&, const BasicTensor<T>&, Loss);                           \
  template BasicTensor<T> reshape(const BasicTensor<T>&, Shape);                                              \
  template BasicTensor<T> concat_channels(const BasicTensor<T>&, const BasicTensor<T>&);                      \
  template BasicTensor<T> linear(const BasicTensor<T>&, const BasicTensor<T>&,                                \
                                 const std::optional<BasicTensor<T>>&);                                       \
  template BasicTensor<T> batch_norm2d(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&,   \
                                       RunningStats<T>&, BatchNormOptions);                                   \
  template BasicTensor<T> dropout(const BasicTensor<T>&, double, bool, Rng&);

SAPGAN_INSTANTIATE_OPS(float)
SAPGAN_INSTANTIATE_OPS(double)

}  // namespace sapgan::ops
