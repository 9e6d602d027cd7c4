#pragma once

#include <functional>
#include <string>

#include "sapgan/tensor/tensor.hpp"

namespace sapgan {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t checked = 0;
};

/// Compares backward() against central differences.
///
/// `loss_fn` must rebuild the graph from the current values of `params` on
/// every call and return a scalar. Each element of each parameter is
/// perturbed by ±eps; the error per element is
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
/// `max_elements_per_param` (0 = all) subsamples large tensors with a fixed stride.
template <class T>
GradCheckResult grad_check(const std::function<BasicTensor<T>()>& loss_fn, ParamList<T>& params, double eps,
                           std::size_t max_elements_per_param = 0);

}  // namespace sapgan
