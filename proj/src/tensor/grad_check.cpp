#include "sapgan/tensor/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace sapgan {

template <class T>
GradCheckResult grad_check(const std::function<BasicTensor<T>()>& loss_fn, ParamList<T>& params, double eps,
                           std::size_t max_elements_per_param) {
  for (auto& p : params) p.tensor.zero_grad();
  backward(loss_fn());

  GradCheckResult result;
  NoGradGuard no_grad;
  for (auto& p : params) {
    auto values = p.tensor.data_mut();
    auto grad = p.tensor.grad();
    std::size_t step = 1;
    if (max_elements_per_param && values.size() > max_elements_per_param)
      step = (values.size() + max_elements_per_param - 1) / max_elements_per_param;
    for (std::size_t i = 0; i < values.size(); i += step) {
      const T saved = values[i];
      values[i] = saved + static_cast<T>(eps);
      const double plus = loss_fn().item();
      values[i] = saved - static_cast<T>(eps);
      const double minus = loss_fn().item();
      values[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double analytic = grad[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      const double err = std::abs(analytic - numeric) / denom;
      ++result.checked;
      if (result.checked == 1 || err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = p.name;
        result.worst_index = i;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

template GradCheckResult grad_check<float>(const std::function<BasicTensor<float>()>&, ParamList<float>&, double,
                                           std::size_t);
template GradCheckResult grad_check<double>(const std::function<BasicTensor<double>()>&, ParamList<double>&, double,
                                            std::size_t);

}  // namespace sapgan
