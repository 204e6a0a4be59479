#include "framepred/grad_check.hpp"

#include <cmath>
#include <vector>

namespace framepred {

template <typename T>
GradCheckReport<T> grad_check(const std::function<T(bool)>& f,
                              ParamStore<T>& params, T epsilon) {
  if (epsilon <= T(0)) throw Error("grad_check: epsilon must be positive");
  params.zero_grads();
  const T base = f(true);
  if (!std::isfinite(static_cast<double>(base)))
    throw Error("grad_check: objective is not finite");

  // Snapshot the analytic gradient before the probing evaluations.
  std::vector<std::vector<T>> analytic;
  analytic.reserve(params.names().size());
  for (const auto& name : params.names())
    analytic.push_back(params.get(name).grad_vec());

  GradCheckReport<T> report;
  size_t pi = 0;
  for (const auto& name : params.names()) {
    Tensor<T>& p = params.get(name);
    T* w = p.data();
    const int64_t n = p.numel();
    for (int64_t i = 0; i < n; ++i) {
      const T saved = w[i];
      w[i] = saved + epsilon;
      const T plus = f(false);
      w[i] = saved - epsilon;
      const T minus = f(false);
      w[i] = saved;
      if (!std::isfinite(static_cast<double>(plus)) ||
          !std::isfinite(static_cast<double>(minus)))
        throw Error("grad_check: objective is not finite near " + name);
      const T numeric = (plus - minus) / (T(2) * epsilon);
      const T a = analytic[pi][static_cast<size_t>(i)];
      const T rel = std::abs(a - numeric) /
                    std::max(T(1e-8), std::abs(a) + std::abs(numeric));
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = name;
        report.worst_index = i;
        report.analytic = a;
        report.numeric = numeric;
      }
    }
    ++pi;
  }
  return report;
}

template GradCheckReport<float> grad_check(const std::function<float(bool)>&,
                                           ParamStore<float>&, float);
template GradCheckReport<double> grad_check(const std::function<double(bool)>&,
                                            ParamStore<double>&, double);

}  // namespace framepred
