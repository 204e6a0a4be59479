#pragma once

#include <functional>
#include <string>

#include "framepred/tensor.hpp"

namespace framepred {

template <typename T>
struct GradCheckReport {
  T max_rel_err = T(0);
  std::string worst_param;
  int64_t worst_index = -1;
  T analytic = T(0);
  T numeric = T(0);
};

/// Central-finite-difference verification of an analytic gradient.
///
/// `f(true)` must evaluate the objective AND populate the store's gradients
/// (typically by running a fresh graph and calling backward); `f(false)` must
/// only return the objective value. The function must be deterministic. Each
/// parameter coordinate is perturbed by +/- epsilon and the relative error
/// |a - n| / max(1e-8, |a| + |n|) is tracked; the worst one is returned.
template <typename T>
GradCheckReport<T> grad_check(const std::function<T(bool)>& f,
                              ParamStore<T>& params, T epsilon);

extern template GradCheckReport<float> grad_check(
    const std::function<float(bool)>&, ParamStore<float>&, float);
extern template GradCheckReport<double> grad_check(
    const std::function<double(bool)>&, ParamStore<double>&, double);

}  // namespace framepred
