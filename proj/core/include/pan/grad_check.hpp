#pragma once

#include <functional>
#include <span>

#include "pan/tensor.hpp"

namespace pan {

/// Central-difference gradient verification. `f` evaluates the scalar
/// function at a point; `analytic` is the gradient under test. Returns the
/// max over coordinates of |a - n| / max(|a|, |n|, 1e-8).
double grad_check(const std::function<double(const Tensor&)>& f, const Tensor& point,
                  std::span<const double> analytic, double eps);

/// Same check over an arbitrary flat parameter array that `f` reads
/// through a side channel. The array is perturbed in place and restored.
double grad_check_flat(const std::function<double()>& f, std::span<double> values,
                       std::span<const double> analytic, double eps);

}  // namespace pan
