#include "pan/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pan/errors.hpp"

namespace pan {

namespace {

double rel_error(double analytic, double numeric) {
    const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    return std::fabs(analytic - numeric) / denom;
}

}  // namespace

double grad_check(const std::function<double(const Tensor&)>& f, const Tensor& point,
                  std::span<const double> analytic, double eps) {
    if (analytic.size() != point.size()) {
        throw ConfigError("grad_check: analytic gradient has " +
                          std::to_string(analytic.size()) + " entries, point has " +
                          std::to_string(point.size()));
    }
    Tensor probe = point;
    double worst = 0.0;
    for (std::size_t k = 0; k < probe.data.size(); ++k) {
        const double saved = probe.data[k];
        probe.data[k] = saved + eps;
        const double fp = f(probe);
        probe.data[k] = saved - eps;
        const double fm = f(probe);
        probe.data[k] = saved;
        const double numeric = (fp - fm) / (2.0 * eps);
        worst = std::max(worst, rel_error(analytic[k], numeric));
    }
    return worst;
}

double grad_check_flat(const std::function<double()>& f, std::span<double> values,
                       std::span<const double> analytic, double eps) {
    if (analytic.size() != values.size()) {
        throw ConfigError("grad_check_flat: gradient/value length mismatch");
    }
    double worst = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double saved = values[k];
        values[k] = saved + eps;
        const double fp = f();
        values[k] = saved - eps;
        const double fm = f();
        values[k] = saved;
        const double numeric = (fp - fm) / (2.0 * eps);
        worst = std::max(worst, rel_error(analytic[k], numeric));
    }
    return worst;
}

}  // namespace pan
