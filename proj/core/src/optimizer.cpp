#include "pan/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "pan/errors.hpp"

namespace pan {

AdamOptimizer::AdamOptimizer(double lr, double beta1, double beta2, double epsilon)
    : lr_(lr), beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {
    if (lr < 0.0) throw ConfigError("learning rate must be >= 0");
}

void AdamOptimizer::step(const std::vector<ParamRef>& params) {
    if (states_.empty()) {
        states_.resize(params.size());
        for (std::size_t p = 0; p < params.size(); ++p) {
            states_[p].m.assign(params[p].value->size(), 0.0);
            states_[p].v.assign(params[p].value->size(), 0.0);
        }
    } else if (states_.size() != params.size()) {
        throw ConfigError("optimizer was initialized with " + std::to_string(states_.size()) +
                          " parameters, got " + std::to_string(params.size()));
    }

    ++step_count_;
    for (std::size_t p = 0; p < params.size(); ++p) {
        const ParamRef& param = params[p];
        AdamState& st = states_[p];
        if (st.m.size() != param.value->size()) {
            throw ConfigError("optimizer state size mismatch for parameter " + param.name);
        }
        st.step += 1;
        const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(st.step));
        const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(st.step));
        std::vector<double>& value = *param.value;
        std::vector<double>& grad = *param.grad;
        for (std::size_t k = 0; k < value.size(); ++k) {
            const double g = grad[k];
            if (std::isnan(g)) {
                throw NumericError("NaN gradient in parameter " + param.name + " at index " +
                                   std::to_string(k));
            }
            st.m[k] = beta1_ * st.m[k] + (1.0 - beta1_) * g;
            st.v[k] = beta2_ * st.v[k] + (1.0 - beta2_) * g * g;
            const double m_hat = st.m[k] / bc1;
            const double v_hat = st.v[k] / bc2;
            value[k] -= lr_ * m_hat / (std::sqrt(v_hat) + epsilon_);
        }
        std::fill(grad.begin(), grad.end(), 0.0);
    }
}

}  // namespace pan
