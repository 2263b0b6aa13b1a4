#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pan {

/// Named view onto one learnable array and its gradient accumulator.
/// Models hand these out in a fixed declaration order; that order also
/// defines the checkpoint layout and the optimizer state alignment.
struct ParamRef {
    std::string name;
    std::vector<double>* value = nullptr;
    std::vector<double>* grad = nullptr;
    std::vector<int> shape;
};

struct AdamState {
    std::int64_t step = 0;
    std::vector<double> m;
    std::vector<double> v;
};

/// Standard Adam with bias correction. Gradients are reset to zero after
/// each step; a NaN gradient aborts with the offending parameter's name.
class AdamOptimizer {
public:
    explicit AdamOptimizer(double lr, double beta1 = 0.9, double beta2 = 0.999,
                           double epsilon = 1e-8);

    void step(const std::vector<ParamRef>& params);

    double learning_rate() const { return lr_; }
    std::int64_t step_count() const { return step_count_; }

private:
    double lr_, beta1_, beta2_, epsilon_;
    std::int64_t step_count_ = 0;
    std::vector<AdamState> states_;
};

}  // namespace pan
