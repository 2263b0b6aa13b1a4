#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "pan/rng.hpp"
#include "pan/tensor.hpp"

namespace pan {

enum class Mode { Train, Eval };

/// Same-padding 2D convolution weights with gradient accumulators.
/// Weights are laid out (c_out, s, s, c_in), channels-in fastest.
struct ConvKernel {
    ConvKernel() = default;
    ConvKernel(int c_out, int s, int c_in);

    int c_out = 0;
    int s = 0;
    int c_in = 0;

    std::vector<double> weights;
    std::vector<double> bias;
    std::vector<double> grad_weights;
    std::vector<double> grad_bias;

    std::size_t weight_index(int o, int di, int dj, int ci) const {
        return ((static_cast<std::size_t>(o) * s + di) * s + dj) * c_in + ci;
    }
    double& w(int o, int di, int dj, int ci) { return weights[weight_index(o, di, dj, ci)]; }

    /// Fan-in-scaled normal init, zero bias.
    void he_init(RngStream& rng);

    /// Gradients accumulate across backward calls until explicitly reset.
    void reset_grads();
};

Tensor conv2d_forward(const Tensor& input, const ConvKernel& kernel);

/// Returns grad wrt input; accumulates weight/bias gradients into `kernel`.
Tensor conv2d_backward(const Tensor& input, ConvKernel& kernel, const Tensor& grad_out);

Tensor relu_forward(const Tensor& input);
/// Subgradient at exactly 0 is 0.
Tensor relu_backward(const Tensor& input, const Tensor& grad_out);

/// Inverted dropout. Train mode keeps each element with probability
/// 1-rate and scales by 1/(1-rate); the returned mask already carries the
/// scale so the backward pass is a plain elementwise product with it.
/// Eval mode is a bit-exact identity with an all-ones mask.
std::pair<Tensor, Tensor> dropout_forward(const Tensor& input, double rate, Mode mode,
                                          RngStream& rng);
Tensor dropout_backward(const Tensor& mask, const Tensor& grad_out);

Tensor concat_channels(const std::vector<const Tensor*>& parts);
std::vector<Tensor> split_channels(const Tensor& whole, const std::vector<int>& widths);

/// Elementwise sum. `b` may be a (1, h, w, c) tensor broadcast across the
/// sample dimension of `a`.
Tensor add(const Tensor& a, const Tensor& b);
/// Adjoint of the broadcast add: grad wrt the (1, h, w, c) operand.
Tensor reduce_samples(const Tensor& grad_out);

Tensor elementwise_mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);

/// Worker count from PAN_THREADS (default 1, clamped to hardware).
int worker_count();

}  // namespace pan
