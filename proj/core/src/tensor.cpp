#include "pan/tensor.hpp"

#include <cmath>
#include <string>

#include "pan/errors.hpp"

namespace pan {

Tensor::Tensor(int n, int h, int w, int c) : n_(n), h_(h), w_(w), c_(c) {
    if (n < 1 || h < 1 || w < 1 || c < 1) {
        throw ConfigError("tensor dims must all be >= 1, got (" + std::to_string(n) + ", " +
                          std::to_string(h) + ", " + std::to_string(w) + ", " +
                          std::to_string(c) + ")");
    }
    data.assign(static_cast<std::size_t>(n) * h * w * c, 0.0);
}

Tensor Tensor::filled(int n, int h, int w, int c, double value) {
    Tensor t(n, h, w, c);
    t.data.assign(t.data.size(), value);
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string shape_string(const Tensor& t) {
    return "(" + std::to_string(t.n()) + ", " + std::to_string(t.h()) + ", " +
           std::to_string(t.w()) + ", " + std::to_string(t.c()) + ")";
}

}  // namespace pan
