#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace pan {

/// Dense (n, h, w, c) block of 64-bit floats, row-major with channels
/// fastest. The single numeric carrier for every layer in the model.
class Tensor {
public:
    Tensor() = default;
    Tensor(int n, int h, int w, int c);

    static Tensor filled(int n, int h, int w, int c, double value);

    int n() const { return n_; }
    int h() const { return h_; }
    int w() const { return w_; }
    int c() const { return c_; }

    std::size_t size() const { return data.size(); }

    double& at(int in, int ih, int iw, int ic) {
        return data[index(in, ih, iw, ic)];
    }
    double at(int in, int ih, int iw, int ic) const {
        return data[index(in, ih, iw, ic)];
    }

    std::size_t index(int in, int ih, int iw, int ic) const {
        return ((static_cast<std::size_t>(in) * h_ + ih) * w_ + iw) * c_ + ic;
    }

    bool same_shape(const Tensor& other) const {
        return n_ == other.n_ && h_ == other.h_ && w_ == other.w_ && c_ == other.c_;
    }

    bool all_finite() const;

    std::vector<double> data;

private:
    int n_ = 0, h_ = 0, w_ = 0, c_ = 0;
};

std::string shape_string(const Tensor& t);

}  // namespace pan
