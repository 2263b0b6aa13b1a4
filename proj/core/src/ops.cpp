#include "pan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "pan/errors.hpp"

namespace pan {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ConfigError(std::string(op) + ": shape mismatch " + shape_string(a) + " vs " +
                          shape_string(b));
    }
}

// Contiguous chunking over [0, count); chunk order is fixed so any
// reduction over per-chunk results is deterministic for a given worker
// count.
template <typename Fn>
void for_each_chunk(int count, int workers, Fn&& fn) {
    if (workers <= 1 || count <= 1) {
        fn(0, 0, count);
        return;
    }
    workers = std::min(workers, count);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    const int base = count / workers;
    const int extra = count % workers;
    int begin = 0;
    for (int t = 0; t < workers; ++t) {
        const int len = base + (t < extra ? 1 : 0);
        threads.emplace_back(fn, t, begin, begin + len);
        begin += len;
    }
    for (auto& th : threads) th.join();
}

}  // namespace

int worker_count() {
    const char* env = std::getenv("PAN_THREADS");
    if (env == nullptr) return 1;
    int n = std::atoi(env);
    if (n < 1) n = 1;
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    if (hw > 0) n = std::min(n, hw);
    return n;
}

ConvKernel::ConvKernel(int c_out_, int s_, int c_in_) : c_out(c_out_), s(s_), c_in(c_in_) {
    if (c_out < 1 || c_in < 1 || s < 1) {
        throw ConfigError("conv kernel dims must be >= 1, got c_out=" + std::to_string(c_out) +
                          " s=" + std::to_string(s) + " c_in=" + std::to_string(c_in));
    }
    if (s % 2 == 0) {
        throw ConfigError("conv kernel size must be odd for same-padding, got s=" +
                          std::to_string(s));
    }
    const std::size_t wn = static_cast<std::size_t>(c_out) * s * s * c_in;
    weights.assign(wn, 0.0);
    bias.assign(c_out, 0.0);
    grad_weights.assign(wn, 0.0);
    grad_bias.assign(c_out, 0.0);
}

void ConvKernel::he_init(RngStream& rng) {
    const double stddev = std::sqrt(2.0 / (static_cast<double>(s) * s * c_in));
    for (double& v : weights) v = stddev * rng.next_normal();
    std::fill(bias.begin(), bias.end(), 0.0);
}

void ConvKernel::reset_grads() {
    std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
    std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

Tensor conv2d_forward(const Tensor& input, const ConvKernel& kernel) {
    if (input.c() != kernel.c_in) {
        throw ConfigError("conv2d_forward: input has " + std::to_string(input.c()) +
                          " channels but kernel expects " + std::to_string(kernel.c_in));
    }
    const int n = input.n(), h = input.h(), w = input.w();
    const int ci_n = kernel.c_in, co_n = kernel.c_out, s = kernel.s;
    const int pad = (s - 1) / 2;
    Tensor out(n, h, w, co_n);

    const double* in = input.data.data();
    const double* wt = kernel.weights.data();
    double* ot = out.data.data();

    auto run = [&](int /*chunk*/, int n0, int n1) {
        for (int nn = n0; nn < n1; ++nn) {
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    double* orow = ot + out.index(nn, i, j, 0);
                    for (int o = 0; o < co_n; ++o) orow[o] = kernel.bias[o];
                    for (int di = 0; di < s; ++di) {
                        const int y = i + di - pad;
                        if (y < 0 || y >= h) continue;
                        for (int dj = 0; dj < s; ++dj) {
                            const int x = j + dj - pad;
                            if (x < 0 || x >= w) continue;
                            const double* irow = in + input.index(nn, y, x, 0);
                            for (int o = 0; o < co_n; ++o) {
                                const double* wrow = wt + kernel.weight_index(o, di, dj, 0);
                                double acc = 0.0;
                                for (int ci = 0; ci < ci_n; ++ci) acc += wrow[ci] * irow[ci];
                                orow[o] += acc;
                            }
                        }
                    }
                }
            }
        }
    };
    for_each_chunk(n, worker_count(), run);
    return out;
}

Tensor conv2d_backward(const Tensor& input, ConvKernel& kernel, const Tensor& grad_out) {
    if (input.c() != kernel.c_in) {
        throw ConfigError("conv2d_backward: input has " + std::to_string(input.c()) +
                          " channels but kernel expects " + std::to_string(kernel.c_in));
    }
    if (grad_out.n() != input.n() || grad_out.h() != input.h() || grad_out.w() != input.w() ||
        grad_out.c() != kernel.c_out) {
        throw ConfigError("conv2d_backward: grad_out shape " + shape_string(grad_out) +
                          " does not match forward output for input " + shape_string(input));
    }
    const int n = input.n(), h = input.h(), w = input.w();
    const int ci_n = kernel.c_in, co_n = kernel.c_out, s = kernel.s;
    const int pad = (s - 1) / 2;
    Tensor grad_in(n, h, w, ci_n);

    const int workers = std::min(worker_count(), n);
    const std::size_t wn = kernel.weights.size();
    // Per-chunk weight/bias accumulators, reduced in chunk order below.
    std::vector<std::vector<double>> dw(workers, std::vector<double>(wn, 0.0));
    std::vector<std::vector<double>> db(workers, std::vector<double>(co_n, 0.0));

    const double* in = input.data.data();
    const double* go = grad_out.data.data();
    const double* wt = kernel.weights.data();
    double* gi = grad_in.data.data();

    auto run = [&](int chunk, int n0, int n1) {
        double* dwc = dw[chunk].data();
        double* dbc = db[chunk].data();
        for (int nn = n0; nn < n1; ++nn) {
            for (int i = 0; i < h; ++i) {
                for (int j = 0; j < w; ++j) {
                    const double* grow = go + grad_out.index(nn, i, j, 0);
                    for (int o = 0; o < co_n; ++o) dbc[o] += grow[o];
                    for (int di = 0; di < s; ++di) {
                        const int y = i + di - pad;
                        if (y < 0 || y >= h) continue;
                        for (int dj = 0; dj < s; ++dj) {
                            const int x = j + dj - pad;
                            if (x < 0 || x >= w) continue;
                            const double* irow = in + input.index(nn, y, x, 0);
                            double* girow = gi + grad_in.index(nn, y, x, 0);
                            for (int o = 0; o < co_n; ++o) {
                                const double g = grow[o];
                                if (g == 0.0) continue;
                                const std::size_t wi = kernel.weight_index(o, di, dj, 0);
                                const double* wrow = wt + wi;
                                double* dwrow = dwc + wi;
                                for (int ci = 0; ci < ci_n; ++ci) {
                                    dwrow[ci] += g * irow[ci];
                                    girow[ci] += g * wrow[ci];
                                }
                            }
                        }
                    }
                }
            }
        }
    };
    for_each_chunk(n, workers, run);

    for (int t = 0; t < workers; ++t) {
        for (std::size_t k = 0; k < wn; ++k) kernel.grad_weights[k] += dw[t][k];
        for (int o = 0; o < co_n; ++o) kernel.grad_bias[o] += db[t][o];
    }
    return grad_in;
}

Tensor relu_forward(const Tensor& input) {
    Tensor out = input;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return out;
}

Tensor relu_backward(const Tensor& input, const Tensor& grad_out) {
    check_same_shape(input, grad_out, "relu_backward");
    Tensor grad_in = grad_out;
    for (std::size_t k = 0; k < grad_in.data.size(); ++k) {
        if (input.data[k] <= 0.0) grad_in.data[k] = 0.0;
    }
    return grad_in;
}

std::pair<Tensor, Tensor> dropout_forward(const Tensor& input, double rate, Mode mode,
                                          RngStream& rng) {
    if (rate < 0.0 || rate >= 1.0) {
        throw ConfigError("dropout rate must be in [0, 1), got " + std::to_string(rate));
    }
    if (mode == Mode::Eval || rate == 0.0) {
        Tensor mask = Tensor::filled(input.n(), input.h(), input.w(), input.c(), 1.0);
        return {input, mask};
    }
    const double keep = 1.0 - rate;
    const double inv_keep = 1.0 / keep;
    Tensor mask(input.n(), input.h(), input.w(), input.c());
    Tensor out = input;
    for (std::size_t k = 0; k < out.data.size(); ++k) {
        const double m = rng.next_double() < keep ? inv_keep : 0.0;
        mask.data[k] = m;
        out.data[k] *= m;
    }
    return {out, mask};
}

Tensor dropout_backward(const Tensor& mask, const Tensor& grad_out) {
    return elementwise_mul(mask, grad_out);
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
    if (parts.empty()) throw ConfigError("concat_channels: empty part list");
    const Tensor& first = *parts.front();
    int c_total = 0;
    for (const Tensor* p : parts) {
        if (p->n() != first.n() || p->h() != first.h() || p->w() != first.w()) {
            throw ConfigError("concat_channels: spatial dims mismatch " + shape_string(first) +
                              " vs " + shape_string(*p));
        }
        c_total += p->c();
    }
    Tensor out(first.n(), first.h(), first.w(), c_total);
    const std::size_t cells = static_cast<std::size_t>(first.n()) * first.h() * first.w();
    for (std::size_t cell = 0; cell < cells; ++cell) {
        double* dst = out.data.data() + cell * c_total;
        for (const Tensor* p : parts) {
            const double* src = p->data.data() + cell * p->c();
            std::copy(src, src + p->c(), dst);
            dst += p->c();
        }
    }
    return out;
}

std::vector<Tensor> split_channels(const Tensor& whole, const std::vector<int>& widths) {
    int c_total = 0;
    for (int w : widths) {
        if (w < 1) throw ConfigError("split_channels: widths must be >= 1");
        c_total += w;
    }
    if (c_total != whole.c()) {
        throw ConfigError("split_channels: widths sum to " + std::to_string(c_total) +
                          " but tensor has " + std::to_string(whole.c()) + " channels");
    }
    std::vector<Tensor> parts;
    parts.reserve(widths.size());
    for (int w : widths) parts.emplace_back(whole.n(), whole.h(), whole.w(), w);
    const std::size_t cells = static_cast<std::size_t>(whole.n()) * whole.h() * whole.w();
    for (std::size_t cell = 0; cell < cells; ++cell) {
        const double* src = whole.data.data() + cell * c_total;
        for (std::size_t p = 0; p < widths.size(); ++p) {
            double* dst = parts[p].data.data() + cell * widths[p];
            std::copy(src, src + widths[p], dst);
            src += widths[p];
        }
    }
    return parts;
}

Tensor add(const Tensor& a, const Tensor& b) {
    if (a.same_shape(b)) {
        Tensor out = a;
        for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] += b.data[k];
        return out;
    }
    if (b.n() == 1 && a.h() == b.h() && a.w() == b.w() && a.c() == b.c()) {
        Tensor out = a;
        const std::size_t block = b.data.size();
        for (int nn = 0; nn < a.n(); ++nn) {
            double* dst = out.data.data() + static_cast<std::size_t>(nn) * block;
            for (std::size_t k = 0; k < block; ++k) dst[k] += b.data[k];
        }
        return out;
    }
    throw ConfigError("add: incongruent shapes " + shape_string(a) + " vs " + shape_string(b));
}

Tensor reduce_samples(const Tensor& grad_out) {
    Tensor out(1, grad_out.h(), grad_out.w(), grad_out.c());
    const std::size_t block = out.data.size();
    for (int nn = 0; nn < grad_out.n(); ++nn) {
        const double* src = grad_out.data.data() + static_cast<std::size_t>(nn) * block;
        for (std::size_t k = 0; k < block; ++k) out.data[k] += src[k];
    }
    return out;
}

Tensor elementwise_mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "elementwise_mul");
    Tensor out = a;
    for (std::size_t k = 0; k < out.data.size(); ++k) out.data[k] *= b.data[k];
    return out;
}

Tensor scale(const Tensor& a, double factor) {
    Tensor out = a;
    for (double& v : out.data) v *= factor;
    return out;
}

}  // namespace pan
