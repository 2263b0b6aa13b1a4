#include "pan/model.hpp"

#include <cmath>
#include <utility>

#include "pan/errors.hpp"

namespace pan {

Variant variant_from_string(const std::string& name) {
    if (name == "full") return Variant::Full;
    if (name == "no_pac") return Variant::NoPac;
    if (name == "one_pac") return Variant::OnePac;
    throw ConfigError("unknown model variant \"" + name + "\" (full|no_pac|one_pac)");
}

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Full: return "full";
        case Variant::NoPac: return "no_pac";
        case Variant::OnePac: return "one_pac";
    }
    return "full";
}

void ModelConfig::validate() const {
    if (rows < 1 || cols < 1) throw ConfigError("model grid dims must be >= 1");
    if (states < 1) throw ConfigError("model needs at least one state channel");
    if (input_channels < 1) throw ConfigError("model input_channels must be >= 1");
    if (c_f < 1) throw ConfigError("c_f must be >= 1");
    if (n_pasti < 1) throw ConfigError("n_pasti must be >= 1");
    if (n0 < 0 || n1 < 0 || n2 < 0) throw ConfigError("PAC counts must be >= 0");
    if (n0 + n1 + n2 < 1) throw ConfigError("each PASTI needs at least one PAC");
    if ((n0 > 0 && c0 < 1) || (n1 > 0 && c1 < 1) || (n2 > 0 && c2 < 1)) {
        throw ConfigError("PAC filter counts must be >= 1");
    }
    if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
        throw ConfigError("dropout rate must be in [0, 1)");
    }
}

// ---------------------------------------------------------------------------
// PositionEmbedding

PositionEmbedding::PositionEmbedding(int rows, int cols, int channels)
    : grid(1, rows, cols, channels), grad(1, rows, cols, channels) {}

Tensor PositionEmbedding::forward(const Tensor& f) const {
    if (f.c() != grid.c() || f.h() != grid.h() || f.w() != grid.w()) {
        throw ConfigError("position embedding shape " + shape_string(grid) +
                          " does not match features " + shape_string(f));
    }
    return add(f, grid);
}

Tensor PositionEmbedding::backward(const Tensor& grad_out) {
    const Tensor summed = reduce_samples(grad_out);
    for (std::size_t k = 0; k < grad.data.size(); ++k) grad.data[k] += summed.data[k];
    return grad_out;
}

// ---------------------------------------------------------------------------
// PacuLayer

PacuLayer::PacuLayer(int rows, int cols, int c_in, int c_out, int kernel_size, bool use_pe)
    : conv(c_out, kernel_size, c_in), use_pe_(use_pe) {
    if (use_pe_) pe = PositionEmbedding(rows, cols, c_in);
}

Tensor PacuLayer::forward(const Tensor& f) {
    conv_in_ = use_pe_ ? pe.forward(f) : f;
    pre_relu_ = conv2d_forward(conv_in_, conv);
    return relu_forward(pre_relu_);
}

Tensor PacuLayer::backward(const Tensor& grad_out) {
    const Tensor g_conv = relu_backward(pre_relu_, grad_out);
    Tensor g_in = conv2d_backward(conv_in_, conv, g_conv);
    if (use_pe_) g_in = pe.backward(g_in);
    return g_in;
}

// ---------------------------------------------------------------------------
// PacBlock

PacBlock::PacBlock(int rows, int cols, int c_in, int c, int kernel_size, int m, bool use_pe)
    : entry(c, 1, c_in), exit(c, 1, c) {
    if (m < 1) throw ConfigError("a PAC needs at least one PACu (got m=" + std::to_string(m) + ")");
    units.reserve(m);
    for (int k = 0; k < m; ++k) units.emplace_back(rows, cols, c, c, kernel_size, use_pe);
}

Tensor PacBlock::forward(const Tensor& f) {
    entry_in_ = f;
    Tensor x = conv2d_forward(entry_in_, entry);
    for (PacuLayer& unit : units) x = unit.forward(x);
    exit_in_ = std::move(x);
    return conv2d_forward(exit_in_, exit);
}

Tensor PacBlock::backward(const Tensor& grad_out) {
    Tensor g = conv2d_backward(exit_in_, exit, grad_out);
    for (auto it = units.rbegin(); it != units.rend(); ++it) g = it->backward(g);
    return conv2d_backward(entry_in_, entry, g);
}

// ---------------------------------------------------------------------------
// PastiBlock

namespace {

struct PacKind {
    int m;
    int s;
    int c;
    int count;
};

std::vector<PacKind> pac_kinds(const ModelConfig& cfg) {
    // The three kinds: PAC(m=1, s=1, c0), PAC(m=1, s=3, c1), PAC(m=2, s=3, c2).
    if (cfg.variant == Variant::OnePac) {
        const int width = cfg.concat_width();
        if (cfg.c2 < 1 || width % cfg.c2 != 0) {
            throw ConfigError("one_pac variant needs c2 to divide the concat width " +
                              std::to_string(width));
        }
        return {{2, 3, cfg.c2, width / cfg.c2}};
    }
    std::vector<PacKind> kinds;
    if (cfg.n0 > 0) kinds.push_back({1, 1, cfg.c0, cfg.n0});
    if (cfg.n1 > 0) kinds.push_back({1, 3, cfg.c1, cfg.n1});
    if (cfg.n2 > 0) kinds.push_back({2, 3, cfg.c2, cfg.n2});
    return kinds;
}

}  // namespace

PastiBlock::PastiBlock(const ModelConfig& cfg, bool use_pe) : dropout_rate(cfg.dropout_rate) {
    for (const PacKind& kind : pac_kinds(cfg)) {
        for (int k = 0; k < kind.count; ++k) {
            pacs.emplace_back(cfg.rows, cfg.cols, cfg.c_f, kind.c, kind.s, kind.m, use_pe);
            widths_.push_back(kind.c);
        }
    }
    int width = 0;
    for (int w : widths_) width += w;
    merge = ConvKernel(cfg.c_f, 1, width);
}

int PastiBlock::concat_width() const { return merge.c_in; }

Tensor PastiBlock::forward(const Tensor& f, Mode mode, RngStream& rng) {
    std::vector<Tensor> outs;
    outs.reserve(pacs.size());
    for (PacBlock& pac : pacs) outs.push_back(pac.forward(f));
    std::vector<const Tensor*> views;
    views.reserve(outs.size());
    for (const Tensor& t : outs) views.push_back(&t);
    const Tensor cat = concat_channels(views);
    auto [dropped, mask] = dropout_forward(cat, dropout_rate, mode, rng);
    mask_ = std::move(mask);
    merge_in_ = std::move(dropped);
    pre_relu_ = conv2d_forward(merge_in_, merge);
    const Tensor act = relu_forward(pre_relu_);
    return add(act, f);
}

Tensor PastiBlock::backward(const Tensor& grad_out) {
    const Tensor g_relu = relu_backward(pre_relu_, grad_out);
    const Tensor g_drop = conv2d_backward(merge_in_, merge, g_relu);
    const Tensor g_cat = dropout_backward(mask_, g_drop);
    const std::vector<Tensor> parts = split_channels(g_cat, widths_);
    Tensor g_f = grad_out;  // residual path
    for (std::size_t p = 0; p < pacs.size(); ++p) {
        const Tensor g_pac = pacs[p].backward(parts[p]);
        for (std::size_t k = 0; k < g_f.data.size(); ++k) g_f.data[k] += g_pac.data[k];
    }
    return g_f;
}

// ---------------------------------------------------------------------------
// PanModel

PanModel::PanModel(const ModelConfig& cfg, RngStream& rng) : cfg_(cfg) {
    cfg_.validate();
    const bool use_pe = cfg_.variant != Variant::NoPac;
    if (cfg_.input_pe && use_pe) {
        input_pe = PositionEmbedding(cfg_.rows, cfg_.cols, cfg_.input_channels);
    }
    stem = ConvKernel(cfg_.c_f, 1, cfg_.input_channels);
    stem.he_init(rng);
    blocks.reserve(cfg_.n_pasti);
    for (int b = 0; b < cfg_.n_pasti; ++b) {
        PastiBlock block(cfg_, use_pe);
        for (PacBlock& pac : block.pacs) {
            pac.entry.he_init(rng);
            for (PacuLayer& unit : pac.units) unit.conv.he_init(rng);
            pac.exit.he_init(rng);
        }
        // Merge convs start at 1% of He scale: near-identity residuals,
        // but off the exact-zero state where the post-merge ReLU (whose
        // subgradient at 0 is 0) would gate all gradients off the block
        // forever.
        block.merge.he_init(rng);
        for (double& w : block.merge.weights) w *= 0.01;
        blocks.push_back(std::move(block));
    }
    head = PacuLayer(cfg_.rows, cfg_.cols, cfg_.c_f, cfg_.states, 1, use_pe);
    head.conv.he_init(rng);
    // The head ReLU is the sole gradient gate for the whole model, and
    // its subgradient at 0 is pinned to 0, so an output channel that goes
    // negative for every cell is unrecoverable. Full-scale init spreads
    // initial predictions far outside the normalized [0, 1] target range,
    // and the (1-d)-weighted L1 term then drags the shared head
    // parameters down until exactly that happens. Start the head small
    // and centered in the target range instead.
    for (double& w : head.conv.weights) w *= 0.1;
    std::fill(head.conv.bias.begin(), head.conv.bias.end(), 0.5);
}

Tensor PanModel::forward(const Tensor& input, Mode mode, RngStream& rng) {
    if (input.c() != cfg_.input_channels) {
        throw ConfigError("model expects " + std::to_string(cfg_.input_channels) +
                          " input channels, got " + std::to_string(input.c()));
    }
    stem_in_ = cfg_.input_pe && cfg_.variant != Variant::NoPac ? input_pe.forward(input) : input;
    Tensor f = conv2d_forward(stem_in_, stem);
    for (PastiBlock& block : blocks) f = block.forward(f, mode, rng);
    return head.forward(f);
}

Tensor PanModel::backward(const Tensor& grad_out) {
    Tensor g = head.backward(grad_out);
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) g = it->backward(g);
    g = conv2d_backward(stem_in_, stem, g);
    if (cfg_.input_pe && cfg_.variant != Variant::NoPac) g = input_pe.backward(g);
    return g;
}

std::vector<ParamRef> PanModel::params() {
    std::vector<ParamRef> out;
    const auto add_conv = [&](const std::string& name, ConvKernel& k) {
        out.push_back({name + ".weights", &k.weights, &k.grad_weights,
                       {k.c_out, k.s, k.s, k.c_in}});
        out.push_back({name + ".bias", &k.bias, &k.grad_bias, {k.c_out}});
    };
    const auto add_pe = [&](const std::string& name, PositionEmbedding& pe) {
        out.push_back({name, &pe.grid.data, &pe.grad.data,
                       {1, pe.grid.h(), pe.grid.w(), pe.grid.c()}});
    };
    const auto add_pacu = [&](const std::string& name, PacuLayer& unit) {
        if (unit.use_pe()) add_pe(name + ".pe", unit.pe);
        add_conv(name + ".conv", unit.conv);
    };

    if (cfg_.input_pe && cfg_.variant != Variant::NoPac) add_pe("input_pe", input_pe);
    add_conv("stem", stem);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        const std::string bn = "pasti" + std::to_string(b);
        PastiBlock& block = blocks[b];
        for (std::size_t p = 0; p < block.pacs.size(); ++p) {
            const std::string pn = bn + ".pac" + std::to_string(p);
            PacBlock& pac = block.pacs[p];
            add_conv(pn + ".entry", pac.entry);
            for (std::size_t u = 0; u < pac.units.size(); ++u) {
                add_pacu(pn + ".unit" + std::to_string(u), pac.units[u]);
            }
            add_conv(pn + ".exit", pac.exit);
        }
        add_conv(bn + ".merge", block.merge);
    }
    add_pacu("head", head);
    return out;
}

void PanModel::reset_grads() {
    for (const ParamRef& p : params()) std::fill(p.grad->begin(), p.grad->end(), 0.0);
}

std::size_t PanModel::param_count() {
    std::size_t total = 0;
    for (const ParamRef& p : params()) total += p.value->size();
    return total;
}

PanModel build_variant(Variant kind, ModelConfig cfg, RngStream& rng) {
    cfg.variant = kind;
    return PanModel(cfg, rng);
}

// ---------------------------------------------------------------------------
// Loss

LossResult mixed_loss(const Tensor& pred, const Tensor& truth) {
    if (!pred.same_shape(truth)) {
        throw ConfigError("loss: prediction shape " + shape_string(pred) +
                          " does not match truth " + shape_string(truth));
    }
    for (double d : truth.data) {
        if (!(d >= 0.0 && d <= 1.0)) {
            throw DataError("loss: truth value " + std::to_string(d) +
                            " outside normalized [0, 1]");
        }
    }
    const double inv_n = 1.0 / pred.n();
    LossResult res;
    res.grad = Tensor(pred.n(), pred.h(), pred.w(), pred.c());
    double total = 0.0;
    for (std::size_t k = 0; k < pred.data.size(); ++k) {
        const double diff = pred.data[k] - truth.data[k];
        const double weight = 1.0 - truth.data[k];
        total += std::fabs(diff * weight) + diff * diff;
        const double sgn = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
        res.grad.data[k] = (sgn * weight + 2.0 * diff) * inv_n;
    }
    res.value = total * inv_n;
    return res;
}

}  // namespace pan
