#pragma once

#include <string>
#include <vector>

#include "pan/ops.hpp"
#include "pan/optimizer.hpp"
#include "pan/rng.hpp"
#include "pan/tensor.hpp"

namespace pan {

enum class Variant { Full, NoPac, OnePac };

Variant variant_from_string(const std::string& name);
std::string variant_name(Variant v);

struct ModelConfig {
    int rows = 0;            // I
    int cols = 0;            // J
    int states = 2;          // K
    int input_channels = 0;  // (n_r + 2*n_r*n_d + 2*n_r*n_w) * K
    int c_f = 256;           // feature width between blocks
    int n_pasti = 10;
    int n0 = 1, n1 = 4, n2 = 4;        // PAC counts of the three kinds
    int c0 = 256, c1 = 16, c2 = 16;    // their filter counts
    double dropout_rate = 0.5;
    Variant variant = Variant::Full;
    bool input_pe = false;

    void validate() const;
    int concat_width() const { return n0 * c0 + n1 * c1 + n2 * c2; }
};

/// Learnable per-cell vector grid added onto a feature map (broadcast
/// over samples). Every instance owns independent parameters.
class PositionEmbedding {
public:
    PositionEmbedding() = default;
    PositionEmbedding(int rows, int cols, int channels);

    Tensor forward(const Tensor& f) const;
    /// grad wrt input is grad_out unchanged; the grid gradient is the
    /// sample-sum of grad_out, accumulated here.
    Tensor backward(const Tensor& grad_out);

    Tensor grid;
    Tensor grad;
};

/// PE -> same-padding conv -> ReLU. The no-PE form is the plain conv unit
/// used by the no_pac ablation.
class PacuLayer {
public:
    PacuLayer() = default;
    PacuLayer(int rows, int cols, int c_in, int c_out, int kernel_size, bool use_pe);

    Tensor forward(const Tensor& f);
    Tensor backward(const Tensor& grad_out);

    bool use_pe() const { return use_pe_; }
    PositionEmbedding pe;
    ConvKernel conv;

private:
    bool use_pe_ = false;
    Tensor conv_in_;   // PE output, consumed by the conv backward
    Tensor pre_relu_;  // conv output, consumed by the ReLU backward
};

/// 1x1 entry conv, a stack of m identical PACu layers, 1x1 exit conv.
class PacBlock {
public:
    PacBlock() = default;
    PacBlock(int rows, int cols, int c_in, int c, int kernel_size, int m, bool use_pe);

    Tensor forward(const Tensor& f);
    Tensor backward(const Tensor& grad_out);

    int out_channels() const { return exit.c_out; }

    ConvKernel entry;
    std::vector<PacuLayer> units;
    ConvKernel exit;

private:
    Tensor entry_in_;
    Tensor exit_in_;
};

/// Parallel PAC bank -> channel concat -> dropout -> 1x1 merge conv ->
/// ReLU, plus the residual connection back to the block input.
class PastiBlock {
public:
    PastiBlock() = default;
    PastiBlock(const ModelConfig& cfg, bool use_pe);

    Tensor forward(const Tensor& f, Mode mode, RngStream& rng);
    Tensor backward(const Tensor& grad_out);

    int concat_width() const;

    std::vector<PacBlock> pacs;
    ConvKernel merge;
    double dropout_rate = 0.5;

private:
    std::vector<int> widths_;
    Tensor mask_;
    Tensor merge_in_;
    Tensor pre_relu_;
};

/// The full predictor: 1x1 stem conv lifting the input to c_f channels,
/// a stack of residual PASTI blocks, and a PACu_{1,K} output head.
class PanModel {
public:
    PanModel(const ModelConfig& cfg, RngStream& rng);

    Tensor forward(const Tensor& input, Mode mode, RngStream& rng);
    /// Propagates grad_out back through the cached activations of the
    /// last forward call; accumulates all parameter gradients and
    /// returns the gradient wrt the input.
    Tensor backward(const Tensor& grad_out);

    std::vector<ParamRef> params();
    void reset_grads();
    std::size_t param_count();

    const ModelConfig& config() const { return cfg_; }

    PositionEmbedding input_pe;
    ConvKernel stem;
    std::vector<PastiBlock> blocks;
    PacuLayer head;

private:
    ModelConfig cfg_;
    Tensor stem_in_;
};

PanModel build_variant(Variant kind, ModelConfig cfg, RngStream& rng);

/// Mixed L1/L2 training objective. Truth must live in normalized [0, 1]
/// space; per sample the loss is sum |(p-d)(1-d)| + sum (p-d)^2, and the
/// batch value is the mean over samples. sign(0) = 0 in the gradient.
struct LossResult {
    double value = 0.0;
    Tensor grad;
};

LossResult mixed_loss(const Tensor& pred, const Tensor& truth);

}  // namespace pan
