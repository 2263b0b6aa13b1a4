#pragma once

#include <cstdint>
#include <vector>

#include "pan/model.hpp"
#include "pan/windows.hpp"

namespace pan {

struct TrainConfig {
    int epochs = 0;
    int batch_size = 32;
    double lr = 1e-5;
    std::uint64_t seed = 0;
};

struct TrainTrace {
    std::vector<double> epoch_mean_loss;
};

/// Shuffled mini-batch training over the given target slots. Each batch
/// materializes its windows, runs forward in train mode, backpropagates
/// the mixed loss and applies one Adam step. Fully deterministic given
/// the rng stream. A non-finite loss aborts naming the batch's targets.
TrainTrace train_model(PanModel& model, const FrameStore& store, const WindowConfig& wcfg,
                       const std::vector<int>& targets, const TrainConfig& tcfg, RngStream& rng);

/// Target slots t+1 whose full lookback fits inside [0, limit_slot) with
/// targets themselves in [first_target, limit_slot).
std::vector<int> valid_targets(const WindowConfig& wcfg, int first_target, int limit_slot);

/// Eval-mode predictions for the given target slots, batched; returns a
/// (len(targets), I, J, K) tensor in normalized space.
Tensor predict_targets(PanModel& model, const FrameStore& store, const WindowConfig& wcfg,
                       const std::vector<int>& targets, int batch_size);

}  // namespace pan
