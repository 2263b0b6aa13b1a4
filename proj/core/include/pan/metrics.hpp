#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pan/grid.hpp"

namespace pan {

/// Per-state error summary under the low-volume filter. Samples whose
/// true count falls below the threshold are excluded from both the sums
/// and the averaging denominator; with nothing retained the metrics are
/// undefined rather than zero.
struct StateMetrics {
    std::optional<double> rmse;
    std::optional<double> mape;
    std::uint64_t evaluated = 0;
    std::uint64_t filtered = 0;
};

struct MetricsReport {
    std::vector<StateMetrics> per_state;
    int first_target = 0;  // T1 + 1
    int last_target = 0;   // T2
    double threshold = 0.0;
};

/// Raw-scale predictions aligned with raw-scale truths over the same
/// target slots; predictions are (slot, i, j, k) doubles.
struct PredictedFrames {
    int num_slots = 0;
    int rows = 0;
    int cols = 0;
    int states = 0;
    std::vector<double> values;

    double at(int t, int i, int j, int k) const {
        return values[((static_cast<std::size_t>(t) * rows + i) * cols + j) * states + k];
    }
    double& at(int t, int i, int j, int k) {
        return values[((static_cast<std::size_t>(t) * rows + i) * cols + j) * states + k];
    }
};

PredictedFrames make_predicted(int num_slots, int rows, int cols, int states);

/// RMSE and MAPE per state over cell/slot samples with truth >= threshold.
MetricsReport evaluate(const PredictedFrames& preds, const FrameSeries& truths,
                       std::span<const int> truth_slots, double threshold);

/// Historical average: the training mean of the same slot-of-week per
/// cell and state. Buckets that never occur in training fall back to the
/// global training mean of that cell/state.
PredictedFrames baseline_ha(const FrameSeries& train, std::span<const int> target_slots,
                            int slots_per_week);

/// Predicts frame t for target t+1.
PredictedFrames baseline_persistence(const FrameSeries& frames, std::span<const int> target_slots);

}  // namespace pan
