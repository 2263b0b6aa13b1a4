#include "pan/metrics.hpp"

#include <cmath>
#include <string>

#include "pan/errors.hpp"

namespace pan {

PredictedFrames make_predicted(int num_slots, int rows, int cols, int states) {
    PredictedFrames p;
    p.num_slots = num_slots;
    p.rows = rows;
    p.cols = cols;
    p.states = states;
    p.values.assign(static_cast<std::size_t>(num_slots) * rows * cols * states, 0.0);
    return p;
}

MetricsReport evaluate(const PredictedFrames& preds, const FrameSeries& truths,
                       std::span<const int> truth_slots, double threshold) {
    if (preds.rows != truths.rows || preds.cols != truths.cols ||
        preds.states != truths.states) {
        throw ConfigError("evaluate: prediction grid does not match truth grid");
    }
    if (static_cast<std::size_t>(preds.num_slots) != truth_slots.size()) {
        throw ConfigError("evaluate: " + std::to_string(preds.num_slots) +
                          " prediction slots vs " + std::to_string(truth_slots.size()) +
                          " truth slots");
    }

    MetricsReport report;
    report.threshold = threshold;
    report.first_target = truth_slots.empty() ? 0 : truth_slots.front();
    report.last_target = truth_slots.empty() ? 0 : truth_slots.back();
    report.per_state.resize(truths.states);

    std::vector<double> sq_sum(truths.states, 0.0);
    std::vector<double> ape_sum(truths.states, 0.0);
    for (int t = 0; t < preds.num_slots; ++t) {
        const int slot = truth_slots[t];
        for (int i = 0; i < truths.rows; ++i) {
            for (int j = 0; j < truths.cols; ++j) {
                for (int k = 0; k < truths.states; ++k) {
                    const double d = static_cast<double>(truths.at(slot, i, j, k));
                    if (d < threshold) {
                        ++report.per_state[k].filtered;
                        continue;
                    }
                    const double p = preds.at(t, i, j, k);
                    sq_sum[k] += (p - d) * (p - d);
                    ape_sum[k] += std::fabs((p - d) / d);
                    ++report.per_state[k].evaluated;
                }
            }
        }
    }
    for (int k = 0; k < truths.states; ++k) {
        StateMetrics& m = report.per_state[k];
        if (m.evaluated > 0) {
            m.rmse = std::sqrt(sq_sum[k] / static_cast<double>(m.evaluated));
            m.mape = ape_sum[k] / static_cast<double>(m.evaluated);
        }
    }
    return report;
}

PredictedFrames baseline_ha(const FrameSeries& train, std::span<const int> target_slots,
                            int slots_per_week) {
    if (slots_per_week < 1) throw ConfigError("baseline_ha: slots_per_week must be >= 1");
    if (train.num_slots < slots_per_week) {
        throw ConfigError("baseline_ha needs at least one full week of training frames (" +
                          std::to_string(slots_per_week) + " slots, got " +
                          std::to_string(train.num_slots) + ")");
    }
    const std::size_t cell_block = static_cast<std::size_t>(train.rows) * train.cols * train.states;

    // Per slot-of-week sums and counts, plus a global fallback mean.
    std::vector<double> bucket_sum(static_cast<std::size_t>(slots_per_week) * cell_block, 0.0);
    std::vector<std::uint32_t> bucket_count(slots_per_week, 0);
    std::vector<double> global_sum(cell_block, 0.0);
    for (int t = 0; t < train.num_slots; ++t) {
        const int bucket = t % slots_per_week;
        ++bucket_count[bucket];
        const auto slot = train.slot(t);
        double* bs = bucket_sum.data() + static_cast<std::size_t>(bucket) * cell_block;
        for (std::size_t k = 0; k < cell_block; ++k) {
            bs[k] += slot[k];
            global_sum[k] += slot[k];
        }
    }

    PredictedFrames out =
        make_predicted(static_cast<int>(target_slots.size()), train.rows, train.cols, train.states);
    for (std::size_t ti = 0; ti < target_slots.size(); ++ti) {
        const int bucket = target_slots[ti] % slots_per_week;
        double* dst = out.values.data() + ti * cell_block;
        if (bucket_count[bucket] > 0) {
            const double* bs = bucket_sum.data() + static_cast<std::size_t>(bucket) * cell_block;
            const double inv = 1.0 / bucket_count[bucket];
            for (std::size_t k = 0; k < cell_block; ++k) dst[k] = bs[k] * inv;
        } else {
            const double inv = 1.0 / train.num_slots;
            for (std::size_t k = 0; k < cell_block; ++k) dst[k] = global_sum[k] * inv;
        }
    }
    return out;
}

PredictedFrames baseline_persistence(const FrameSeries& frames,
                                     std::span<const int> target_slots) {
    PredictedFrames out = make_predicted(static_cast<int>(target_slots.size()), frames.rows,
                                         frames.cols, frames.states);
    const std::size_t cell_block =
        static_cast<std::size_t>(frames.rows) * frames.cols * frames.states;
    for (std::size_t ti = 0; ti < target_slots.size(); ++ti) {
        const int prev = target_slots[ti] - 1;
        if (prev < 0 || prev >= frames.num_slots) {
            throw DataError("baseline_persistence: frame " + std::to_string(prev) +
                            " missing for target " + std::to_string(target_slots[ti]));
        }
        const auto slot = frames.slot(prev);
        double* dst = out.values.data() + ti * cell_block;
        for (std::size_t k = 0; k < cell_block; ++k) dst[k] = static_cast<double>(slot[k]);
    }
    return out;
}

}  // namespace pan
