#include "pan/windows.hpp"

#include <algorithm>
#include <string>

#include "pan/errors.hpp"

namespace pan {

void WindowConfig::validate() const {
    if (n_r < 1) throw ConfigError("window n_r must be >= 1");
    if (n_d < 0 || n_w < 0) throw ConfigError("window n_d and n_w must be >= 0");
    if (slots_per_day < 1) throw ConfigError("slots_per_day must be >= 1");
    // A daily/weekly run reaches up to t + n_r - q*L; n_r > L would leak
    // indices beyond t.
    if (n_d > 0 && n_r > slots_per_day) {
        throw ConfigError("n_r must be <= slots_per_day when daily windows are enabled");
    }
    if (n_w > 0 && n_r > slots_per_week()) {
        throw ConfigError("n_r must be <= slots_per_week when weekly windows are enabled");
    }
}

int earliest_valid(const WindowConfig& cfg) {
    cfg.validate();
    const int daily_reach = cfg.n_d > 0 ? cfg.n_d * cfg.slots_per_day : 0;
    const int weekly_reach = cfg.n_w > 0 ? cfg.n_w * cfg.slots_per_week() : 0;
    return cfg.n_r - 1 + std::max(daily_reach, weekly_reach);
}

WindowPlan plan_window(int t, const WindowConfig& cfg) {
    const int min_t = earliest_valid(cfg);
    if (t < min_t) {
        throw ConfigError("timeslot " + std::to_string(t) +
                          " is below the earliest valid slot " + std::to_string(min_t));
    }
    WindowPlan plan;
    plan.target = t + 1;
    plan.indices.reserve(cfg.plan_length());
    for (int r = 0; r < cfg.n_r; ++r) plan.indices.push_back(t - r);
    const auto push_runs = [&](int n, int period) {
        for (int q = 1; q <= n; ++q) {
            const int top = t + cfg.n_r - q * period;
            for (int idx = top; idx >= top - 2 * cfg.n_r + 1; --idx) plan.indices.push_back(idx);
        }
    };
    push_runs(cfg.n_d, cfg.slots_per_day);
    push_runs(cfg.n_w, cfg.slots_per_week());
    return plan;
}

FrameStore::FrameStore(int num_slots, int rows, int cols, int states)
    : num_slots_(num_slots), rows_(rows), cols_(cols), states_(states) {
    data_.assign(static_cast<std::size_t>(num_slots) * rows * cols * states, 0.0);
}

FrameStore FrameStore::from_series(const FrameSeries& frames, const NormStats& stats) {
    FrameStore store(frames.num_slots, frames.rows, frames.cols, frames.states);
    for (std::size_t k = 0; k < frames.counts.size(); ++k) {
        store.data_[k] = normalize_value(static_cast<double>(frames.counts[k]), stats);
    }
    return store;
}

Tensor materialize(const WindowPlan& plan, const FrameStore& store) {
    return materialize_batch(std::span<const WindowPlan>(&plan, 1), store);
}

Tensor materialize_batch(std::span<const WindowPlan> plans, const FrameStore& store) {
    if (plans.empty()) throw ConfigError("materialize_batch: no plans");
    const int rows = store.rows(), cols = store.cols(), states = store.states();
    const int len = static_cast<int>(plans.front().indices.size());
    Tensor out(static_cast<int>(plans.size()), rows, cols, len * states);
    for (std::size_t b = 0; b < plans.size(); ++b) {
        const WindowPlan& plan = plans[b];
        if (static_cast<int>(plan.indices.size()) != len) {
            throw ConfigError("materialize_batch: plans of unequal length");
        }
        for (int p = 0; p < len; ++p) {
            const int slot = plan.indices[p];
            if (slot < 0 || slot >= store.num_slots()) {
                throw DataError("plan for target " + std::to_string(plan.target) +
                                " references missing slot " + std::to_string(slot));
            }
            for (int i = 0; i < rows; ++i) {
                for (int j = 0; j < cols; ++j) {
                    for (int k = 0; k < states; ++k) {
                        out.at(static_cast<int>(b), i, j, p * states + k) = store.at(slot, i, j, k);
                    }
                }
            }
        }
    }
    return out;
}

Tensor gather_slots(std::span<const int> slots, const FrameStore& store) {
    if (slots.empty()) throw ConfigError("gather_slots: no slots");
    Tensor out(static_cast<int>(slots.size()), store.rows(), store.cols(), store.states());
    for (std::size_t b = 0; b < slots.size(); ++b) {
        const int t = slots[b];
        if (t < 0 || t >= store.num_slots()) {
            throw DataError("gather_slots: slot " + std::to_string(t) + " out of range");
        }
        const auto src = store.slot(t);
        std::copy(src.begin(), src.end(),
                  out.data.begin() + static_cast<std::size_t>(b) * src.size());
    }
    return out;
}

}  // namespace pan
