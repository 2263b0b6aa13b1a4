#pragma once

#include <span>
#include <vector>

#include "pan/grid.hpp"
#include "pan/tensor.hpp"

namespace pan {

/// Lookback windows for the recent / daily / weekly input sequences.
struct WindowConfig {
    int n_r = 5;       // recent timeslots
    int n_d = 2;       // recent days
    int n_w = 1;       // recent weeks
    int slots_per_day = 48;
    int slots_per_week() const { return 7 * slots_per_day; }

    void validate() const;
    int plan_length() const { return n_r + 2 * n_r * n_d + 2 * n_r * n_w; }
};

/// Resolved source timeslots for predicting slot target = t + 1. Order is
/// the recent block, then the daily block, then the weekly block; daily
/// and weekly runs go day/week q = 1..n ascending with slot indices
/// descending inside each run.
struct WindowPlan {
    int target = 0;
    std::vector<int> indices;
};

WindowPlan plan_window(int t, const WindowConfig& cfg);

/// Smallest t for which every plan index is >= 0.
int earliest_valid(const WindowConfig& cfg);

/// Normalized frame values as 64-bit floats, (t, i, j, k) order.
class FrameStore {
public:
    FrameStore() = default;
    FrameStore(int num_slots, int rows, int cols, int states);

    static FrameStore from_series(const FrameSeries& frames, const NormStats& stats);

    int num_slots() const { return num_slots_; }
    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int states() const { return states_; }

    double at(int t, int i, int j, int k) const { return data_[index(t, i, j, k)]; }
    double& at(int t, int i, int j, int k) { return data_[index(t, i, j, k)]; }

    std::span<const double> slot(int t) const {
        const std::size_t block = static_cast<std::size_t>(rows_) * cols_ * states_;
        return {data_.data() + static_cast<std::size_t>(t) * block, block};
    }

private:
    std::size_t index(int t, int i, int j, int k) const {
        return ((static_cast<std::size_t>(t) * rows_ + i) * cols_ + j) * states_ + k;
    }
    int num_slots_ = 0, rows_ = 0, cols_ = 0, states_ = 0;
    std::vector<double> data_;
};

/// Gathers the planned slots into a (1, I, J, len(plan)*K) tensor. Channel
/// blocks follow plan order; the K state channels keep their order inside
/// each block.
Tensor materialize(const WindowPlan& plan, const FrameStore& store);

/// Batch variant: (B, I, J, len*K) from one plan per sample.
Tensor materialize_batch(std::span<const WindowPlan> plans, const FrameStore& store);

/// Ground-truth gather: (B, I, J, K) at the given target slots.
Tensor gather_slots(std::span<const int> slots, const FrameStore& store);

}  // namespace pan
