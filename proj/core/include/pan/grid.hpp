#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace pan {

struct TripRecord {
    std::int64_t start_time = 0;  // epoch seconds, UTC
    std::int64_t end_time = 0;
    double start_lat = 0.0, start_lon = 0.0;
    double end_lat = 0.0, end_lon = 0.0;
};

struct GridSpec {
    double lat_min = 0.0, lat_max = 0.0;
    double lon_min = 0.0, lon_max = 0.0;
    int rows = 0;  // I
    int cols = 0;  // J
    std::int64_t slot_seconds = 0;
    std::int64_t origin_time = 0;
    int num_slots = 0;  // T

    void validate() const;
    /// floor((time - origin) / slot_seconds); may fall outside [0, T).
    std::int64_t slot_of_time(std::int64_t time) const;
};

/// Raw count grids for all timeslots, (t, i, j, k) order. Channel 0 counts
/// trip starts, channel 1 trip ends.
struct FrameSeries {
    FrameSeries() = default;
    FrameSeries(int num_slots, int rows, int cols, int states);

    int num_slots = 0;
    int rows = 0;
    int cols = 0;
    int states = 0;
    std::vector<std::uint32_t> counts;

    std::size_t index(int t, int i, int j, int k) const {
        return ((static_cast<std::size_t>(t) * rows + i) * cols + j) * states + k;
    }
    std::uint32_t at(int t, int i, int j, int k) const { return counts[index(t, i, j, k)]; }
    std::uint32_t& at(int t, int i, int j, int k) { return counts[index(t, i, j, k)]; }

    std::span<const std::uint32_t> slot(int t) const {
        const std::size_t block = static_cast<std::size_t>(rows) * cols * states;
        return {counts.data() + static_cast<std::size_t>(t) * block, block};
    }
};

struct IngestReport {
    std::uint64_t records = 0;  // well-formed trip records seen
    std::uint64_t malformed_lines = 0;
    std::uint64_t counted_start = 0;
    std::uint64_t counted_end = 0;
    std::uint64_t dropped_start = 0;  // out-of-bounds cell or out-of-range slot
    std::uint64_t dropped_end = 0;
};

constexpr int kStartChannel = 0;
constexpr int kEndChannel = 1;

/// Count each trip's start and end event into its cell/slot. Events whose
/// coordinate or slot falls outside the grid are dropped and counted in
/// the report; the other event of the same trip is still placed.
std::pair<FrameSeries, IngestReport> rasterize(std::span<const TripRecord> records,
                                               const GridSpec& spec);

/// Applies one record to an existing series (streaming ingest path).
void rasterize_one(const TripRecord& rec, const GridSpec& spec, FrameSeries& frames,
                   IngestReport& report);

/// Min-Max extrema over the training slots only.
struct NormStats {
    double v_min = 0.0;
    double v_max = 0.0;
};

NormStats compute_norm_stats(const FrameSeries& frames, int first_slot, int slot_count);

/// (x - v_min) / (v_max - v_min), clipped to [0, 1] so test-time volumes
/// above the training max stay in range. Degenerate stats map to 0.
double normalize_value(double x, const NormStats& stats);
/// Exact inverse on [v_min, v_max].
double denormalize_value(double y, const NormStats& stats);

/// Frames strictly before `boundary_slot` form the training side.
/// Throws ConfigError when either side would be empty.
std::pair<FrameSeries, FrameSeries> split_frames(const FrameSeries& frames, int boundary_slot);

}  // namespace pan
