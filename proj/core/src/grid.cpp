#include "pan/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pan/errors.hpp"

namespace pan {

void GridSpec::validate() const {
    if (!(lat_min < lat_max) || !(lon_min < lon_max)) {
        throw ConfigError("grid bounding box is empty or inverted");
    }
    if (rows < 1 || cols < 1) throw ConfigError("grid must have at least one cell");
    if (slot_seconds <= 0) throw ConfigError("slot_seconds must be > 0");
    if (num_slots < 1) throw ConfigError("num_slots must be >= 1");
}

std::int64_t GridSpec::slot_of_time(std::int64_t time) const {
    const std::int64_t delta = time - origin_time;
    // Floor division; timeslot intervals are half-open [t*dt, (t+1)*dt).
    std::int64_t q = delta / slot_seconds;
    if (delta % slot_seconds != 0 && delta < 0) --q;
    return q;
}

FrameSeries::FrameSeries(int num_slots_, int rows_, int cols_, int states_)
    : num_slots(num_slots_), rows(rows_), cols(cols_), states(states_) {
    counts.assign(static_cast<std::size_t>(num_slots) * rows * cols * states, 0);
}

namespace {

// Cell index for one coordinate, or -1 if out of the half-open range.
int cell_index(double coord, double lo, double hi, int cells) {
    const double rel = (coord - lo) / (hi - lo) * cells;
    const double f = std::floor(rel);
    if (f < 0.0 || f >= static_cast<double>(cells)) return -1;
    return static_cast<int>(f);
}

void place_event(std::int64_t time, double lat, double lon, int channel, const GridSpec& spec,
                 FrameSeries& frames, std::uint64_t& counted, std::uint64_t& dropped) {
    const std::int64_t slot = spec.slot_of_time(time);
    const int i = cell_index(lat, spec.lat_min, spec.lat_max, spec.rows);
    const int j = cell_index(lon, spec.lon_min, spec.lon_max, spec.cols);
    if (slot < 0 || slot >= spec.num_slots || i < 0 || j < 0) {
        ++dropped;
        return;
    }
    frames.at(static_cast<int>(slot), i, j, channel) += 1;
    ++counted;
}

}  // namespace

void rasterize_one(const TripRecord& rec, const GridSpec& spec, FrameSeries& frames,
                   IngestReport& report) {
    ++report.records;
    place_event(rec.start_time, rec.start_lat, rec.start_lon, kStartChannel, spec, frames,
                report.counted_start, report.dropped_start);
    place_event(rec.end_time, rec.end_lat, rec.end_lon, kEndChannel, spec, frames,
                report.counted_end, report.dropped_end);
}

std::pair<FrameSeries, IngestReport> rasterize(std::span<const TripRecord> records,
                                               const GridSpec& spec) {
    spec.validate();
    FrameSeries frames(spec.num_slots, spec.rows, spec.cols, 2);
    IngestReport report;
    for (const TripRecord& rec : records) rasterize_one(rec, spec, frames, report);
    return {std::move(frames), report};
}

NormStats compute_norm_stats(const FrameSeries& frames, int first_slot, int slot_count) {
    if (slot_count < 1 || first_slot < 0 || first_slot + slot_count > frames.num_slots) {
        throw ConfigError("norm stats slot range [" + std::to_string(first_slot) + ", " +
                          std::to_string(first_slot + slot_count) + ") outside series of " +
                          std::to_string(frames.num_slots) + " slots");
    }
    const std::size_t block = static_cast<std::size_t>(frames.rows) * frames.cols * frames.states;
    const std::size_t begin = static_cast<std::size_t>(first_slot) * block;
    const std::size_t end = begin + static_cast<std::size_t>(slot_count) * block;
    std::uint32_t lo = frames.counts[begin];
    std::uint32_t hi = frames.counts[begin];
    for (std::size_t k = begin; k < end; ++k) {
        lo = std::min(lo, frames.counts[k]);
        hi = std::max(hi, frames.counts[k]);
    }
    return {static_cast<double>(lo), static_cast<double>(hi)};
}

double normalize_value(double x, const NormStats& stats) {
    if (stats.v_max <= stats.v_min) return 0.0;
    const double y = (x - stats.v_min) / (stats.v_max - stats.v_min);
    return std::clamp(y, 0.0, 1.0);
}

double denormalize_value(double y, const NormStats& stats) {
    return stats.v_min + y * (stats.v_max - stats.v_min);
}

std::pair<FrameSeries, FrameSeries> split_frames(const FrameSeries& frames, int boundary_slot) {
    if (boundary_slot <= 0 || boundary_slot >= frames.num_slots) {
        throw ConfigError("split boundary " + std::to_string(boundary_slot) +
                          " leaves an empty side (series has " +
                          std::to_string(frames.num_slots) + " slots)");
    }
    FrameSeries train(boundary_slot, frames.rows, frames.cols, frames.states);
    FrameSeries test(frames.num_slots - boundary_slot, frames.rows, frames.cols, frames.states);
    const std::size_t block = static_cast<std::size_t>(frames.rows) * frames.cols * frames.states;
    const std::size_t cut = static_cast<std::size_t>(boundary_slot) * block;
    std::copy(frames.counts.begin(), frames.counts.begin() + cut, train.counts.begin());
    std::copy(frames.counts.begin() + cut, frames.counts.end(), test.counts.begin());
    return {std::move(train), std::move(test)};
}

}  // namespace pan
