#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <utility>

#include "pan/grid.hpp"

namespace pan {

/// Parses "YYYY-MM-DD[T ]HH:MM:SS[Z]" to epoch seconds (UTC).
std::optional<std::int64_t> parse_iso8601(const std::string& text);

std::optional<TripRecord> parse_trip_line(const std::string& line);

inline constexpr const char* kTripCsvHeader =
    "start_time,end_time,start_lat,start_lon,end_lat,end_lon";

/// Streams a trip CSV into count grids. The header line must match
/// kTripCsvHeader exactly; malformed data lines are skipped and counted,
/// never abort the stream.
std::pair<FrameSeries, IngestReport> ingest_csv(std::istream& in, const GridSpec& spec);

}  // namespace pan
