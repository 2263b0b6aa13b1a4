#pragma once

#include <filesystem>

#include "pan/grid.hpp"

namespace pan {

/// PANGRID1 archive: 32-byte header (8-byte magic "PANGRID1", then T, I,
/// J, K as little-endian u32, then 8 reserved zero bytes) followed by the
/// counts as little-endian u32 in (t, i, j, k) order.
void write_frame_archive(const FrameSeries& frames, const std::filesystem::path& path);
FrameSeries read_frame_archive(const std::filesystem::path& path);

}  // namespace pan
