#include "pan/frame_io.hpp"

#include <array>
#include <cstring>
#include <fstream>

#include "pan/errors.hpp"

namespace pan {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'N', 'G', 'R', 'I', 'D', '1'};

void put_u32le(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                           static_cast<char>((v >> 16) & 0xFF),
                           static_cast<char>((v >> 24) & 0xFF)};
    out.write(bytes, 4);
}

std::uint32_t get_u32le(std::istream& in) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

}  // namespace

void write_frame_archive(const FrameSeries& frames, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open frame archive for writing: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    put_u32le(out, static_cast<std::uint32_t>(frames.num_slots));
    put_u32le(out, static_cast<std::uint32_t>(frames.rows));
    put_u32le(out, static_cast<std::uint32_t>(frames.cols));
    put_u32le(out, static_cast<std::uint32_t>(frames.states));
    const char reserved[8] = {0};
    out.write(reserved, sizeof(reserved));
    for (std::uint32_t v : frames.counts) put_u32le(out, v);
    if (!out) throw DataError("short write to frame archive: " + path.string());
}

FrameSeries read_frame_archive(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open frame archive: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a PANGRID1 archive: " + path.string());
    }
    const std::uint32_t t = get_u32le(in);
    const std::uint32_t i = get_u32le(in);
    const std::uint32_t j = get_u32le(in);
    const std::uint32_t k = get_u32le(in);
    char reserved[8];
    in.read(reserved, sizeof(reserved));
    if (!in) throw DataError("truncated PANGRID1 header: " + path.string());
    if (t == 0 || i == 0 || j == 0 || k == 0) {
        throw DataError("PANGRID1 header has a zero dimension: " + path.string());
    }
    FrameSeries frames(static_cast<int>(t), static_cast<int>(i), static_cast<int>(j),
                       static_cast<int>(k));
    for (std::uint32_t& v : frames.counts) {
        v = get_u32le(in);
        if (!in) throw DataError("truncated PANGRID1 payload: " + path.string());
    }
    return frames;
}

}  // namespace pan
