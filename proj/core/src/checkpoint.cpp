#include "pan/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "pan/errors.hpp"

namespace pan {

namespace {

constexpr char kMagic[8] = {'P', 'A', 'N', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    char b[4];
    for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
    out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xFF);
    out.write(b, 8);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(b[k]) << (8 * k);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    return v;
}

}  // namespace

void save_checkpoint(PanModel& model, std::uint64_t config_digest,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open checkpoint for writing: " + path.string());

    const std::vector<ParamRef> params = model.params();
    out.write(kMagic, sizeof(kMagic));
    put_u64(out, config_digest);
    put_u32(out, static_cast<std::uint32_t>(params.size()));

    std::uint64_t offset = 0;
    for (const ParamRef& p : params) {
        put_u32(out, static_cast<std::uint32_t>(p.name.size()));
        out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
        put_u32(out, static_cast<std::uint32_t>(p.shape.size()));
        for (int d : p.shape) put_u32(out, static_cast<std::uint32_t>(d));
        put_u64(out, offset);
        offset += static_cast<std::uint64_t>(p.value->size()) * 8;
    }
    for (const ParamRef& p : params) {
        for (double v : *p.value) put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
    if (!out) throw DataError("short write to checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path.string());

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw DataError("not a PANCKPT1 checkpoint: " + path.string());
    }
    Checkpoint ckpt;
    ckpt.config_digest = get_u64(in);
    const std::uint32_t count = get_u32(in);
    if (!in) throw DataError("truncated checkpoint header: " + path.string());

    std::vector<std::uint64_t> offsets;
    ckpt.entries.resize(count);
    offsets.resize(count);
    for (std::uint32_t p = 0; p < count; ++p) {
        const std::uint32_t name_len = get_u32(in);
        std::string name(name_len, '\0');
        in.read(name.data(), name_len);
        const std::uint32_t ndims = get_u32(in);
        std::vector<int> shape(ndims);
        for (std::uint32_t d = 0; d < ndims; ++d) shape[d] = static_cast<int>(get_u32(in));
        offsets[p] = get_u64(in);
        if (!in) throw DataError("truncated checkpoint manifest: " + path.string());
        ckpt.entries[p].name = std::move(name);
        ckpt.entries[p].shape = std::move(shape);
    }
    for (std::uint32_t p = 0; p < count; ++p) {
        std::size_t n = 1;
        for (int d : ckpt.entries[p].shape) n *= static_cast<std::size_t>(d);
        if (p > 0 && offsets[p] != offsets[p - 1] + ckpt.entries[p - 1].values.size() * 8) {
            throw DataError("checkpoint manifest offsets are inconsistent: " + path.string());
        }
        ckpt.entries[p].values.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            ckpt.entries[p].values[k] = std::bit_cast<double>(get_u64(in));
        }
        if (!in) throw DataError("truncated checkpoint payload: " + path.string());
    }
    return ckpt;
}

void apply_checkpoint(const Checkpoint& ckpt, PanModel& model) {
    const std::vector<ParamRef> params = model.params();
    if (params.size() != ckpt.entries.size()) {
        throw ArtifactMismatch("checkpoint has " + std::to_string(ckpt.entries.size()) +
                               " parameters, model expects " + std::to_string(params.size()));
    }
    for (std::size_t p = 0; p < params.size(); ++p) {
        const CheckpointEntry& e = ckpt.entries[p];
        if (e.name != params[p].name || e.shape != params[p].shape ||
            e.values.size() != params[p].value->size()) {
            throw ArtifactMismatch("checkpoint parameter \"" + e.name +
                                   "\" does not match model parameter \"" + params[p].name +
                                   "\"");
        }
        *params[p].value = e.values;
    }
}

}  // namespace pan
