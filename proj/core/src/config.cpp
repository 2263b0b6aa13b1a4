#include "pan/config.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pan/errors.hpp"
#include "pan/trips.hpp"

namespace pan {

using nlohmann::json;

RunConfig default_config(const std::string& scale) {
    RunConfig cfg;
    cfg.scale = scale;
    // Bounding box roughly covering the Manhattan core at ~1 km cells.
    cfg.grid.lat_min = 40.70;
    cfg.grid.lat_max = 40.79;
    cfg.grid.lon_min = -74.02;
    cfg.grid.lon_max = -73.78;
    cfg.grid.rows = 10;
    cfg.grid.cols = 20;
    cfg.grid.slot_seconds = 1800;
    cfg.origin_text = "2015-01-01T00:00:00";
    cfg.grid.num_slots = 2880;  // 60 days of 30-minute slots

    if (scale == "paper") {
        return cfg;
    }
    if (scale == "desk") {
        cfg.grid.rows = 4;
        cfg.grid.cols = 4;
        cfg.grid.num_slots = 1344;  // 28 days
        cfg.n_r = 3;
        cfg.n_d = 1;
        cfg.n_w = 0;
        cfg.c_f = 32;
        cfg.n_pasti = 2;
        cfg.n0 = 1;
        cfg.n1 = 2;
        cfg.n2 = 2;
        cfg.c0 = 32;
        cfg.c1 = 8;
        cfg.c2 = 8;
        cfg.epochs = 20;
        cfg.batch_size = 16;
        cfg.lr = 1e-3;
        cfg.train_days = 21.0;
        return cfg;
    }
    throw ConfigError("unknown scale preset \"" + scale + "\" (paper|desk)");
}

WindowConfig RunConfig::window_config() const {
    WindowConfig w;
    w.n_r = n_r;
    w.n_d = n_d;
    w.n_w = n_w;
    if (slots_per_day) {
        w.slots_per_day = *slots_per_day;
    } else {
        if (grid.slot_seconds <= 0 || 86400 % grid.slot_seconds != 0) {
            throw ConfigError("slot_seconds must divide 86400 or slots_per_day must be given");
        }
        w.slots_per_day = static_cast<int>(86400 / grid.slot_seconds);
    }
    w.validate();
    return w;
}

ModelConfig RunConfig::model_config(int rows, int cols, int states) const {
    ModelConfig m;
    m.rows = rows;
    m.cols = cols;
    m.states = states;
    m.input_channels = window_config().plan_length() * states;
    m.c_f = c_f;
    m.n_pasti = n_pasti;
    m.n0 = n0;
    m.n1 = n1;
    m.n2 = n2;
    m.c0 = c0;
    m.c1 = c1;
    m.c2 = c2;
    m.dropout_rate = dropout_rate;
    m.variant = variant_from_string(variant);
    m.input_pe = input_pe;
    m.validate();
    return m;
}

int RunConfig::split_slot() const {
    if (split_boundary) {
        const auto time = parse_iso8601(*split_boundary);
        if (!time) throw ConfigError("split boundary is not an ISO-8601 timestamp");
        const std::int64_t slot = grid.slot_of_time(*time);
        if (slot <= 0 || slot >= grid.num_slots) {
            throw ConfigError("split boundary falls outside the frame range");
        }
        return static_cast<int>(slot);
    }
    if (train_slots) return *train_slots;
    const double slots = train_days * 86400.0 / static_cast<double>(grid.slot_seconds);
    return static_cast<int>(std::llround(slots));
}

namespace {

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
    if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

template <typename T>
void read_optional(const json& obj, const char* key, std::optional<T>& out) {
    if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

void apply_file(RunConfig& cfg, const json& root) {
    if (root.contains("grid")) {
        const json& g = root.at("grid");
        read_field(g, "lat_min", cfg.grid.lat_min);
        read_field(g, "lat_max", cfg.grid.lat_max);
        read_field(g, "lon_min", cfg.grid.lon_min);
        read_field(g, "lon_max", cfg.grid.lon_max);
        read_field(g, "rows", cfg.grid.rows);
        read_field(g, "cols", cfg.grid.cols);
        read_field(g, "slot_seconds", cfg.grid.slot_seconds);
        read_field(g, "num_slots", cfg.grid.num_slots);
        read_field(g, "origin_time", cfg.origin_text);
    }
    if (root.contains("window")) {
        const json& w = root.at("window");
        read_field(w, "n_r", cfg.n_r);
        read_field(w, "n_d", cfg.n_d);
        read_field(w, "n_w", cfg.n_w);
        read_optional(w, "slots_per_day", cfg.slots_per_day);
    }
    if (root.contains("model")) {
        const json& m = root.at("model");
        read_field(m, "c_f", cfg.c_f);
        read_field(m, "n_pasti", cfg.n_pasti);
        read_field(m, "n0", cfg.n0);
        read_field(m, "n1", cfg.n1);
        read_field(m, "n2", cfg.n2);
        read_field(m, "c0", cfg.c0);
        read_field(m, "c1", cfg.c1);
        read_field(m, "c2", cfg.c2);
        read_field(m, "dropout", cfg.dropout_rate);
        read_field(m, "variant", cfg.variant);
        read_field(m, "input_pe", cfg.input_pe);
    }
    if (root.contains("train")) {
        const json& t = root.at("train");
        read_field(t, "epochs", cfg.epochs);
        read_field(t, "batch_size", cfg.batch_size);
        read_field(t, "lr", cfg.lr);
        read_optional(t, "seed", cfg.seed);
    }
    if (root.contains("split")) {
        const json& s = root.at("split");
        read_optional(s, "boundary", cfg.split_boundary);
        read_optional(s, "train_slots", cfg.train_slots);
        read_field(s, "train_days", cfg.train_days);
    }
    if (root.contains("eval")) {
        read_field(root.at("eval"), "threshold", cfg.eval_threshold);
    }
    if (root.contains("paths")) {
        const json& p = root.at("paths");
        read_field(p, "trips_csv", cfg.trips_csv);
        read_field(p, "output_dir", cfg.output_dir);
        read_optional(p, "archive", cfg.archive_path);
        read_optional(p, "checkpoint", cfg.checkpoint_path);
        read_optional(p, "report", cfg.report_path);
    }
}

json opt_str(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string RunConfig::canonical_json() const {
    json root;
    root["scale"] = scale;
    root["grid"] = {{"lat_min", grid.lat_min},   {"lat_max", grid.lat_max},
                    {"lon_min", grid.lon_min},   {"lon_max", grid.lon_max},
                    {"rows", grid.rows},         {"cols", grid.cols},
                    {"slot_seconds", grid.slot_seconds}, {"num_slots", grid.num_slots},
                    {"origin_time", origin_text}};
    root["window"] = {{"n_r", n_r},
                      {"n_d", n_d},
                      {"n_w", n_w},
                      {"slots_per_day", slots_per_day ? json(*slots_per_day) : json(nullptr)}};
    root["model"] = {{"c_f", c_f}, {"n_pasti", n_pasti}, {"n0", n0},   {"n1", n1},
                     {"n2", n2},   {"c0", c0},           {"c1", c1},   {"c2", c2},
                     {"dropout", dropout_rate},          {"variant", variant},
                     {"input_pe", input_pe}};
    root["train"] = {{"epochs", epochs},
                     {"batch_size", batch_size},
                     {"lr", lr},
                     {"seed", seed ? json(*seed) : json(nullptr)}};
    root["split"] = {{"boundary", opt_str(split_boundary)},
                     {"train_slots", train_slots ? json(*train_slots) : json(nullptr)},
                     {"train_days", train_days}};
    root["eval"] = {{"threshold", eval_threshold}};
    root["paths"] = {{"trips_csv", trips_csv},
                     {"output_dir", output_dir},
                     {"archive", opt_str(archive_path)},
                     {"checkpoint", opt_str(checkpoint_path)},
                     {"report", opt_str(report_path)}};
    return root.dump();
}

std::uint64_t RunConfig::digest() const {
    // FNV-1a over the canonical serialization.
    const std::string text = canonical_json();
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001B3ULL;
    }
    return hash;
}

std::string format_digest(std::uint64_t digest) {
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int k = 15; k >= 0; --k) {
        out[k] = hex[digest & 0xF];
        digest >>= 4;
    }
    return out;
}

std::string RunConfig::digest_hex() const { return format_digest(digest()); }

RunConfig load_run_config(const std::filesystem::path& file,
                          const std::optional<std::string>& scale_flag,
                          const std::optional<std::uint64_t>& seed_flag) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file: " + file.string());
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + file.string() + " is not valid JSON: " + e.what());
    }

    std::string scale = "paper";
    if (root.contains("scale") && !root.at("scale").is_null()) {
        scale = root.at("scale").get<std::string>();
    }
    if (scale_flag) scale = *scale_flag;

    RunConfig cfg = default_config(scale);
    try {
        apply_file(cfg, root);
    } catch (const json::exception& e) {
        throw ConfigError("config field has the wrong type: " + std::string(e.what()));
    }
    if (seed_flag) cfg.seed = *seed_flag;
    if (!cfg.seed) {
        throw ConfigError("a seed is mandatory: set train.seed in the config or pass --seed");
    }

    const auto origin = parse_iso8601(cfg.origin_text);
    if (!origin) throw ConfigError("grid.origin_time is not an ISO-8601 timestamp");
    cfg.grid.origin_time = *origin;
    cfg.grid.validate();
    cfg.window_config();  // validates window fields
    return cfg;
}

}  // namespace pan
