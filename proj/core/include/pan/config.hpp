#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pan/grid.hpp"
#include "pan/model.hpp"
#include "pan/windows.hpp"

namespace pan {

/// Everything a run needs, resolved from preset defaults plus a JSON
/// config file plus CLI flags. The `paper` preset carries the published
/// hyperparameter settings; `desk` shrinks the model and grid for fast
/// runs. Reruns with the same effective config are byte-identical, so the
/// config digest names the run directory.
struct RunConfig {
    std::string scale = "paper";

    GridSpec grid;
    std::string origin_text;  // ISO-8601 form of grid.origin_time

    int n_r = 5, n_d = 2, n_w = 1;
    std::optional<int> slots_per_day;  // default: 86400 / slot_seconds

    int c_f = 256;
    int n_pasti = 10;
    int n0 = 1, n1 = 4, n2 = 4;
    int c0 = 256, c1 = 16, c2 = 16;
    double dropout_rate = 0.5;
    std::string variant = "full";
    bool input_pe = false;

    int epochs = 50;
    int batch_size = 32;
    double lr = 1e-5;
    std::optional<std::uint64_t> seed;

    std::optional<std::string> split_boundary;  // ISO timestamp
    std::optional<int> train_slots;
    double train_days = 40.0;

    double eval_threshold = 10.0;

    std::string trips_csv;
    std::string output_dir = "runs";
    std::optional<std::string> archive_path;
    std::optional<std::string> checkpoint_path;
    std::optional<std::string> report_path;

    WindowConfig window_config() const;
    ModelConfig model_config(int rows, int cols, int states) const;
    /// First test slot; frames strictly before it are the training side.
    int split_slot() const;

    std::string canonical_json() const;
    std::uint64_t digest() const;
    std::string digest_hex() const;
};

RunConfig default_config(const std::string& scale);

RunConfig load_run_config(const std::filesystem::path& file,
                          const std::optional<std::string>& scale_flag,
                          const std::optional<std::uint64_t>& seed_flag);

std::string format_digest(std::uint64_t digest);

}  // namespace pan
