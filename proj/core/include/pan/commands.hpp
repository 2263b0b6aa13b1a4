#pragma once

#include <filesystem>
#include <ostream>

#include "pan/config.hpp"

namespace pan {

/// Output locations for one run; the run directory is named by the
/// config digest so identical configs land in identical places.
struct RunPaths {
    std::filesystem::path run_dir;
    std::filesystem::path archive;
    std::filesystem::path checkpoint;
    std::filesystem::path report;
    std::filesystem::path loss_trace;
    std::filesystem::path ingest_report;
    std::filesystem::path ablate_table;
};

RunPaths resolve_paths(const RunConfig& cfg);

void cmd_ingest(const RunConfig& cfg, std::ostream& log);
void cmd_train(const RunConfig& cfg, std::ostream& log);
void cmd_eval(const RunConfig& cfg, std::ostream& log);
void cmd_ablate(const RunConfig& cfg, std::ostream& log);

}  // namespace pan
