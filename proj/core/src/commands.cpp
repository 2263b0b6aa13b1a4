#include "pan/commands.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "pan/checkpoint.hpp"
#include "pan/errors.hpp"
#include "pan/frame_io.hpp"
#include "pan/metrics.hpp"
#include "pan/train.hpp"
#include "pan/trips.hpp"

namespace pan {

using nlohmann::json;

namespace {

std::filesystem::path ablate_trace_path(const RunPaths& paths, const std::string& variant) {
    return paths.run_dir / ("ablate_loss_" + variant + ".csv");
}

std::string state_name(int k, int states) {
    if (states == 2) return k == 0 ? "start" : "end";
    return "state" + std::to_string(k);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path.string());
    out << text;
    if (!out) throw DataError("short write to " + path.string());
}

std::string trace_csv(const TrainTrace& trace) {
    std::string text = "epoch,mean_loss\n";
    for (std::size_t e = 0; e < trace.epoch_mean_loss.size(); ++e) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", e, trace.epoch_mean_loss[e]);
        text += buf;
    }
    return text;
}

json metrics_rows(const MetricsReport& report) {
    json rows = json::array();
    for (std::size_t k = 0; k < report.per_state.size(); ++k) {
        const StateMetrics& m = report.per_state[k];
        rows.push_back({{"state", state_name(static_cast<int>(k),
                                             static_cast<int>(report.per_state.size()))},
                        {"rmse", m.rmse ? json(*m.rmse) : json(nullptr)},
                        {"mape", m.mape ? json(*m.mape) : json(nullptr)},
                        {"evaluated", m.evaluated},
                        {"filtered", m.filtered}});
    }
    return rows;
}

struct LoadedData {
    FrameSeries frames;
    int boundary = 0;
    NormStats stats;
    FrameStore store;
    WindowConfig wcfg;
};

LoadedData load_data(const RunConfig& cfg, const RunPaths& paths) {
    LoadedData d;
    if (!std::filesystem::exists(paths.archive)) {
        throw DataError("frame archive not found: " + paths.archive.string() +
                        " (run `pan ingest` first)");
    }
    d.frames = read_frame_archive(paths.archive);
    d.boundary = cfg.split_slot();
    if (d.boundary <= 0 || d.boundary >= d.frames.num_slots) {
        throw ConfigError("split boundary " + std::to_string(d.boundary) +
                          " leaves an empty train or test side");
    }
    d.stats = compute_norm_stats(d.frames, 0, d.boundary);
    d.store = FrameStore::from_series(d.frames, d.stats);
    d.wcfg = cfg.window_config();
    return d;
}

PredictedFrames denormalized_predictions(const Tensor& preds, const NormStats& stats) {
    PredictedFrames out = make_predicted(preds.n(), preds.h(), preds.w(), preds.c());
    for (std::size_t k = 0; k < preds.data.size(); ++k) {
        out.values[k] = denormalize_value(preds.data[k], stats);
    }
    return out;
}

struct VariantResult {
    TrainTrace trace;
    MetricsReport report;
};

VariantResult train_and_eval_variant(const RunConfig& cfg, const LoadedData& d, Variant kind) {
    const ModelConfig mcfg =
        cfg.model_config(d.frames.rows, d.frames.cols, d.frames.states);
    RngStream master(*cfg.seed);
    RngStream init_rng = master.fork(1);
    RngStream train_rng = master.fork(2);
    PanModel model = build_variant(kind, mcfg, init_rng);

    const std::vector<int> train_targets = valid_targets(d.wcfg, 1, d.boundary);
    if (train_targets.empty()) {
        throw ConfigError("no valid training targets: the training split is shorter than the "
                          "window lookback");
    }
    TrainConfig tcfg{cfg.epochs, cfg.batch_size, cfg.lr, *cfg.seed};
    VariantResult result;
    result.trace = train_model(model, d.store, d.wcfg, train_targets, tcfg, train_rng);

    const std::vector<int> test_targets =
        valid_targets(d.wcfg, d.boundary, d.frames.num_slots);
    if (test_targets.empty()) throw ConfigError("no valid test targets after the split");
    const Tensor preds =
        predict_targets(model, d.store, d.wcfg, test_targets, cfg.batch_size);
    const PredictedFrames raw = denormalized_predictions(preds, d.stats);
    result.report = evaluate(raw, d.frames, test_targets, cfg.eval_threshold);
    return result;
}

}  // namespace

RunPaths resolve_paths(const RunConfig& cfg) {
    RunPaths paths;
    paths.run_dir = std::filesystem::path(cfg.output_dir) / cfg.digest_hex();
    paths.archive = cfg.archive_path ? std::filesystem::path(*cfg.archive_path)
                                     : paths.run_dir / "frames.pangrid";
    paths.checkpoint = cfg.checkpoint_path ? std::filesystem::path(*cfg.checkpoint_path)
                                           : paths.run_dir / "model.panckpt";
    paths.report = cfg.report_path ? std::filesystem::path(*cfg.report_path)
                                   : paths.run_dir / "report.json";
    paths.loss_trace = paths.run_dir / "loss_trace.csv";
    paths.ingest_report = paths.run_dir / "ingest_report.json";
    paths.ablate_table = paths.run_dir / "ablate.csv";
    return paths;
}

void cmd_ingest(const RunConfig& cfg, std::ostream& log) {
    const RunPaths paths = resolve_paths(cfg);
    if (cfg.trips_csv.empty()) throw ConfigError("paths.trips_csv is not set");
    std::ifstream in(cfg.trips_csv, std::ios::binary);
    if (!in) throw DataError("cannot open trips CSV: " + cfg.trips_csv);

    auto [frames, report] = ingest_csv(in, cfg.grid);
    std::filesystem::create_directories(paths.run_dir);
    write_frame_archive(frames, paths.archive);

    json j = {{"config_digest", cfg.digest_hex()},
              {"records", report.records},
              {"malformed_lines", report.malformed_lines},
              {"counted_start", report.counted_start},
              {"counted_end", report.counted_end},
              {"dropped_start", report.dropped_start},
              {"dropped_end", report.dropped_end}};
    write_text(paths.ingest_report, j.dump(2) + "\n");

    log << "ingested " << report.records << " trips (" << report.malformed_lines
        << " malformed lines skipped)\n"
        << "  start events: " << report.counted_start << " counted, " << report.dropped_start
        << " dropped\n"
        << "  end events:   " << report.counted_end << " counted, " << report.dropped_end
        << " dropped\n"
        << "archive: " << paths.archive.string() << "\n";
}

void cmd_train(const RunConfig& cfg, std::ostream& log) {
    const RunPaths paths = resolve_paths(cfg);
    const LoadedData d = load_data(cfg, paths);
    const ModelConfig mcfg = cfg.model_config(d.frames.rows, d.frames.cols, d.frames.states);

    RngStream master(*cfg.seed);
    RngStream init_rng = master.fork(1);
    RngStream train_rng = master.fork(2);
    PanModel model(mcfg, init_rng);

    const std::vector<int> targets = valid_targets(d.wcfg, 1, d.boundary);
    if (targets.empty() && cfg.epochs > 0) {
        throw ConfigError("no valid training targets: the training split is shorter than the "
                          "window lookback");
    }
    TrainConfig tcfg{cfg.epochs, cfg.batch_size, cfg.lr, *cfg.seed};
    TrainTrace trace;
    if (cfg.epochs > 0) trace = train_model(model, d.store, d.wcfg, targets, tcfg, train_rng);

    std::filesystem::create_directories(paths.run_dir);
    save_checkpoint(model, cfg.digest(), paths.checkpoint);
    write_text(paths.loss_trace, trace_csv(trace));

    log << "trained " << variant_name(mcfg.variant) << " variant for " << cfg.epochs
        << " epochs over " << targets.size() << " targets\n";
    if (!trace.epoch_mean_loss.empty()) {
        log << "  first epoch loss " << trace.epoch_mean_loss.front() << ", last "
            << trace.epoch_mean_loss.back() << "\n";
    }
    log << "checkpoint: " << paths.checkpoint.string() << "\n";
}

void cmd_eval(const RunConfig& cfg, std::ostream& log) {
    const RunPaths paths = resolve_paths(cfg);
    const LoadedData d = load_data(cfg, paths);
    if (!std::filesystem::exists(paths.checkpoint)) {
        throw DataError("checkpoint not found: " + paths.checkpoint.string() +
                        " (run `pan train` first)");
    }
    const Checkpoint ckpt = load_checkpoint(paths.checkpoint);
    if (ckpt.config_digest != cfg.digest()) {
        throw ArtifactMismatch("checkpoint was trained with config digest " +
                               format_digest(ckpt.config_digest) + " but this config digests to " +
                               cfg.digest_hex());
    }
    const ModelConfig mcfg = cfg.model_config(d.frames.rows, d.frames.cols, d.frames.states);
    RngStream master(*cfg.seed);
    RngStream init_rng = master.fork(1);
    PanModel model(mcfg, init_rng);
    apply_checkpoint(ckpt, model);

    const std::vector<int> targets = valid_targets(d.wcfg, d.boundary, d.frames.num_slots);
    if (targets.empty()) throw ConfigError("no valid test targets after the split");

    const Tensor preds = predict_targets(model, d.store, d.wcfg, targets, cfg.batch_size);
    const PredictedFrames raw = denormalized_predictions(preds, d.stats);
    const MetricsReport pan_report = evaluate(raw, d.frames, targets, cfg.eval_threshold);

    const auto [train_frames, test_frames] = split_frames(d.frames, d.boundary);
    const PredictedFrames ha = baseline_ha(train_frames, targets, d.wcfg.slots_per_week());
    const MetricsReport ha_report = evaluate(ha, d.frames, targets, cfg.eval_threshold);
    const PredictedFrames pers = baseline_persistence(d.frames, targets);
    const MetricsReport pers_report = evaluate(pers, d.frames, targets, cfg.eval_threshold);

    json j = {{"config_digest", cfg.digest_hex()},
              {"split_slot", d.boundary},
              {"first_target", targets.front()},
              {"last_target", targets.back()},
              {"threshold", cfg.eval_threshold},
              {"norm_min", d.stats.v_min},
              {"norm_max", d.stats.v_max},
              {"pan", metrics_rows(pan_report)},
              {"ha", metrics_rows(ha_report)},
              {"persistence", metrics_rows(pers_report)}};
    std::filesystem::create_directories(paths.run_dir);
    write_text(paths.report, j.dump(2) + "\n");

    const auto show = [&](const char* name, const MetricsReport& r) {
        log << name << ":";
        for (std::size_t k = 0; k < r.per_state.size(); ++k) {
            const StateMetrics& m = r.per_state[k];
            log << "  " << state_name(static_cast<int>(k),
                                      static_cast<int>(r.per_state.size()))
                << " rmse=" << (m.rmse ? std::to_string(*m.rmse) : "undefined")
                << " mape=" << (m.mape ? std::to_string(*m.mape) : "undefined");
        }
        log << "\n";
    };
    show("pan", pan_report);
    show("ha", ha_report);
    show("persistence", pers_report);
    log << "report: " << paths.report.string() << "\n";
}

void cmd_ablate(const RunConfig& cfg, std::ostream& log) {
    const RunPaths paths = resolve_paths(cfg);
    const LoadedData d = load_data(cfg, paths);
    std::filesystem::create_directories(paths.run_dir);

    std::string table = "variant,state,rmse,mape\n";
    for (const Variant kind : {Variant::Full, Variant::NoPac, Variant::OnePac}) {
        const std::string name = variant_name(kind);
        log << "training variant " << name << "...\n";
        const VariantResult res = train_and_eval_variant(cfg, d, kind);
        write_text(ablate_trace_path(paths, name), trace_csv(res.trace));
        for (std::size_t k = 0; k < res.report.per_state.size(); ++k) {
            const StateMetrics& m = res.report.per_state[k];
            char buf[160];
            std::snprintf(buf, sizeof(buf), "%s,%s,%.17g,%.17g\n", name.c_str(),
                          state_name(static_cast<int>(k),
                                     static_cast<int>(res.report.per_state.size()))
                              .c_str(),
                          m.rmse ? *m.rmse : std::nan(""), m.mape ? *m.mape : std::nan(""));
            table += buf;
        }
    }
    write_text(paths.ablate_table, table);
    log << "ablation table: " << paths.ablate_table.string() << "\n";
}

}  // namespace pan
