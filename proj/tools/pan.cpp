// Command-line front end: ingest trip CSVs into count grids, train the
// predictor, evaluate it against the baselines, and run the ablations.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pan/commands.hpp"
#include "pan/errors.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string scale;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON run configuration")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--scale", args.scale, "preset: desk (small/fast) or paper (published settings)")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--seed", args.seed, "override train.seed");
}

int dispatch(const std::string& name, const CommonArgs& args) {
    const std::optional<std::string> scale =
        args.scale.empty() ? std::nullopt : std::optional<std::string>(args.scale);
    const pan::RunConfig cfg = pan::load_run_config(args.config_path, scale, args.seed);
    std::cout << "run " << cfg.digest_hex() << " (scale " << cfg.scale << ")\n";
    if (name == "ingest") {
        pan::cmd_ingest(cfg, std::cout);
    } else if (name == "train") {
        pan::cmd_train(cfg, std::cout);
    } else if (name == "eval") {
        pan::cmd_eval(cfg, std::cout);
    } else {
        pan::cmd_ablate(cfg, std::cout);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PAN traffic forecaster"};
    app.require_subcommand(1);

    CommonArgs ingest_args, train_args, eval_args, ablate_args;
    add_common(app.add_subcommand("ingest", "rasterize a trip CSV into a frame archive"),
               ingest_args);
    add_common(app.add_subcommand("train", "train the model on the archived frames"), train_args);
    add_common(app.add_subcommand("eval", "evaluate a checkpoint against the baselines"),
               eval_args);
    add_common(app.add_subcommand("ablate", "train and compare full / no_pac / one_pac"),
               ablate_args);

    CLI11_PARSE(app, argc, argv);

    const CommonArgs* args = &ingest_args;
    std::string name = "ingest";
    if (app.got_subcommand("train")) {
        args = &train_args;
        name = "train";
    } else if (app.got_subcommand("eval")) {
        args = &eval_args;
        name = "eval";
    } else if (app.got_subcommand("ablate")) {
        args = &ablate_args;
        name = "ablate";
    }

    try {
        return dispatch(name, *args);
    } catch (const pan::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const pan::DataError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const pan::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const pan::ArtifactMismatch& e) {
        std::cerr << "artifact mismatch: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
