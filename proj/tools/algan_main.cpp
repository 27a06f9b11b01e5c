// Command-line front end: train / eval / ablate / sweep.
// Exit codes: 0 success, 2 configuration or validation problem, 3 numeric
// failure during training or evaluation.

#include "algan/config.hpp"
#include "algan/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct CommonOpts {
    std::string out_dir;
    bool out_dir_set = false;
    std::vector<std::uint64_t> seeds;
    bool overwrite = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--out-dir", o.out_dir, "output directory (overrides config and env root)");
    cmd->add_option("--seeds", o.seeds, "comma-separated seeds overriding the config")
        ->delimiter(',');
    cmd->add_flag("--overwrite", o.overwrite, "reuse a non-empty output directory");
}

std::optional<std::string> opt_dir(const CLI::App* cmd, const CommonOpts& o) {
    if (cmd->count("--out-dir") > 0) return o.out_dir;
    return std::nullopt;
}

algan::ExperimentConfig load_with_overrides(const std::string& path, const CommonOpts& o) {
    algan::ExperimentConfig cfg = algan::load_experiment_config(path);
    if (!o.seeds.empty()) {
        cfg.seeds = o.seeds;
        cfg.validate();
    }
    if (o.overwrite) cfg.output.overwrite = true;
    return cfg;
}

std::filesystem::path prepare_dir(const CLI::App* cmd, const CommonOpts& o,
                                  const algan::ExperimentConfig& cfg,
                                  const std::string& fallback) {
    const auto dir = algan::resolve_out_dir(opt_dir(cmd, o), cfg.output, fallback);
    algan::prepare_out_dir(dir, cfg.output.overwrite);
    return dir;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"adversarially trained anomaly detector"};
    app.require_subcommand(1);

    std::string train_config, ablate_config, sweep_config;
    std::string ckpt_path, data_path, sweep_param;
    std::vector<double> sweep_values;
    double threshold = 0.0;
    std::size_t label_column = 0;
    std::size_t bins = 32;
    CommonOpts train_o, eval_o, ablate_o, sweep_o;

    CLI::App* train_cmd =
        app.add_subcommand("train", "train over the configured seeds and export artifacts");
    train_cmd->add_option("config", train_config, "experiment config file")->required();
    add_common(train_cmd, train_o);

    CLI::App* eval_cmd = app.add_subcommand("eval", "score a feature file with a checkpoint");
    eval_cmd->add_option("checkpoint", ckpt_path, "checkpoint file")->required();
    eval_cmd->add_option("data", data_path, "feature file to score")->required();
    eval_cmd->add_option("--threshold", threshold, "flag samples whose score exceeds this");
    eval_cmd->add_option("--label-column", label_column,
                         "0-based index of the label column (must be the final column)");
    eval_cmd->add_option("--bins", bins, "histogram bins for labeled data");
    add_common(eval_cmd, eval_o);

    CLI::App* ablate_cmd =
        app.add_subcommand("ablate", "2x2 grid over anomalous latents and the sample buffer");
    ablate_cmd->add_option("config", ablate_config, "experiment config file")->required();
    add_common(ablate_cmd, ablate_o);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep one training hyperparameter");
    sweep_cmd->add_option("config", sweep_config, "experiment config file")->required();
    sweep_cmd->add_option("--param", sweep_param, "one of sigma, alpha, xi, n_z, n_dis")
        ->required()
        ->check(CLI::IsMember({"sigma", "alpha", "xi", "n_z", "n_dis"}));
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
        ->required()
        ->delimiter(',');
    add_common(sweep_cmd, sweep_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad usage is a configuration error
    }

    if (train_cmd->parsed()) {
        const auto cfg = load_with_overrides(train_config, train_o);
        const auto dir = prepare_dir(train_cmd, train_o, cfg,
                                     std::filesystem::path(train_config).stem().string());
        algan::run_experiment(cfg, dir, std::cout);
        std::cout << "artifacts written to " << dir.string() << '\n';
        return 0;
    }
    if (eval_cmd->parsed()) {
        algan::ExperimentConfig defaults; // eval has no config file; env/flags only
        defaults.output.overwrite = eval_o.overwrite;
        const auto dir = prepare_dir(eval_cmd, eval_o, defaults, "eval");
        std::optional<double> thr;
        if (eval_cmd->count("--threshold") > 0) thr = threshold;
        std::optional<std::size_t> label_col;
        if (eval_cmd->count("--label-column") > 0) label_col = label_column;
        algan::run_eval(ckpt_path, data_path, thr, label_col, bins, dir, std::cout);
        std::cout << "artifacts written to " << dir.string() << '\n';
        return 0;
    }
    if (ablate_cmd->parsed()) {
        const auto cfg = load_with_overrides(ablate_config, ablate_o);
        const auto dir = prepare_dir(ablate_cmd, ablate_o, cfg,
                                     std::filesystem::path(ablate_config).stem().string() +
                                         "_ablation");
        algan::run_ablation(cfg, dir, std::cout);
        std::cout << "artifacts written to " << dir.string() << '\n';
        return 0;
    }
    if (sweep_cmd->parsed()) {
        const auto cfg = load_with_overrides(sweep_config, sweep_o);
        const auto dir = prepare_dir(sweep_cmd, sweep_o, cfg,
                                     std::filesystem::path(sweep_config).stem().string() +
                                         "_sweep");
        algan::run_sweep(cfg, sweep_param, sweep_values, dir, std::cout);
        std::cout << "artifacts written to " << dir.string() << '\n';
        return 0;
    }
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const algan::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const algan::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return 2;
    } catch (const algan::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const algan::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return 2;
    } catch (const algan::DimensionError& e) {
        std::cerr << "dimension error: " << e.what() << '\n';
        return 2;
    } catch (const algan::TrainingError& e) {
        std::cerr << "training failure: " << e.what() << '\n';
        return 3;
    } catch (const algan::DomainError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const algan::MetricError& e) {
        std::cerr << "metric failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "unexpected failure: " << e.what() << '\n';
        return 3;
    }
}
