#pragma once

#include "algan/config.hpp"
#include "algan/train.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace algan {

struct SeedSummary {
    std::uint64_t seed = 0;
    std::size_t best_epoch = 0;
    std::optional<double> best_val_auroc;
    std::optional<double> test_auroc;
    std::optional<double> threshold; // validation Youden or configured fixed value
    std::vector<ValRecord> trace;
};

// Per-seed summaries plus aggregates over every seed with a test AUROC.
// mean uses n entries, std is the n-1 sample deviation (0 for a single seed).
struct MetricsReport {
    std::vector<SeedSummary> per_seed;
    std::optional<double> mean_test_auroc;
    std::optional<double> std_test_auroc;
};

// One ablation cell or one sweep setting, aggregated over seeds.
struct GridRow {
    std::string label;
    std::vector<std::pair<std::string, double>> params;
    std::vector<double> per_seed_test_auroc;
    double mean = 0.0;
    double stddev = 0.0;
};

struct GridReport {
    std::vector<GridRow> rows;
};

struct EvalSummary {
    std::size_t n_samples = 0;
    bool labeled = false;
    bool single_class = false;
    std::optional<double> auroc;
    std::optional<double> threshold;
    std::size_t n_flagged = 0;
    // Labeled data with a threshold only.
    std::optional<std::size_t> tp, fp, tn, fn;
};

// Output directory resolution: an explicit CLI path wins, then the config's
// dir (joined under the root when relative), then <root>/<fallback_name>.
// The root is the output-root environment variable or "runs".
std::filesystem::path resolve_out_dir(const std::optional<std::string>& cli_dir,
                                      const OutputConfig& output, const std::string& fallback);

// Creates the directory; refuses to reuse a non-empty one unless overwrite.
void prepare_out_dir(const std::filesystem::path& dir, bool overwrite);

// Dataset and networks for one experiment seed. The data seed derives from
// the configured base seed and the run seed, so runs are independent draws.
DataSplit build_dataset(const DatasetConfig& ds, std::uint64_t run_seed);
std::pair<Network, Network> build_networks(const ModelConfig& model, std::size_t data_dim,
                                           std::uint64_t run_seed);

struct SeedRun {
    SeedSummary summary;
    RunReport report;
    DataSplit data;
};

// Trains one seed end to end and computes its summary (no files written).
SeedRun execute_seed(const ExperimentConfig& cfg, std::uint64_t seed);

// cmd_train core: trains every seed, writes per-seed artifacts (checkpoint,
// validation metrics stream, test score/histogram exports, split manifest),
// a report stream, and a manifest listing every emitted file.
MetricsReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                             std::ostream& log);

// cmd_ablate core: the 2x2 grid over {anomalous latents on/off (alpha = 1
// turns them off), buffer on/off (xi = 1 turns it off)}.
GridReport run_ablation(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                        std::ostream& log);

// cmd_sweep core: param is one of sigma, alpha, xi, n_z, n_dis.
GridReport run_sweep(const ExperimentConfig& cfg, const std::string& param,
                     const std::vector<double>& values, const std::filesystem::path& out_dir,
                     std::ostream& log);

// cmd_eval core: scores a feature file with a saved checkpoint.
EvalSummary run_eval(const std::filesystem::path& checkpoint_path,
                     const std::filesystem::path& data_path, std::optional<double> threshold,
                     std::optional<std::size_t> label_column, std::size_t bins,
                     const std::filesystem::path& out_dir, std::ostream& log);

} // namespace algan
