#pragma once

#include "algan/data.hpp"
#include "algan/train.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace algan {

struct DatasetConfig {
    enum class Source { synthetic, file };
    Source source = Source::synthetic;

    SyntheticSpec synthetic; // synthetic source; its seed is the base data seed

    std::filesystem::path path; // file source
    std::optional<std::size_t> label_column;
    FeatureRole role = FeatureRole::split_all;
    std::uint64_t file_seed = 1; // base seed for the file split shuffle

    SplitFractions split;
    std::optional<bool> standardize; // unset: files yes, synthetic no

    bool standardize_effective() const {
        return standardize.value_or(source == Source::file);
    }
};

struct ModelConfig {
    std::size_t latent_dim = 100;
    std::vector<std::size_t> generator_hidden = {32, 32};
    std::vector<std::size_t> discriminator_hidden = {32, 32};
    double leaky_slope = 0.2;
};

struct EvalConfig {
    enum class ThresholdPolicy { youden, none, fixed };
    std::size_t bins = 32;
    ThresholdPolicy policy = ThresholdPolicy::youden;
    double fixed_threshold = 0.0;
};

struct OutputConfig {
    std::filesystem::path dir; // empty: resolved from the output root
    bool overwrite = false;
};

// Whole-experiment description. Every training default matches the reference
// setup, so an empty training section runs the standard recipe.
struct ExperimentConfig {
    DatasetConfig dataset;
    ModelConfig model;
    TrainConfig training; // per-run seed comes from `seeds`, not training.seed
    EvalConfig evaluation;
    OutputConfig output;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    void validate() const;
};

// Strict parse: unknown keys are rejected with their full path, type
// mismatches name the offending field, and module-level invariants are
// checked immediately.
ExperimentConfig parse_experiment_config(const nlohmann::json& root);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

} // namespace algan
