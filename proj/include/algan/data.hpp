#pragma once

#include "algan/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace algan {

struct LabeledSet {
    Tensor x;                // [n x d]
    std::vector<int> labels; // 0 normal, 1 anomalous; empty when unlabeled
};

// Train-derived per-feature affine transform (sample std, n-1; zero-variance
// features keep scale 1 so constants pass through unchanged).
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std;
    Tensor apply(const Tensor& x) const;
};

// Original row ids per split, for audit. Synthetic sources number normals
// 0..n_normal-1 and anomalies after them; file sources use data-row order.
struct SplitManifest {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

struct DataSplit {
    Tensor train; // normal-only by construction
    LabeledSet val;
    LabeledSet test;
    std::size_t feature_dim = 0;
    std::optional<Standardizer> standardizer;
    SplitManifest manifest;
};

enum class SyntheticKind {
    gauss2d,        // N(0,I2) normals; anomalies on a noisy ring of `radius`
    gauss_nd,       // N(0,I_d) normals; anomaly sphere radius scales with sqrt(d/2)
    ring_anomaly,   // N(0,I_d) normals; anomaly sphere at absolute `radius`
    two_moons_like, // interleaved half-circles; lower moon is anomalous
    shift_anomaly,  // anomalies are N(offset*1, I_d)
    perturb_anomaly // anomalies are normals with a shifted coordinate block
};

struct SyntheticSpec {
    SyntheticKind kind = SyntheticKind::gauss2d;
    std::size_t n_normal = 1000;
    std::size_t n_anomalous = 200;
    std::size_t dim = 2;
    double radius = 4.0;        // ring kinds
    double radial_noise = 0.1;  // ring kinds; clamped to +-3 sigma
    double offset = 1.0;        // shift_anomaly
    double patch_fraction = 0.25; // perturb_anomaly; 0 draws U(0.2,0.3) per sample
    double magnitude = 4.0;       // perturb_anomaly
    double moon_noise = 0.1;      // two_moons_like
    std::uint64_t seed = 1;
};

struct SplitFractions {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

// Deterministic given (spec, fractions): normals split per `fractions`,
// anomalies half to val, half to test. Optional train-fit standardization.
DataSplit generate(const SyntheticSpec& spec, const SplitFractions& fractions = {},
                   bool standardize = false);

// Copies `normal` rows and shifts one contiguous block of round(fraction*d)
// coordinates (at least 1) by `magnitude` at a random position per row.
Tensor gen_perturb_anomalies(const Tensor& normal, double patch_fraction, double magnitude,
                             std::mt19937_64& rng);

// Comma-separated numeric rows, optional single header line, optional integer
// label column (must be the final column). Unlabeled rows get no labels.
LabeledSet load_feature_file(const std::filesystem::path& path,
                             std::optional<std::size_t> label_column);

enum class FeatureRole {
    split_all, // labeled rows are split like synthetic data
    train_only // every row must be normal; all go to train, val/test stay empty
};

DataSplit load_features(const std::filesystem::path& path,
                        std::optional<std::size_t> label_column, FeatureRole role,
                        const SplitFractions& fractions, std::uint64_t seed,
                        bool standardize = true);

// Splits an in-memory labeled set: normals shuffled then cut per fractions,
// anomalies shuffled then halved into val/test.
DataSplit split_labeled(const LabeledSet& data, const SplitFractions& fractions,
                        std::uint64_t seed, bool standardize);

// row,split rows for audit.
void write_split_manifest(const std::filesystem::path& path, const SplitManifest& manifest);

} // namespace algan
