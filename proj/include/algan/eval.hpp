#pragma once

#include "algan/nn.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace algan {

// Per-sample anomaly scores with ground-truth labels (0 normal, 1 anomalous).
// Higher score = more anomalous.
struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points; // (0,0) ... (1,1), both rates nondecreasing
    double auroc = 0.0;
};

struct Histogram {
    std::vector<double> edges; // bins + 1, strictly increasing, covers all scores
    std::vector<std::size_t> count_normal;
    std::vector<std::size_t> count_anomalous;
};

// Scores a batch through the discriminator in eval mode. The score is the
// negated raw pre-sigmoid logit, so confidently-normal samples score low.
std::vector<double> anomaly_scores(const Network& disc, const Tensor& x);

// Anomalous (1) iff score > threshold.
std::vector<int> classify(const std::vector<double>& scores, double threshold);

// Mann-Whitney AUROC via midranks: P(anomalous outranks normal) with exact
// ties half-credited. O(n log n); bitwise-equal to the pairwise definition.
double auroc(const ScoredSet& set);

RocCurve roc_curve(const ScoredSet& set);

// Threshold maximizing Youden's J = TPR - FPR under the `classify` rule.
// Ties resolve to the highest qualifying threshold.
double youden_threshold(const ScoredSet& set);

Histogram histogram(const ScoredSet& set, std::size_t bins);

// sample_id,score,label rows; ids default to the sample index. Empty labels
// leave the column blank (unlabeled export).
void write_scores_csv(const std::filesystem::path& path, const ScoredSet& set,
                      const std::vector<std::string>& ids = {});

// bin_left,bin_right,count_normal,count_anomalous rows.
void write_histogram_csv(const std::filesystem::path& path, const Histogram& hist);

} // namespace algan
