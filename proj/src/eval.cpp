#include "algan/eval.hpp"

#include "algan/errors.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace algan {

namespace {

void require_both_classes(const ScoredSet& set, const char* who) {
    if (set.scores.size() != set.labels.size()) {
        throw MetricError(std::string(who) + ": " + std::to_string(set.scores.size()) +
                          " scores vs " + std::to_string(set.labels.size()) + " labels");
    }
    bool has_pos = false, has_neg = false;
    for (int l : set.labels) (l ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) {
        throw MetricError(std::string(who) + ": needs both classes present");
    }
    for (double s : set.scores) {
        if (!std::isfinite(s)) throw MetricError(std::string(who) + ": non-finite score");
    }
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::vector<double> anomaly_scores(const Network& disc, const Tensor& x) {
    Tensor logits = const_cast<Network&>(disc).infer(x);
    if (logits.rank() != 2 || logits.cols() != 1) {
        throw DimensionError("anomaly_scores: discriminator output " + shape_str(logits.shape()) +
                             ", expected a single logit column");
    }
    std::vector<double> scores(logits.rows());
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = -logits.at(i, 0);
    return scores;
}

std::vector<int> classify(const std::vector<double>& scores, double threshold) {
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > threshold ? 1 : 0;
    return out;
}

double auroc(const ScoredSet& set) {
    require_both_classes(set, "auroc");
    const std::size_t n = set.scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return set.scores[a] < set.scores[b]; });

    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && set.scores[order[j]] == set.scores[order[i]]) ++j;
        // midrank of the tie group [i, j), ranks are 1-based
        double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (set.labels[order[k]]) {
                pos_rank_sum += midrank;
                ++n_pos;
            }
        }
        i = j;
    }
    std::size_t n_neg = n - n_pos;
    double u = pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

RocCurve roc_curve(const ScoredSet& set) {
    require_both_classes(set, "roc_curve");
    const std::size_t n = set.scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return set.scores[a] > set.scores[b]; });

    std::size_t total_pos = 0;
    for (int l : set.labels) total_pos += l ? 1 : 0;
    std::size_t total_neg = n - total_pos;

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && set.scores[order[j]] == set.scores[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) {
            (set.labels[order[k]] ? tp : fp) += 1;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(total_neg),
                                static_cast<double>(tp) / static_cast<double>(total_pos)});
        i = j;
    }
    curve.auroc = auroc(set);
    return curve;
}

double youden_threshold(const ScoredSet& set) {
    require_both_classes(set, "youden_threshold");
    const std::size_t n = set.scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return set.scores[a] > set.scores[b]; });

    std::size_t total_pos = 0;
    for (int l : set.labels) total_pos += l ? 1 : 0;
    std::size_t total_neg = n - total_pos;

    // Walk distinct scores from the top; after group g the classifier
    // score > t with t just below the group's score flags groups 0..g.
    double best_j = 0.0; // threshold above everything scores J = 0
    double best_threshold = set.scores[order[0]] + 1.0;
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < n) {
        std::size_t j = i;
        double s = set.scores[order[i]];
        while (j < n && set.scores[order[j]] == s) ++j;
        for (std::size_t k = i; k < j; ++k) {
            (set.labels[order[k]] ? tp : fp) += 1;
        }
        double next_score = j < n ? set.scores[order[j]] : s - 1.0;
        double jstat = static_cast<double>(tp) / static_cast<double>(total_pos) -
                       static_cast<double>(fp) / static_cast<double>(total_neg);
        if (jstat > best_j) {
            best_j = jstat;
            // any t in (next_score, s) flags exactly groups 0..g; take midpoint
            best_threshold = 0.5 * (s + next_score);
        }
        i = j;
    }
    return best_threshold;
}

Histogram histogram(const ScoredSet& set, std::size_t bins) {
    if (bins == 0) throw ConfigError("histogram: bins must be >= 1");
    if (set.scores.empty()) throw MetricError("histogram: empty score set");
    if (set.scores.size() != set.labels.size()) {
        throw MetricError("histogram: scores and labels differ in length");
    }

    auto [lo_it, hi_it] = std::minmax_element(set.scores.begin(), set.scores.end());
    double lo = *lo_it, hi = *hi_it;
    if (lo == hi) { // degenerate range still needs increasing edges
        lo -= 0.5;
        hi += 0.5;
    }

    Histogram h;
    h.edges.resize(bins + 1);
    double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
    h.edges.back() = hi;
    h.count_normal.assign(bins, 0);
    h.count_anomalous.assign(bins, 0);

    for (std::size_t i = 0; i < set.scores.size(); ++i) {
        double pos = (set.scores[i] - lo) / width;
        auto b = static_cast<std::size_t>(std::min(pos, static_cast<double>(bins - 1)));
        if (b >= bins) b = bins - 1;
        (set.labels[i] ? h.count_anomalous : h.count_normal)[b] += 1;
    }
    return h;
}

void write_scores_csv(const std::filesystem::path& path, const ScoredSet& set,
                      const std::vector<std::string>& ids) {
    if (!ids.empty() && ids.size() != set.scores.size()) {
        throw MetricError("write_scores_csv: " + std::to_string(ids.size()) + " ids for " +
                          std::to_string(set.scores.size()) + " scores");
    }
    if (!set.labels.empty() && set.labels.size() != set.scores.size()) {
        throw MetricError("write_scores_csv: labels and scores differ in length");
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "sample_id,score,label\n";
    for (std::size_t i = 0; i < set.scores.size(); ++i) {
        out << (ids.empty() ? std::to_string(i) : ids[i]) << ',' << fmt_double(set.scores[i])
            << ',';
        if (!set.labels.empty()) out << set.labels[i];
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& hist) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "bin_left,bin_right,count_normal,count_anomalous\n";
    for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
        out << fmt_double(hist.edges[b]) << ',' << fmt_double(hist.edges[b + 1]) << ','
            << hist.count_normal[b] << ',' << hist.count_anomalous[b] << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace algan
