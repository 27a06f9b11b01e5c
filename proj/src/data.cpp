#include "algan/data.hpp"

#include "algan/errors.hpp"
#include "algan/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace algan {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamped_gauss(std::mt19937_64& rng, double stddev, double bound) {
    std::normal_distribution<double> dist(0.0, stddev);
    return std::clamp(dist(rng), -bound, bound);
}

// Uniform direction on the unit sphere in d dimensions.
std::vector<double> random_direction(std::mt19937_64& rng, std::size_t d) {
    std::vector<double> v(d);
    double norm = 0.0;
    do {
        fill_gaussian(v, rng);
        norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (double& x : v) x /= norm;
    return v;
}

Tensor gaussian_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d) {
    Tensor t = Tensor::zeros({n, d});
    fill_gaussian(t.mutable_data(), rng);
    return t;
}

Tensor ring_samples(std::mt19937_64& rng, std::size_t n, std::size_t d, double radius,
                    double radial_noise) {
    Tensor t = Tensor::zeros({n, d});
    auto out = t.mutable_data();
    for (std::size_t i = 0; i < n; ++i) {
        auto dir = random_direction(rng, d);
        double r = radius + clamped_gauss(rng, radial_noise, 3.0 * radial_noise);
        for (std::size_t j = 0; j < d; ++j) out[i * d + j] = r * dir[j];
    }
    return t;
}

Tensor rows_subset(const Tensor& x, const std::vector<std::size_t>& idx) {
    std::size_t d = x.cols();
    std::vector<double> out;
    out.reserve(idx.size() * d);
    for (std::size_t i : idx) {
        auto row = x.data().subspan(i * d, d);
        out.insert(out.end(), row.begin(), row.end());
    }
    return Tensor::from_data({idx.size(), d}, std::move(out));
}

Standardizer fit_standardizer(const Tensor& train) {
    std::size_t n = train.rows(), d = train.cols();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.std.assign(d, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) s.mean[j] += train.at(i, j);
    }
    for (double& m : s.mean) m /= static_cast<double>(n);
    if (n > 1) {
        std::vector<double> acc(d, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                double c = train.at(i, j) - s.mean[j];
                acc[j] += c * c;
            }
        }
        for (std::size_t j = 0; j < d; ++j) {
            double v = acc[j] / static_cast<double>(n - 1);
            s.std[j] = v > 0.0 ? std::sqrt(v) : 1.0; // constant features pass through
        }
    }
    return s;
}

void apply_standardizer_inplace(DataSplit& split) {
    const Standardizer& s = *split.standardizer;
    split.train = s.apply(split.train);
    if (split.val.x.defined() && split.val.x.size() > 0) split.val.x = s.apply(split.val.x);
    if (split.test.x.defined() && split.test.x.size() > 0) split.test.x = s.apply(split.test.x);
}

void check_fractions(const SplitFractions& f) {
    if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
        throw ConfigError("split fractions must sum to 1, got " + std::to_string(f.train) + "+" +
                          std::to_string(f.val) + "+" + std::to_string(f.test));
    }
    if (f.train <= 0.0 || f.val < 0.0 || f.test < 0.0) {
        throw ConfigError("split fractions must be nonnegative with train > 0");
    }
}

// Shared splitter over explicit normal/anomalous matrices. Row ids for the
// manifest: normals keep their position, anomalies follow after all normals.
DataSplit assemble_split(const Tensor& normal, const Tensor& anomalous,
                         const SplitFractions& fractions, std::uint64_t seed,
                         bool standardize) {
    check_fractions(fractions);
    std::size_t n = normal.rows();
    std::size_t n_train = static_cast<std::size_t>(std::llround(fractions.train * n));
    std::size_t n_val = static_cast<std::size_t>(std::llround(fractions.val * n));
    if (n_train + n_val > n) {
        throw ConfigError("split fractions leave no room for a test split");
    }
    std::size_t n_test = n - n_train - n_val;
    if (n_train == 0 || (fractions.val > 0.0 && n_val == 0) ||
        (fractions.test > 0.0 && n_test == 0)) {
        throw ConfigError("a split would receive zero normal samples (n=" + std::to_string(n) +
                          ")");
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> norm_idx(n);
    std::iota(norm_idx.begin(), norm_idx.end(), 0);
    shuffle_vec(norm_idx, rng);

    std::size_t n_anom = anomalous.defined() ? anomalous.rows() : 0;
    std::vector<std::size_t> anom_idx(n_anom);
    std::iota(anom_idx.begin(), anom_idx.end(), 0);
    shuffle_vec(anom_idx, rng);
    std::size_t n_anom_val = n_anom / 2;

    DataSplit split;
    split.feature_dim = normal.cols();

    std::vector<std::size_t> tr(norm_idx.begin(), norm_idx.begin() + n_train);
    std::vector<std::size_t> va(norm_idx.begin() + n_train, norm_idx.begin() + n_train + n_val);
    std::vector<std::size_t> te(norm_idx.begin() + n_train + n_val, norm_idx.end());

    split.train = rows_subset(normal, tr);
    split.manifest.train = tr;

    auto build_labeled = [&](const std::vector<std::size_t>& normals,
                             const std::vector<std::size_t>& anoms,
                             std::vector<std::size_t>& manifest_out) {
        LabeledSet set;
        std::vector<double> rows;
        std::size_t d = normal.cols();
        rows.reserve((normals.size() + anoms.size()) * d);
        for (std::size_t i : normals) {
            auto r = normal.data().subspan(i * d, d);
            rows.insert(rows.end(), r.begin(), r.end());
            set.labels.push_back(0);
            manifest_out.push_back(i);
        }
        for (std::size_t i : anoms) {
            auto r = anomalous.data().subspan(i * d, d);
            rows.insert(rows.end(), r.begin(), r.end());
            set.labels.push_back(1);
            manifest_out.push_back(n + i);
        }
        set.x = Tensor::from_data({set.labels.size(), d}, std::move(rows));
        return set;
    };

    std::vector<std::size_t> anom_val(anom_idx.begin(), anom_idx.begin() + n_anom_val);
    std::vector<std::size_t> anom_test(anom_idx.begin() + n_anom_val, anom_idx.end());
    split.val = build_labeled(va, anom_val, split.manifest.val);
    split.test = build_labeled(te, anom_test, split.manifest.test);

    if (standardize) {
        split.standardizer = fit_standardizer(split.train);
        apply_standardizer_inplace(split);
    }
    return split;
}

} // namespace

Tensor Standardizer::apply(const Tensor& x) const {
    std::size_t n = x.rows(), d = x.cols();
    if (d != mean.size()) {
        throw DimensionError("standardizer fit on " + std::to_string(mean.size()) +
                             " features, input has " + std::to_string(d));
    }
    std::vector<double> out(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            out[i * d + j] = (x.at(i, j) - mean[j]) / std[j];
        }
    }
    return Tensor::from_data({n, d}, std::move(out));
}

Tensor gen_perturb_anomalies(const Tensor& normal, double patch_fraction, double magnitude,
                             std::mt19937_64& rng) {
    if (patch_fraction <= 0.0 || patch_fraction >= 1.0) {
        throw ConfigError("patch_fraction must lie in (0,1), got " +
                          std::to_string(patch_fraction));
    }
    std::size_t n = normal.rows(), d = normal.cols();
    auto len = static_cast<std::size_t>(std::llround(patch_fraction * static_cast<double>(d)));
    len = std::clamp<std::size_t>(len, 1, d);

    Tensor out = normal.clone();
    auto v = out.mutable_data();
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t start = uniform_index(rng, d - len + 1);
        for (std::size_t j = start; j < start + len; ++j) v[i * d + j] += magnitude;
    }
    return out;
}

DataSplit generate(const SyntheticSpec& spec, const SplitFractions& fractions,
                   bool standardize) {
    if (spec.n_normal == 0) throw ConfigError("n_normal must be positive");
    if (spec.n_anomalous < 2) {
        throw ConfigError("n_anomalous must be >= 2 so val and test both receive anomalies");
    }
    std::size_t d = spec.dim;
    if (spec.kind == SyntheticKind::gauss2d || spec.kind == SyntheticKind::two_moons_like) {
        d = 2;
    }
    if (d == 0) throw ConfigError("dim must be positive");

    std::mt19937_64 rng(spec.seed);
    Tensor normal, anomalous;

    switch (spec.kind) {
    case SyntheticKind::gauss2d:
        normal = gaussian_matrix(rng, spec.n_normal, 2);
        anomalous = ring_samples(rng, spec.n_anomalous, 2, spec.radius, spec.radial_noise);
        break;
    case SyntheticKind::gauss_nd: {
        normal = gaussian_matrix(rng, spec.n_normal, d);
        double r = spec.radius * std::sqrt(static_cast<double>(d) / 2.0);
        anomalous = ring_samples(rng, spec.n_anomalous, d, r, spec.radial_noise);
        break;
    }
    case SyntheticKind::ring_anomaly:
        normal = gaussian_matrix(rng, spec.n_normal, d);
        anomalous = ring_samples(rng, spec.n_anomalous, d, spec.radius, spec.radial_noise);
        break;
    case SyntheticKind::two_moons_like: {
        normal = Tensor::zeros({spec.n_normal, 2});
        anomalous = Tensor::zeros({spec.n_anomalous, 2});
        auto nd = normal.mutable_data();
        std::uniform_real_distribution<double> angle(0.0, kPi);
        std::normal_distribution<double> noise(0.0, spec.moon_noise);
        for (std::size_t i = 0; i < spec.n_normal; ++i) {
            double t = angle(rng);
            nd[i * 2] = std::cos(t) + noise(rng);
            nd[i * 2 + 1] = std::sin(t) + noise(rng);
        }
        auto ad = anomalous.mutable_data();
        for (std::size_t i = 0; i < spec.n_anomalous; ++i) {
            double t = angle(rng);
            ad[i * 2] = 1.0 - std::cos(t) + noise(rng);
            ad[i * 2 + 1] = 0.5 - std::sin(t) + noise(rng);
        }
        break;
    }
    case SyntheticKind::shift_anomaly: {
        normal = gaussian_matrix(rng, spec.n_normal, d);
        anomalous = gaussian_matrix(rng, spec.n_anomalous, d);
        auto ad = anomalous.mutable_data();
        for (double& v : ad) v += spec.offset;
        break;
    }
    case SyntheticKind::perturb_anomaly: {
        normal = gaussian_matrix(rng, spec.n_normal, d);
        Tensor base = gaussian_matrix(rng, spec.n_anomalous, d);
        if (spec.patch_fraction > 0.0) {
            anomalous = gen_perturb_anomalies(base, spec.patch_fraction, spec.magnitude, rng);
        } else {
            // per-sample patch area in the 20..30% band
            std::uniform_real_distribution<double> frac(0.2, 0.3);
            anomalous = base.clone();
            auto v = anomalous.mutable_data();
            for (std::size_t i = 0; i < spec.n_anomalous; ++i) {
                auto len = static_cast<std::size_t>(
                    std::llround(frac(rng) * static_cast<double>(d)));
                len = std::clamp<std::size_t>(len, 1, d);
                std::size_t start = uniform_index(rng, d - len + 1);
                for (std::size_t j = start; j < start + len; ++j) {
                    v[i * d + j] += spec.magnitude;
                }
            }
        }
        break;
    }
    }

    std::uint64_t split_seed = derive_seed(spec.seed, 1);
    return assemble_split(normal, anomalous, fractions, split_seed, standardize);
}

namespace {

bool parse_cell(std::string_view cell, double& out) {
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
    if (cell.empty()) return false;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return ec == std::errc{} && ptr == cell.data() + cell.size();
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

} // namespace

LabeledSet load_feature_file(const std::filesystem::path& path,
                             std::optional<std::size_t> label_column) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string content = buffer.str();

    for (unsigned char c : content) {
        if (c == 0 || c > 127) {
            throw ParseError(path.string() + ": binary content, expected delimited text");
        }
    }

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t arity = 0, feature_dim = 0, data_rows = 0;
    bool saw_first = false;

    std::size_t line_no = 0, pos = 0;
    while (pos <= content.size()) {
        std::size_t eol = content.find('\n', pos);
        std::string_view line(content.data() + pos,
                              (eol == std::string::npos ? content.size() : eol) - pos);
        pos = eol == std::string::npos ? content.size() + 1 : eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        auto cells = split_line(line);
        std::vector<double> row(cells.size());
        bool numeric = true;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (!parse_cell(cells[c], row[c])) {
                numeric = false;
                if (saw_first || data_rows > 0) {
                    throw ParseError(path.string() + ": line " + std::to_string(line_no) +
                                     ": cell '" + std::string(cells[c]) + "' is not numeric");
                }
                break;
            }
        }
        if (!numeric) { // non-numeric first line is a header
            arity = cells.size();
            saw_first = true;
            continue;
        }
        if (!saw_first && data_rows == 0) {
            if (arity == 0) arity = cells.size();
        }
        if (cells.size() != arity) {
            throw ParseError(path.string() + ": line " + std::to_string(line_no) + ": expected " +
                             std::to_string(arity) + " columns, got " +
                             std::to_string(cells.size()));
        }
        saw_first = true;

        if (label_column) {
            if (*label_column + 1 != arity) {
                throw ConfigError("label column must be the final column (" +
                                  std::to_string(arity - 1) + "), got " +
                                  std::to_string(*label_column));
            }
            double lab = row[*label_column];
            if (lab != 0.0 && lab != 1.0) {
                throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                                      ": label must be 0 or 1, got " + std::to_string(lab));
            }
            labels.push_back(static_cast<int>(lab));
            row.pop_back();
        }
        feature_dim = row.size();
        values.insert(values.end(), row.begin(), row.end());
        ++data_rows;
    }

    if (data_rows == 0) throw ParseError(path.string() + ": no data rows");
    if (feature_dim == 0) throw ParseError(path.string() + ": rows contain no feature columns");

    LabeledSet set;
    set.x = Tensor::from_data({data_rows, feature_dim}, std::move(values));
    set.labels = std::move(labels);
    return set;
}

DataSplit split_labeled(const LabeledSet& data, const SplitFractions& fractions,
                        std::uint64_t seed, bool standardize) {
    std::size_t n = data.x.rows(), d = data.x.cols();
    if (!data.labels.empty() && data.labels.size() != n) {
        throw ValidationError("labels and rows differ in length");
    }

    std::vector<std::size_t> normal_rows, anom_rows;
    for (std::size_t i = 0; i < n; ++i) {
        if (!data.labels.empty() && data.labels[i] == 1) {
            anom_rows.push_back(i);
        } else {
            normal_rows.push_back(i);
        }
    }
    if (!anom_rows.empty() && anom_rows.size() < 2) {
        throw ConfigError("need at least 2 anomalous rows to populate val and test");
    }

    Tensor normal = rows_subset(data.x, normal_rows);
    Tensor anomalous = anom_rows.empty() ? Tensor::zeros({0, d})
                                         : rows_subset(data.x, anom_rows);

    if (anom_rows.empty()) {
        // all-normal input: everything trains, no held-out labeled sets
        DataSplit split;
        split.feature_dim = d;
        split.train = normal;
        split.manifest.train = normal_rows;
        split.val.x = Tensor::zeros({0, d});
        split.test.x = Tensor::zeros({0, d});
        if (standardize) {
            split.standardizer = fit_standardizer(split.train);
            split.train = split.standardizer->apply(split.train);
        }
        return split;
    }

    DataSplit split = assemble_split(normal, anomalous, fractions, seed, standardize);
    // manifest ids refer to source rows, not the normals-first renumbering
    auto remap = [&](std::vector<std::size_t>& ids) {
        for (std::size_t& id : ids) {
            id = id < normal_rows.size() ? normal_rows[id] : anom_rows[id - normal_rows.size()];
        }
    };
    remap(split.manifest.train);
    remap(split.manifest.val);
    remap(split.manifest.test);
    return split;
}

DataSplit load_features(const std::filesystem::path& path,
                        std::optional<std::size_t> label_column, FeatureRole role,
                        const SplitFractions& fractions, std::uint64_t seed, bool standardize) {
    LabeledSet data = load_feature_file(path, label_column);
    if (role == FeatureRole::train_only) {
        for (std::size_t i = 0; i < data.labels.size(); ++i) {
            if (data.labels[i] == 1) {
                throw ValidationError(path.string() + ": anomalous row " + std::to_string(i) +
                                      " in a train-designated file");
            }
        }
        data.labels.clear();
    }
    return split_labeled(data, fractions, seed, standardize);
}

void write_split_manifest(const std::filesystem::path& path, const SplitManifest& manifest) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "row,split\n";
    for (std::size_t i : manifest.train) out << i << ",train\n";
    for (std::size_t i : manifest.val) out << i << ",val\n";
    for (std::size_t i : manifest.test) out << i << ",test\n";
    if (!out) throw IoError("write failed for " + path.string());
}

} // namespace algan
