#include "doctest.h"

#include "algan/data.hpp"
#include "algan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace algan;

namespace {

double row_norm(const Tensor& x, std::size_t i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) acc += x.at(i, j) * x.at(i, j);
    return std::sqrt(acc);
}

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path;
}

} // namespace

TEST_CASE("toy 2-d dataset: counts, geometry, determinism") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::gauss2d;
    spec.n_normal = 1000;
    spec.n_anomalous = 200;
    spec.seed = 42;

    DataSplit a = generate(spec);
    DataSplit b = generate(spec);

    CHECK(a.feature_dim == 2);
    CHECK(a.train.rows() == 600);
    CHECK(a.val.x.rows() == 200 + 100);
    CHECK(a.test.x.rows() == 200 + 100);

    std::size_t val_anom = 0;
    for (int l : a.val.labels) val_anom += l;
    std::size_t test_anom = 0;
    for (int l : a.test.labels) test_anom += l;
    CHECK(val_anom == 100);
    CHECK(test_anom == 100);

    // anomalous radii live on the noisy ring
    for (std::size_t i = 0; i < a.test.x.rows(); ++i) {
        if (!a.test.labels[i]) continue;
        double r = row_norm(a.test.x, i);
        CHECK(r >= spec.radius - 3.0 * spec.radial_noise - 1e-12);
        CHECK(r <= spec.radius + 3.0 * spec.radial_noise + 1e-12);
    }

    // bitwise reproducibility
    for (std::size_t i = 0; i < a.train.size(); ++i) CHECK(a.train.at(i) == b.train.at(i));
    CHECK(a.manifest.train == b.manifest.train);
    CHECK(a.manifest.val == b.manifest.val);
    CHECK(a.manifest.test == b.manifest.test);
}

TEST_CASE("toy normal samples have chi-square norm") {
    SyntheticSpec spec;
    spec.n_normal = 10000;
    spec.n_anomalous = 2;
    spec.seed = 5;
    DataSplit d = generate(spec, {1.0 - 2e-4, 1e-4, 1e-4});

    double mean_sq = 0.0;
    for (std::size_t i = 0; i < d.train.rows(); ++i) {
        double r = row_norm(d.train, i);
        mean_sq += r * r;
    }
    mean_sq /= static_cast<double>(d.train.rows());
    CHECK(mean_sq > 2.0 * 0.95);
    CHECK(mean_sq < 2.0 * 1.05);
}

TEST_CASE("split manifests are disjoint and complete") {
    SyntheticSpec spec;
    spec.n_normal = 500;
    spec.n_anomalous = 100;
    spec.seed = 9;
    DataSplit d = generate(spec);

    std::set<std::size_t> seen;
    auto absorb = [&](const std::vector<std::size_t>& ids) {
        for (std::size_t i : ids) {
            CHECK(seen.insert(i).second); // no id appears twice
        }
    };
    absorb(d.manifest.train);
    absorb(d.manifest.val);
    absorb(d.manifest.test);
    CHECK(seen.size() == 600);
    CHECK(*seen.rbegin() == 599);

    // train purity: all train ids index the normal pool
    for (std::size_t i : d.manifest.train) CHECK(i < 500);
}

TEST_CASE("ring anomalies separate from the normal bulk") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::ring_anomaly;
    spec.n_normal = 5000;
    spec.n_anomalous = 500;
    spec.radius = 4.0;
    spec.seed = 77;
    DataSplit d = generate(spec);

    std::vector<double> normal_norms;
    for (std::size_t i = 0; i < d.train.rows(); ++i) normal_norms.push_back(row_norm(d.train, i));
    std::sort(normal_norms.begin(), normal_norms.end());
    double p99 = normal_norms[static_cast<std::size_t>(0.99 * normal_norms.size())];

    double min_anom = 1e300;
    for (std::size_t i = 0; i < d.test.x.rows(); ++i) {
        if (d.test.labels[i]) min_anom = std::min(min_anom, row_norm(d.test.x, i));
    }
    CHECK(min_anom > p99);
}

TEST_CASE("gauss_nd scales the anomaly radius with dimension") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::gauss_nd;
    spec.dim = 10;
    spec.n_normal = 200;
    spec.n_anomalous = 100;
    spec.radius = 4.0;
    spec.seed = 3;
    DataSplit d = generate(spec);

    double expect = 4.0 * std::sqrt(5.0);
    for (std::size_t i = 0; i < d.val.x.rows(); ++i) {
        if (!d.val.labels[i]) continue;
        CHECK(row_norm(d.val.x, i) == doctest::Approx(expect).epsilon(0.15));
    }
}

TEST_CASE("shift anomalies move the mean by the offset") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::shift_anomaly;
    spec.dim = 16;
    spec.n_normal = 4000;
    spec.n_anomalous = 2000;
    spec.offset = 2.5;
    spec.seed = 8;
    DataSplit d = generate(spec);

    double anom_mean = 0.0, norm_mean = 0.0;
    std::size_t na = 0, nn = 0;
    for (std::size_t i = 0; i < d.test.x.rows(); ++i) {
        for (std::size_t j = 0; j < 16; ++j) {
            if (d.test.labels[i]) {
                anom_mean += d.test.x.at(i, j);
            } else {
                norm_mean += d.test.x.at(i, j);
            }
        }
        (d.test.labels[i] ? na : nn) += 1;
    }
    anom_mean /= static_cast<double>(na * 16);
    norm_mean /= static_cast<double>(nn * 16);
    CHECK(anom_mean == doctest::Approx(2.5).epsilon(0.05));
    CHECK(std::abs(norm_mean) < 0.1);
}

TEST_CASE("two moons kind produces both classes in 2-d") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::two_moons_like;
    spec.n_normal = 300;
    spec.n_anomalous = 100;
    spec.seed = 12;
    DataSplit d = generate(spec);
    CHECK(d.feature_dim == 2);
    CHECK(d.train.rows() == 180);
    bool has_anom = false;
    for (int l : d.test.labels) has_anom |= l == 1;
    CHECK(has_anom);
}

TEST_CASE("perturb anomalies shift one contiguous block") {
    std::mt19937_64 rng(15);
    Tensor base = Tensor::zeros({40, 100});
    fill_gaussian(base.mutable_data(), rng);

    Tensor same = gen_perturb_anomalies(base, 0.25, 0.0, rng);
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(same.at(i) == base.at(i));

    Tensor moved = gen_perturb_anomalies(base, 0.25, 4.0, rng);
    for (std::size_t i = 0; i < 40; ++i) {
        std::size_t changed = 0;
        std::size_t first = 100, last = 0;
        double dist_sq = 0.0;
        for (std::size_t j = 0; j < 100; ++j) {
            double delta = moved.at(i, j) - base.at(i, j);
            if (delta != 0.0) {
                ++changed;
                first = std::min(first, j);
                last = std::max(last, j);
                dist_sq += delta * delta;
            }
        }
        CHECK(changed == 25);
        CHECK(last - first + 1 == 25); // contiguous
        CHECK(std::sqrt(dist_sq) == doctest::Approx(4.0 * 5.0));
    }

    CHECK_THROWS_AS(gen_perturb_anomalies(base, 0.0, 1.0, rng), ConfigError);
    CHECK_THROWS_AS(gen_perturb_anomalies(base, 1.0, 1.0, rng), ConfigError);
}

TEST_CASE("standardization fits train only and leaks nothing") {
    SyntheticSpec spec;
    spec.kind = SyntheticKind::shift_anomaly;
    spec.dim = 6;
    spec.n_normal = 400;
    spec.n_anomalous = 100;
    spec.offset = 3.0;
    spec.seed = 21;
    DataSplit d = generate(spec, {}, true);

    REQUIRE(d.standardizer.has_value());
    // train columns are exactly standardized
    for (std::size_t j = 0; j < 6; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < d.train.rows(); ++i) mean += d.train.at(i, j);
        mean /= static_cast<double>(d.train.rows());
        double var = 0.0;
        for (std::size_t i = 0; i < d.train.rows(); ++i) {
            var += (d.train.at(i, j) - mean) * (d.train.at(i, j) - mean);
        }
        var /= static_cast<double>(d.train.rows() - 1);
        CHECK(std::abs(mean) < 1e-10);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-10);
    }

    // anomalous test samples keep their shift: same stats applied, not refit
    double anom_mean = 0.0;
    std::size_t na = 0;
    for (std::size_t i = 0; i < d.test.x.rows(); ++i) {
        if (!d.test.labels[i]) continue;
        for (std::size_t j = 0; j < 6; ++j) anom_mean += d.test.x.at(i, j);
        ++na;
    }
    anom_mean /= static_cast<double>(na * 6);
    CHECK(anom_mean > 2.0); // ~3 sigma in standardized space

    // stats recompute from raw rows via the manifest
    DataSplit raw = generate(spec, {}, false);
    Standardizer refit;
    refit.mean.assign(6, 0.0);
    refit.std.assign(6, 1.0);
    for (std::size_t i = 0; i < raw.train.rows(); ++i) {
        for (std::size_t j = 0; j < 6; ++j) refit.mean[j] += raw.train.at(i, j);
    }
    for (double& m : refit.mean) m /= static_cast<double>(raw.train.rows());
    for (std::size_t j = 0; j < 6; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < raw.train.rows(); ++i) {
            double c = raw.train.at(i, j) - refit.mean[j];
            acc += c * c;
        }
        refit.std[j] = std::sqrt(acc / static_cast<double>(raw.train.rows() - 1));
    }
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(d.standardizer->mean[j] == doctest::Approx(refit.mean[j]).epsilon(1e-12));
        CHECK(d.standardizer->std[j] == doctest::Approx(refit.std[j]).epsilon(1e-12));
    }
}

TEST_CASE("feature file loading") {
    auto path = write_temp("algan_feat_plain.csv", "1.5,2,3.25,4\n5,6,7,8\n9,10,11,12\n");
    LabeledSet set = load_feature_file(path, std::nullopt);
    CHECK(set.x.rows() == 3);
    CHECK(set.x.cols() == 4);
    CHECK(set.x.at(0, 2) == 3.25);
    CHECK(set.labels.empty());
    std::filesystem::remove(path);

    path = write_temp("algan_feat_header.csv", "f0,f1,label\n0.5,1.5,0\n2.5,3.5,1\n");
    LabeledSet labeled = load_feature_file(path, 2);
    CHECK(labeled.x.cols() == 2);
    CHECK(labeled.labels == std::vector<int>{0, 1});
    std::filesystem::remove(path);
}

TEST_CASE("feature file errors carry line context") {
    auto ragged = write_temp("algan_feat_ragged.csv", "1,2,3\n4,5\n");
    CHECK_THROWS_WITH_AS(load_feature_file(ragged, std::nullopt), doctest::Contains("line 2"),
                         ParseError);
    std::filesystem::remove(ragged);

    auto nonnum = write_temp("algan_feat_nonnum.csv", "1,2\n3,oops\n");
    CHECK_THROWS_WITH_AS(load_feature_file(nonnum, std::nullopt), doctest::Contains("oops"),
                         ParseError);
    std::filesystem::remove(nonnum);

    auto binary = write_temp("algan_feat_binary.csv", std::string("1,2\n\x00\x01\x02", 8));
    CHECK_THROWS_AS(load_feature_file(binary, std::nullopt), ParseError);
    std::filesystem::remove(binary);

    auto badlabel = write_temp("algan_feat_badlabel.csv", "1,2,0\n3,4,7\n");
    CHECK_THROWS_AS(load_feature_file(badlabel, 2), ValidationError);
    std::filesystem::remove(badlabel);

    auto midlabel = write_temp("algan_feat_midlabel.csv", "1,0,2\n3,1,4\n");
    CHECK_THROWS_AS(load_feature_file(midlabel, 1), ConfigError);
    std::filesystem::remove(midlabel);

    CHECK_THROWS_AS(load_feature_file("/nonexistent/algan.csv", std::nullopt), IoError);

    auto empty = write_temp("algan_feat_empty.csv", "\n\n");
    CHECK_THROWS_AS(load_feature_file(empty, std::nullopt), ParseError);
    std::filesystem::remove(empty);
}

TEST_CASE("labeled split obeys the configured fractions") {
    std::mt19937_64 rng(33);
    std::size_t n = 110, d = 3;
    Tensor x = Tensor::zeros({n, d});
    fill_gaussian(x.mutable_data(), rng);
    std::vector<int> labels(n, 0);
    for (std::size_t i = 100; i < 110; ++i) labels[i] = 1;

    DataSplit split = split_labeled({x, labels}, {0.6, 0.2, 0.2}, 5, false);
    CHECK(split.train.rows() == 60);
    std::size_t val_anom = 0, test_anom = 0;
    for (int l : split.val.labels) val_anom += l;
    for (int l : split.test.labels) test_anom += l;
    CHECK(val_anom == 5);
    CHECK(test_anom == 5);
    CHECK(split.val.x.rows() == 25);
    CHECK(split.test.x.rows() == 25);

    // manifest ids point back at source rows: anomalies sit past row 99
    for (std::size_t id : split.manifest.train) CHECK(id < 100);
}

TEST_CASE("train-only ingestion rejects anomalous rows") {
    auto path = write_temp("algan_feat_trainonly.csv", "1,2,0\n3,4,1\n");
    CHECK_THROWS_AS(
        load_features(path, 2, FeatureRole::train_only, {}, 1, false), ValidationError);
    std::filesystem::remove(path);

    auto clean = write_temp("algan_feat_clean.csv", "1,2,0\n3,4,0\n5,6,0\n");
    DataSplit split = load_features(clean, 2, FeatureRole::train_only, {}, 1, false);
    CHECK(split.train.rows() == 3);
    CHECK(split.val.x.rows() == 0);
    CHECK(split.test.x.rows() == 0);
    std::filesystem::remove(clean);
}

TEST_CASE("unlabeled files become all-normal training data") {
    auto path = write_temp("algan_feat_unlabeled.csv", "1,2\n3,4\n5,6\n7,8\n");
    DataSplit split = load_features(path, std::nullopt, FeatureRole::split_all, {}, 1, false);
    CHECK(split.train.rows() == 4);
    CHECK(split.val.x.rows() == 0);
    std::filesystem::remove(path);
}

TEST_CASE("split manifest export") {
    SplitManifest m;
    m.train = {2, 0};
    m.val = {1};
    m.test = {3};
    auto path = std::filesystem::temp_directory_path() / "algan_manifest_test.csv";
    write_split_manifest(path, m);

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "row,split");
    std::getline(in, line);
    CHECK(line == "2,train");
    std::getline(in, line);
    CHECK(line == "0,train");
    std::getline(in, line);
    CHECK(line == "1,val");
    std::getline(in, line);
    CHECK(line == "3,test");
    std::filesystem::remove(path);
}

TEST_CASE("degenerate configurations are rejected") {
    SyntheticSpec spec;
    spec.n_normal = 3;
    spec.n_anomalous = 2;
    CHECK_THROWS_AS(generate(spec, {0.5, 0.3, 0.2}), ConfigError); // val would get 0.9 -> rounds to 1... train 1.5
    spec.n_anomalous = 1;
    CHECK_THROWS_AS(generate(spec), ConfigError);
    spec.n_anomalous = 2;
    CHECK_THROWS_AS(generate(spec, {0.5, 0.4, 0.2}), ConfigError); // fractions sum > 1
}
