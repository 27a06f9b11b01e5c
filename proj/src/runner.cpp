#include "algan/runner.hpp"

#include "algan/checkpoint.hpp"
#include "algan/eval.hpp"
#include "algan/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace algan {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

bool has_both_classes(const LabeledSet& set) {
    if (!set.x.defined() || set.x.size() == 0 || set.labels.empty()) return false;
    const bool any_pos = std::find(set.labels.begin(), set.labels.end(), 1) != set.labels.end();
    const bool any_neg = std::find(set.labels.begin(), set.labels.end(), 0) != set.labels.end();
    return any_pos && any_neg;
}

std::size_t network_input_dim(const Network& net) {
    for (const auto& layer : net.layers()) {
        if (const auto* d = std::get_if<Dense>(&layer)) return d->weight.rows();
        if (const auto* s = std::get_if<SpectralDense>(&layer)) return s->inner.weight.rows();
    }
    throw ConfigError("network has no dense layer");
}

struct Aggregate {
    double mean = 0.0;
    double stddev = 0.0;
};

Aggregate aggregate(const std::vector<double>& xs) {
    Aggregate a;
    if (xs.empty()) return a;
    double sum = 0.0;
    for (double x : xs) sum += x;
    a.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - a.mean) * (x - a.mean);
        a.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return a;
}

std::string fmt_opt(const std::optional<double>& v) {
    if (!v) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(6) << *v;
    return os.str();
}

std::string fmt_value(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& command,
                    std::vector<std::string> files) {
    std::sort(files.begin(), files.end());
    json j;
    j["command"] = command;
    j["files"] = files;
    open_out(out_dir / "manifest.json") << j.dump(1) << '\n';
}

json seed_record(const SeedSummary& s) {
    json j;
    j["record"] = "seed";
    j["seed"] = s.seed;
    j["best_epoch"] = s.best_epoch;
    if (s.best_val_auroc) j["val_auroc"] = *s.best_val_auroc;
    if (s.test_auroc) j["test_auroc"] = *s.test_auroc;
    if (s.threshold) j["threshold"] = *s.threshold;
    return j;
}

// Aggregated test AUROCs of every seed that produced one.
std::vector<double> collect_test_aurocs(const std::vector<SeedSummary>& seeds) {
    std::vector<double> xs;
    for (const auto& s : seeds) {
        if (s.test_auroc) xs.push_back(*s.test_auroc);
    }
    return xs;
}

GridRow grid_cell(const ExperimentConfig& cfg, const std::string& label,
                  std::vector<std::pair<std::string, double>> params) {
    GridRow row;
    row.label = label;
    row.params = std::move(params);
    for (std::uint64_t seed : cfg.seeds) {
        SeedRun run = execute_seed(cfg, seed);
        if (!run.summary.test_auroc) {
            throw ConfigError("grid run '" + label + "' produced no test AUROC; grid commands "
                              "need labeled test data");
        }
        row.per_seed_test_auroc.push_back(*run.summary.test_auroc);
    }
    const Aggregate a = aggregate(row.per_seed_test_auroc);
    row.mean = a.mean;
    row.stddev = a.stddev;
    return row;
}

void write_grid_outputs(const GridReport& report, const std::string& command,
                        const std::filesystem::path& out_dir, std::ostream& log) {
    const std::string stream_name = command + ".jsonl";
    auto out = open_out(out_dir / stream_name);
    log << std::left << std::setw(18) << "row" << std::setw(12) << "mean" << std::setw(12)
        << "std" << "seeds\n";
    for (const auto& row : report.rows) {
        json j;
        j["record"] = "row";
        j["label"] = row.label;
        for (const auto& [k, v] : row.params) j[k] = v;
        j["n"] = row.per_seed_test_auroc.size();
        j["test_auroc_mean"] = row.mean;
        j["test_auroc_std"] = row.stddev;
        j["per_seed"] = row.per_seed_test_auroc;
        out << j.dump() << '\n';

        std::ostringstream mean_s, std_s;
        mean_s << std::fixed << std::setprecision(6) << row.mean;
        std_s << std::fixed << std::setprecision(6) << row.stddev;
        log << std::left << std::setw(18) << row.label << std::setw(12) << mean_s.str()
            << std::setw(12) << std_s.str() << row.per_seed_test_auroc.size() << '\n';
    }
    write_manifest(out_dir, command, {stream_name});
}

} // namespace

std::filesystem::path resolve_out_dir(const std::optional<std::string>& cli_dir,
                                      const OutputConfig& output, const std::string& fallback) {
    if (cli_dir) return std::filesystem::path(*cli_dir);
    const char* env = std::getenv("ALGAN_OUT_ROOT");
    const std::filesystem::path root =
        (env != nullptr && *env != '\0') ? std::filesystem::path(env)
                                         : std::filesystem::path("runs");
    if (!output.dir.empty()) {
        return output.dir.is_absolute() ? output.dir : root / output.dir;
    }
    return root / fallback;
}

void prepare_out_dir(const std::filesystem::path& dir, bool overwrite) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (fs::exists(dir, ec)) {
        if (!fs::is_directory(dir, ec)) {
            throw ConfigError("output path " + dir.string() + " exists and is not a directory");
        }
        if (!fs::is_empty(dir, ec) && !overwrite) {
            throw ConfigError("output directory " + dir.string() +
                              " is not empty; pass --overwrite to reuse it or pick a fresh "
                              "--out-dir");
        }
        return;
    }
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

DataSplit build_dataset(const DatasetConfig& ds, std::uint64_t run_seed) {
    if (ds.source == DatasetConfig::Source::synthetic) {
        SyntheticSpec spec = ds.synthetic;
        spec.seed = derive_seed(ds.synthetic.seed, run_seed);
        return generate(spec, ds.split, ds.standardize_effective());
    }
    return load_features(ds.path, ds.label_column, ds.role, ds.split,
                         derive_seed(ds.file_seed, run_seed), ds.standardize_effective());
}

std::pair<Network, Network> build_networks(const ModelConfig& model, std::size_t data_dim,
                                           std::uint64_t run_seed) {
    std::vector<std::size_t> gen_dims;
    gen_dims.push_back(model.latent_dim);
    gen_dims.insert(gen_dims.end(), model.generator_hidden.begin(), model.generator_hidden.end());
    gen_dims.push_back(data_dim);

    std::vector<std::size_t> disc_dims;
    disc_dims.push_back(data_dim);
    disc_dims.insert(disc_dims.end(), model.discriminator_hidden.begin(),
                     model.discriminator_hidden.end());
    disc_dims.push_back(1);

    return {make_mlp_generator(gen_dims, derive_seed(run_seed, 201)),
            make_mlp_discriminator(disc_dims, derive_seed(run_seed, 202), model.leaky_slope)};
}

SeedRun execute_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
    SeedRun run;
    run.data = build_dataset(cfg.dataset, seed);
    auto [gen, disc] = build_networks(cfg.model, run.data.feature_dim, seed);
    TrainConfig tc = cfg.training;
    tc.seed = seed;
    run.report = train(tc, run.data, gen, disc);

    SeedSummary& s = run.summary;
    s.seed = seed;
    s.best_epoch = run.report.best_epoch;
    s.best_val_auroc = run.report.best_auroc;
    s.trace = run.report.trace;

    const Network& best_disc = run.report.best.discriminator;
    switch (cfg.evaluation.policy) {
    case EvalConfig::ThresholdPolicy::fixed:
        s.threshold = cfg.evaluation.fixed_threshold;
        break;
    case EvalConfig::ThresholdPolicy::youden:
        if (has_both_classes(run.data.val)) {
            s.threshold = youden_threshold(
                ScoredSet{anomaly_scores(best_disc, run.data.val.x), run.data.val.labels});
        }
        break;
    case EvalConfig::ThresholdPolicy::none:
        break;
    }
    if (has_both_classes(run.data.test)) {
        s.test_auroc = auroc(
            ScoredSet{anomaly_scores(best_disc, run.data.test.x), run.data.test.labels});
    }
    return run;
}

MetricsReport run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                             std::ostream& log) {
    std::vector<std::string> files;
    MetricsReport report;

    log << std::left << std::setw(8) << "seed" << std::setw(12) << "best_epoch" << std::setw(12)
        << "val_auroc" << std::setw(12) << "test_auroc" << "threshold\n";

    for (std::uint64_t seed : cfg.seeds) {
        SeedRun run = execute_seed(cfg, seed);
        const std::string seed_name = "seed_" + std::to_string(seed);
        const std::filesystem::path seed_dir = out_dir / seed_name;
        std::filesystem::create_directories(seed_dir);

        save_checkpoint(run.report.best, seed_dir / "checkpoint.json");
        files.push_back(seed_name + "/checkpoint.json");

        {
            auto out = open_out(seed_dir / "metrics.jsonl");
            for (const auto& r : run.summary.trace) {
                json j;
                j["epoch"] = r.epoch;
                j["val_auroc"] = r.auroc;
                j["d_loss"] = r.d_loss;
                j["g_loss"] = r.g_loss;
                out << j.dump() << '\n';
            }
            files.push_back(seed_name + "/metrics.jsonl");
        }

        if (has_both_classes(run.data.test)) {
            ScoredSet test_set{
                anomaly_scores(run.report.best.discriminator, run.data.test.x),
                run.data.test.labels};
            write_scores_csv(seed_dir / "test_scores.csv", test_set);
            files.push_back(seed_name + "/test_scores.csv");
            write_histogram_csv(seed_dir / "test_histogram.csv",
                                histogram(test_set, cfg.evaluation.bins));
            files.push_back(seed_name + "/test_histogram.csv");
        }

        write_split_manifest(seed_dir / "split_manifest.csv", run.data.manifest);
        files.push_back(seed_name + "/split_manifest.csv");

        log << std::left << std::setw(8) << run.summary.seed << std::setw(12)
            << run.summary.best_epoch << std::setw(12) << fmt_opt(run.summary.best_val_auroc)
            << std::setw(12) << fmt_opt(run.summary.test_auroc)
            << fmt_opt(run.summary.threshold) << '\n';

        report.per_seed.push_back(std::move(run.summary));
    }

    const std::vector<double> xs = collect_test_aurocs(report.per_seed);
    if (!xs.empty()) {
        const Aggregate a = aggregate(xs);
        report.mean_test_auroc = a.mean;
        report.std_test_auroc = a.stddev;
        log << "test AUROC over " << xs.size() << " seed(s): mean "
            << fmt_opt(report.mean_test_auroc) << " std " << fmt_opt(report.std_test_auroc)
            << '\n';
    } else {
        log << "no labeled test data; no aggregate AUROC\n";
    }

    {
        auto out = open_out(out_dir / "report.jsonl");
        for (const auto& s : report.per_seed) out << seed_record(s).dump() << '\n';
        json agg;
        agg["record"] = "aggregate";
        agg["n"] = xs.size();
        if (report.mean_test_auroc) {
            agg["test_auroc_mean"] = *report.mean_test_auroc;
            agg["test_auroc_std"] = *report.std_test_auroc;
        }
        out << agg.dump() << '\n';
        files.push_back("report.jsonl");
    }

    write_manifest(out_dir, "train", std::move(files));
    return report;
}

GridReport run_ablation(const ExperimentConfig& cfg, const std::filesystem::path& out_dir,
                        std::ostream& log) {
    struct Cell {
        const char* label;
        bool anomalous_on;
        bool buffer_on;
    };
    // alpha = 1 removes anomalous latents; xi = 1 removes the buffer term.
    const Cell cells[] = {{"neither", false, false},
                          {"anomalous_only", true, false},
                          {"buffer_only", false, true},
                          {"both", true, true}};

    GridReport report;
    for (const Cell& cell : cells) {
        ExperimentConfig c = cfg;
        if (!cell.anomalous_on) c.training.latent.alpha = 1.0;
        if (!cell.buffer_on) c.training.xi = 1.0;
        report.rows.push_back(grid_cell(c, cell.label,
                                        {{"alpha", c.training.latent.alpha},
                                         {"xi", c.training.xi}}));
    }
    write_grid_outputs(report, "ablation", out_dir, log);
    return report;
}

GridReport run_sweep(const ExperimentConfig& cfg, const std::string& param,
                     const std::vector<double>& values, const std::filesystem::path& out_dir,
                     std::ostream& log) {
    if (values.empty()) throw ConfigError("sweep: need at least one value");

    const bool integral = param == "n_z" || param == "n_dis";
    GridReport report;
    for (double v : values) {
        ExperimentConfig c = cfg;
        if (param == "sigma") {
            c.training.latent.sigma = v;
        } else if (param == "alpha") {
            c.training.latent.alpha = v;
        } else if (param == "xi") {
            c.training.xi = v;
        } else if (integral) {
            if (!(v >= 1.0) || std::floor(v) != v) {
                throw ConfigError("sweep: " + param + " values must be positive integers");
            }
            if (param == "n_z") {
                c.training.n_z = static_cast<std::size_t>(v);
            } else {
                c.training.n_dis = static_cast<std::size_t>(v);
            }
        } else {
            throw ConfigError("sweep: unknown parameter '" + param +
                              "' (expected sigma, alpha, xi, n_z, or n_dis)");
        }
        c.training.validate(); // invalid values fail before any training starts
        report.rows.push_back(grid_cell(c, param + "=" + fmt_value(v), {{param, v}}));
    }
    write_grid_outputs(report, "sweep", out_dir, log);
    return report;
}

EvalSummary run_eval(const std::filesystem::path& checkpoint_path,
                     const std::filesystem::path& data_path, std::optional<double> threshold,
                     std::optional<std::size_t> label_column, std::size_t bins,
                     const std::filesystem::path& out_dir, std::ostream& log) {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    const LabeledSet data = load_feature_file(data_path, label_column);

    const std::size_t in_dim = network_input_dim(ckpt.discriminator);
    if (data.x.cols() != in_dim) {
        throw ConfigError("data has " + std::to_string(data.x.cols()) +
                          " feature columns but the checkpoint expects " +
                          std::to_string(in_dim));
    }

    Tensor x = data.x;
    if (!ckpt.feature_mean.empty()) {
        if (ckpt.feature_mean.size() != in_dim || ckpt.feature_std.size() != in_dim) {
            throw ConfigError("checkpoint feature statistics do not match its input dimension");
        }
        x = Standardizer{ckpt.feature_mean, ckpt.feature_std}.apply(x);
    }

    const std::vector<double> scores = anomaly_scores(ckpt.discriminator, x);

    EvalSummary summary;
    summary.n_samples = scores.size();
    summary.labeled = !data.labels.empty();
    const bool two_class = has_both_classes(data);
    summary.single_class = summary.labeled && !two_class;

    std::vector<std::string> files;
    write_scores_csv(out_dir / "scores.csv", ScoredSet{scores, data.labels});
    files.push_back("scores.csv");

    if (two_class) {
        const ScoredSet set{scores, data.labels};
        summary.auroc = auroc(set);
        write_histogram_csv(out_dir / "histogram.csv", histogram(set, bins));
        files.push_back("histogram.csv");
        log << "AUROC " << fmt_opt(summary.auroc) << " over " << summary.n_samples
            << " samples\n";
    } else if (summary.single_class) {
        log << "note: labels contain a single class; AUROC unavailable, scores written\n";
    } else {
        log << "unlabeled data; scores written\n";
    }

    if (threshold) {
        summary.threshold = *threshold;
        const std::vector<int> flags = classify(scores, *threshold);
        summary.n_flagged =
            static_cast<std::size_t>(std::count(flags.begin(), flags.end(), 1));
        if (summary.labeled) {
            std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
            for (std::size_t i = 0; i < flags.size(); ++i) {
                if (data.labels[i] == 1) {
                    (flags[i] == 1 ? tp : fn) += 1;
                } else {
                    (flags[i] == 1 ? fp : tn) += 1;
                }
            }
            summary.tp = tp;
            summary.fp = fp;
            summary.tn = tn;
            summary.fn = fn;
            log << "threshold " << *threshold << ": flagged " << summary.n_flagged << " (tp "
                << tp << " fp " << fp << " tn " << tn << " fn " << fn << ")\n";
        } else {
            log << "threshold " << *threshold << ": flagged " << summary.n_flagged << " of "
                << summary.n_samples << '\n';
        }
    }

    {
        json j;
        j["n_samples"] = summary.n_samples;
        j["labeled"] = summary.labeled;
        j["single_class"] = summary.single_class;
        if (summary.auroc) j["auroc"] = *summary.auroc;
        if (summary.threshold) {
            j["threshold"] = *summary.threshold;
            j["n_flagged"] = summary.n_flagged;
            if (summary.tp) {
                j["tp"] = *summary.tp;
                j["fp"] = *summary.fp;
                j["tn"] = *summary.tn;
                j["fn"] = *summary.fn;
            }
        }
        open_out(out_dir / "summary.json") << j.dump(1) << '\n';
        files.push_back("summary.json");
    }

    write_manifest(out_dir, "eval", std::move(files));
    return summary;
}

} // namespace algan
