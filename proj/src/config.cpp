#include "algan/config.hpp"

#include <fstream>
#include <set>
#include <utility>

namespace algan {

namespace {

using nlohmann::json;

std::string join_path(const std::string& prefix, const char* key) {
    return prefix.empty() ? std::string(key) : prefix + "." + key;
}

// Tracks which keys a section consumed so leftovers fail with their path.
class Section {
public:
    Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
        if (!obj.is_object()) {
            throw ConfigError("config: " + (path_.empty() ? "top level" : path_) +
                              " must be an object");
        }
    }

    bool has(const char* key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    const json* find(const char* key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    template <typename T>
    void read(const char* key, T& out) {
        if (const json* v = find(key)) out = convert<T>(*v, key);
    }

    template <typename T>
    std::optional<T> get(const char* key) {
        if (const json* v = find(key)) return convert<T>(*v, key);
        return std::nullopt;
    }

    [[noreturn]] void fail(const char* key, const std::string& what) const {
        throw ConfigError("config: " + join_path(path_, key) + " " + what);
    }

    void finish() const {
        for (const auto& item : obj_.items()) {
            if (!seen_.contains(item.key())) {
                throw ConfigError("config: unknown key '" + join_path(path_, item.key().c_str()) +
                                  "'");
            }
        }
    }

    const std::string& path() const { return path_; }

private:
    template <typename T>
    T convert(const json& v, const char* key) const {
        try {
            return v.get<T>();
        } catch (const json::exception&) {
            throw ConfigError("config: " + join_path(path_, key) + " has the wrong type");
        }
    }

    const json& obj_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

SyntheticKind parse_kind(Section& sec, const std::string& name) {
    if (name == "gauss2d") return SyntheticKind::gauss2d;
    if (name == "gauss_nd") return SyntheticKind::gauss_nd;
    if (name == "ring_anomaly") return SyntheticKind::ring_anomaly;
    if (name == "two_moons_like") return SyntheticKind::two_moons_like;
    if (name == "shift_anomaly") return SyntheticKind::shift_anomaly;
    if (name == "perturb_anomaly") return SyntheticKind::perturb_anomaly;
    sec.fail("kind", "must be one of gauss2d, gauss_nd, ring_anomaly, two_moons_like, "
                     "shift_anomaly, perturb_anomaly");
}

DatasetConfig parse_dataset(const json& obj) {
    DatasetConfig ds;
    Section sec(obj, "dataset");

    if (auto source = sec.get<std::string>("source")) {
        if (*source == "synthetic") {
            ds.source = DatasetConfig::Source::synthetic;
        } else if (*source == "file") {
            ds.source = DatasetConfig::Source::file;
        } else {
            sec.fail("source", "must be \"synthetic\" or \"file\"");
        }
    }
    const bool synthetic = ds.source == DatasetConfig::Source::synthetic;

    auto synthetic_only = [&](const char* key) {
        if (!synthetic && sec.has(key)) {
            sec.fail(key, "is only valid for source \"synthetic\"");
        }
        return synthetic;
    };
    auto file_only = [&](const char* key) {
        if (synthetic && sec.has(key)) {
            sec.fail(key, "is only valid for source \"file\"");
        }
        return !synthetic;
    };

    if (synthetic_only("kind")) {
        if (auto kind = sec.get<std::string>("kind")) ds.synthetic.kind = parse_kind(sec, *kind);
    }
    if (synthetic_only("n_normal")) sec.read("n_normal", ds.synthetic.n_normal);
    if (synthetic_only("n_anomalous")) sec.read("n_anomalous", ds.synthetic.n_anomalous);
    if (synthetic_only("dim")) sec.read("dim", ds.synthetic.dim);
    if (synthetic_only("radius")) sec.read("radius", ds.synthetic.radius);
    if (synthetic_only("radial_noise")) sec.read("radial_noise", ds.synthetic.radial_noise);
    if (synthetic_only("offset")) sec.read("offset", ds.synthetic.offset);
    if (synthetic_only("patch_fraction")) sec.read("patch_fraction", ds.synthetic.patch_fraction);
    if (synthetic_only("magnitude")) sec.read("magnitude", ds.synthetic.magnitude);
    if (synthetic_only("moon_noise")) sec.read("moon_noise", ds.synthetic.moon_noise);

    if (auto seed = sec.get<std::uint64_t>("seed")) {
        ds.synthetic.seed = *seed;
        ds.file_seed = *seed;
    }

    if (file_only("path")) {
        if (auto path = sec.get<std::string>("path")) ds.path = *path;
        if (ds.path.empty()) sec.fail("path", "is required for source \"file\"");
    }
    if (file_only("label_column")) {
        if (const json* v = sec.find("label_column")) {
            if (v->is_null()) {
                ds.label_column.reset();
            } else if (v->is_number_integer() && v->get<long long>() >= 0) {
                ds.label_column = v->get<std::size_t>();
            } else {
                sec.fail("label_column", "must be a column index or null");
            }
        }
    }
    if (file_only("role")) {
        if (auto role = sec.get<std::string>("role")) {
            if (*role == "split_all") {
                ds.role = FeatureRole::split_all;
            } else if (*role == "train_only") {
                ds.role = FeatureRole::train_only;
            } else {
                sec.fail("role", "must be \"split_all\" or \"train_only\"");
            }
        }
    }

    if (const json* split = sec.find("split")) {
        Section ss(*split, "dataset.split");
        ss.read("train", ds.split.train);
        ss.read("val", ds.split.val);
        ss.read("test", ds.split.test);
        ss.finish();
    }
    if (auto standardize = sec.get<bool>("standardize")) ds.standardize = *standardize;

    sec.finish();
    return ds;
}

ModelConfig parse_model(const json& obj) {
    ModelConfig m;
    Section sec(obj, "model");
    sec.read("latent_dim", m.latent_dim);
    sec.read("generator_hidden", m.generator_hidden);
    sec.read("discriminator_hidden", m.discriminator_hidden);
    sec.read("leaky_slope", m.leaky_slope);
    sec.finish();

    if (m.latent_dim == 0) sec.fail("latent_dim", "must be positive");
    for (std::size_t w : m.generator_hidden) {
        if (w == 0) sec.fail("generator_hidden", "widths must be positive");
    }
    for (std::size_t w : m.discriminator_hidden) {
        if (w == 0) sec.fail("discriminator_hidden", "widths must be positive");
    }
    if (!(m.leaky_slope > 0.0) || m.leaky_slope >= 1.0) {
        sec.fail("leaky_slope", "must lie in (0, 1)");
    }
    return m;
}

void parse_training(const json& obj, TrainConfig& t) {
    Section sec(obj, "training");
    sec.read("epochs", t.epochs);
    sec.read("n_z", t.n_z);
    sec.read("n_dis", t.n_dis);
    sec.read("batch_size", t.batch_size);
    sec.read("sigma", t.latent.sigma);
    sec.read("alpha", t.latent.alpha);
    sec.read("xi", t.xi);
    sec.read("lr_g", t.lr_g);
    sec.read("lr_d", t.lr_d);
    sec.read("beta1", t.beta1);
    sec.read("beta2", t.beta2);
    sec.read("val_period", t.val_period);
    if (auto reuse = sec.get<std::string>("latent_reuse")) {
        if (*reuse == "pool") {
            t.latent_reuse = LatentReuse::pool;
        } else if (*reuse == "literal") {
            t.latent_reuse = LatentReuse::literal;
        } else {
            sec.fail("latent_reuse", "must be \"pool\" or \"literal\"");
        }
    }
    sec.finish();
}

EvalConfig parse_evaluation(const json& obj) {
    EvalConfig e;
    Section sec(obj, "evaluation");
    sec.read("bins", e.bins);
    if (const json* v = sec.find("threshold")) {
        if (v->is_string()) {
            const auto s = v->get<std::string>();
            if (s == "youden") {
                e.policy = EvalConfig::ThresholdPolicy::youden;
            } else if (s == "none") {
                e.policy = EvalConfig::ThresholdPolicy::none;
            } else {
                sec.fail("threshold", "must be \"youden\", \"none\", or a number");
            }
        } else if (v->is_number()) {
            e.policy = EvalConfig::ThresholdPolicy::fixed;
            e.fixed_threshold = v->get<double>();
        } else {
            sec.fail("threshold", "must be \"youden\", \"none\", or a number");
        }
    }
    sec.finish();
    if (e.bins == 0) sec.fail("bins", "must be positive");
    return e;
}

OutputConfig parse_output(const json& obj) {
    OutputConfig o;
    Section sec(obj, "output");
    if (auto dir = sec.get<std::string>("dir")) o.dir = *dir;
    sec.read("overwrite", o.overwrite);
    sec.finish();
    return o;
}

} // namespace

void ExperimentConfig::validate() const {
    training.validate();
    if (seeds.empty()) throw ConfigError("config: seeds must not be empty");
    std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
    if (unique.size() != seeds.size()) {
        throw ConfigError("config: seeds must be distinct (per-seed outputs share one directory)");
    }
    if (dataset.source == DatasetConfig::Source::file && dataset.path.empty()) {
        throw ConfigError("config: dataset.path is required for source \"file\"");
    }
    const double frac_sum = dataset.split.train + dataset.split.val + dataset.split.test;
    if (!(dataset.split.train > 0.0) || dataset.split.val < 0.0 || dataset.split.test < 0.0 ||
        std::abs(frac_sum - 1.0) > 1e-9) {
        throw ConfigError("config: dataset.split fractions must be nonnegative, sum to 1, and "
                          "give a nonempty train split");
    }
}

ExperimentConfig parse_experiment_config(const json& root) {
    ExperimentConfig cfg;
    Section sec(root, "");

    if (const json* v = sec.find("dataset")) cfg.dataset = parse_dataset(*v);
    if (const json* v = sec.find("model")) cfg.model = parse_model(*v);
    if (const json* v = sec.find("training")) parse_training(*v, cfg.training);
    if (const json* v = sec.find("evaluation")) cfg.evaluation = parse_evaluation(*v);
    if (const json* v = sec.find("output")) cfg.output = parse_output(*v);
    if (const json* v = sec.find("seeds")) {
        try {
            cfg.seeds = v->get<std::vector<std::uint64_t>>();
        } catch (const json::exception&) {
            throw ConfigError("config: seeds must be an array of nonnegative integers");
        }
    }
    sec.finish();

    // The latent dimension lives in the model section; sigma and alpha are
    // training hyperparameters.
    cfg.training.latent.dim = cfg.model.latent_dim;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("config file " + path.string() + ": " + e.what());
    }
    return parse_experiment_config(root);
}

} // namespace algan
