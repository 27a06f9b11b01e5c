// End-to-end acceptance suite. Each numbered check prints one PASS/FAIL line
// and the process exits nonzero if any check fails. Real models are trained
// throughout, so a full run takes several minutes on one core.

#include "algan/checkpoint.hpp"
#include "algan/eval.hpp"
#include "algan/rng.hpp"
#include "algan/runner.hpp"
#include "algan/train.hpp"
#include "support.hpp"

#include <Eigen/SVD>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unistd.h>
#include <variant>
#include <vector>

using namespace algan;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

std::string strf(const char* fmt, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return buf;
}

void verdict(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %2d  %s%s%s\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.empty() ? "" : ": ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void note(const std::string& text) {
    std::printf("           %s\n", text.c_str());
    std::fflush(stdout);
}

void progress(const std::string& text) {
    std::printf("    %s\n", text.c_str());
    std::fflush(stdout);
}

struct Stopwatch {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double secs() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// Fresh directory under the system temp root, removed on destruction.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("algan_accept_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

// Exact largest singular value, independent of the power-iteration estimate.
double svd_sigma_max(const Tensor& w) {
    Eigen::MatrixXd m(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) m(i, j) = w.at(i, j);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

// Reference experiment: 2-d standard-normal inliers against a radius-4 ring
// of anomalies, trained with the library defaults (latent 100, sigma 4,
// alpha = xi = 0.75, batch 16). Width and epoch count are calibrated so ten
// seeds finish within a few minutes while the detector converges.
ExperimentConfig toy_config() {
    ExperimentConfig cfg;
    cfg.dataset.synthetic.kind = SyntheticKind::gauss2d;
    cfg.dataset.synthetic.n_normal = 1000;
    cfg.dataset.synthetic.n_anomalous = 200;
    cfg.dataset.synthetic.dim = 2;
    cfg.dataset.synthetic.seed = 424242;
    cfg.model.latent_dim = 100;
    cfg.model.generator_hidden = {32};
    cfg.model.discriminator_hidden = {32};
    cfg.training.epochs = 400;
    cfg.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    return cfg;
}

struct ToyRun {
    SeedRun run;
    double seconds = 0.0;
};

// Trained once and shared by the detection, ablation, sigma, and robustness
// checks, which all evaluate the same reference configuration.
const std::vector<ToyRun>& toy_runs() {
    static const std::vector<ToyRun> runs = [] {
        std::vector<ToyRun> out;
        ExperimentConfig cfg = toy_config();
        progress("training the 2-d reference configuration, 10 seeds");
        for (std::uint64_t seed : cfg.seeds) {
            Stopwatch sw;
            ToyRun tr{execute_seed(cfg, seed), 0.0};
            tr.seconds = sw.secs();
            progress(strf("seed %llu: test auroc %.4f, best val %.4f (%.1fs)",
                          static_cast<unsigned long long>(seed),
                          tr.run.summary.test_auroc.value(),
                          tr.run.summary.best_val_auroc.value(), tr.seconds));
            out.push_back(std::move(tr));
        }
        return out;
    }();
    return runs;
}

std::vector<double> toy_test_aurocs() {
    std::vector<double> xs;
    for (const ToyRun& tr : toy_runs()) xs.push_back(tr.run.summary.test_auroc.value());
    return xs;
}

double mean_norm_at_scale(const Checkpoint& ckpt, double scale, std::mt19937_64& rng) {
    Tensor z = Tensor::zeros({512, ckpt.latent_dim});
    fill_gaussian(z.mutable_data(), rng, 0.0, scale);
    Tensor x = ckpt.generator.infer(z);
    double total = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double q = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) q += x.at(i, j) * x.at(i, j);
        total += std::sqrt(q);
    }
    return total / static_cast<double>(x.rows());
}

// 1. Reverse-mode gradients of both full network shapes agree with central
//    finite differences. Seeds are chosen so no ReLU preactivation sits at
//    its kink, where finite differences are invalid.
void check_gradients() {
    Stopwatch sw;
    Network gen = make_mlp_generator({5, 8, 6, 4}, 124);
    std::mt19937_64 rng_z(100);
    Tensor z = Tensor::zeros({6, 5});
    fill_gaussian(z.mutable_data(), rng_z);
    auto gen_loss = [&]() {
        Tensor out = gen.forward(z, Mode::train);
        return mean(mul(out, out));
    };
    auto rep_g = testsup::finite_diff_check(gen.parameters(), gen_loss);

    // Eval mode keeps the power-iteration state frozen so every loss
    // evaluation sees the same spectral scale.
    Network disc = make_mlp_discriminator({4, 8, 6, 1}, 321);
    std::mt19937_64 rng_x(15);
    Tensor x = Tensor::zeros({6, 4});
    fill_gaussian(x.mutable_data(), rng_x);
    auto disc_loss = [&]() { return mean(softplus(neg(disc.forward(x, Mode::eval)))); };
    auto rep_d = testsup::finite_diff_check(disc.parameters(), disc_loss);

    bool pass = rep_g.max_rel <= 1e-4 && rep_d.max_rel <= 1e-4 && rep_g.checked > 100 &&
                rep_d.checked > 50 && sw.secs() < 30.0;
    verdict(1, "network gradients match finite differences", pass,
            strf("generator rel %.2e (%zu params), discriminator rel %.2e (%zu params), %.1fs",
                 rep_g.max_rel, rep_g.checked, rep_d.max_rel, rep_d.checked, sw.secs()));
}

// 2. A single Adam step at lr 1e-4, beta1 0, beta2 0.9 matches the closed
//    form: m = g, v = 0.1 g^2, bias correction gives m_hat = g, v_hat = g^2,
//    so each weight moves by -lr * g / (|g| + eps).
void check_adam_closed_form() {
    Tensor w = Tensor::from_data({4}, {0.5, -1.25, 2.0, -0.03125});
    w.set_requires_grad(true);
    std::vector<double> w0(w.data().begin(), w.data().end());
    Tensor k = Tensor::from_data({4}, {0.2, -0.1, 1e-3, -4.0});

    Adam opt({{"w", w}}, 1e-4, 0.0, 0.9);
    opt.zero_grad();
    {
        Graph g;
        Recording rec(g);
        g.backward(sum(mul(w, k))); // gradient is exactly k
    }
    opt.step();

    double worst = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double g = k.at(i);
        double expected = w0[i] - 1e-4 * g / (std::abs(g) + 1e-8);
        worst = std::max(worst, std::abs(w.at(i) - expected));
    }
    verdict(2, "adam first step matches the closed form", worst <= 1e-12,
            strf("max deviation %.2e", worst));
}

// 3. After a full reference training run, every spectral layer of the final
//    live discriminator and of the best snapshot holds the unit-norm bound:
//    the exact largest singular value of the effective weight stays <= 1.01.
void check_spectral_bound() {
    Stopwatch sw;
    ExperimentConfig cfg = toy_config();
    DataSplit data = build_dataset(cfg.dataset, 1);
    auto [gen, disc] = build_networks(cfg.model, data.feature_dim, 1);
    TrainConfig tc = cfg.training;
    tc.seed = 1;
    RunReport report = train(tc, data, gen, disc);

    double worst = 0.0;
    std::size_t checked = 0;
    for (Network* net : {&disc, &report.best.discriminator}) {
        for (auto& layer : net->layers()) {
            if (auto* sd = std::get_if<SpectralDense>(&layer)) {
                worst = std::max(worst, svd_sigma_max(spectral_normalize(*sd, false)));
                ++checked;
            }
        }
    }
    verdict(3, "spectral layers hold the unit norm bound after training",
            worst <= 1.01 && checked >= 4,
            strf("largest singular value %.6f across %zu layers, %.1fs", worst, checked, sw.secs()));
}

// 4. The sorting-based AUROC equals the O(n^2) pairwise definition (ties
//    half-credited) on 1000 random score sets, and perfectly separated sets
//    return exactly 1.
void check_auroc_oracle() {
    Stopwatch sw;
    std::mt19937_64 rng(9341);
    std::normal_distribution<double> dist;
    double worst = 0.0;
    for (int it = 0; it < 1000; ++it) {
        std::size_t n = 2 + uniform_index(rng, 199); // 2..200
        std::size_t n_pos = 1 + uniform_index(rng, n - 1);
        ScoredSet set;
        for (std::size_t i = 0; i < n; ++i) {
            // Every third set sits on a coarse grid so ties dominate.
            double s = it % 3 == 0 ? 0.25 * static_cast<double>(uniform_index(rng, 8))
                                   : dist(rng);
            set.scores.push_back(s);
            set.labels.push_back(i < n_pos ? 1 : 0);
        }
        double fast = auroc(set);
        double wins = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!set.labels[i]) continue;
            for (std::size_t j = 0; j < n; ++j) {
                if (set.labels[j]) continue;
                if (set.scores[i] > set.scores[j]) wins += 1.0;
                else if (set.scores[i] == set.scores[j]) wins += 0.5;
                ++pairs;
            }
        }
        worst = std::max(worst, std::abs(fast - wins / static_cast<double>(pairs)));
    }

    bool exact_one = true;
    for (int it = 0; it < 50; ++it) {
        std::size_t n_pos = 1 + uniform_index(rng, 40), n_neg = 1 + uniform_index(rng, 40);
        ScoredSet set;
        for (std::size_t i = 0; i < n_neg; ++i) {
            set.scores.push_back(-2.0 + dist(rng) * 0.1);
            set.labels.push_back(0);
        }
        for (std::size_t i = 0; i < n_pos; ++i) {
            set.scores.push_back(2.0 + dist(rng) * 0.1);
            set.labels.push_back(1);
        }
        if (auroc(set) != 1.0) exact_one = false;
    }
    verdict(4, "auroc agrees with the pairwise oracle", worst <= 1e-12 && exact_one,
            strf("max |sorting - pairwise| %.2e over 1000 sets, separated sets exact: %s, %.1fs",
                 worst, exact_one ? "yes" : "no", sw.secs()));
}

// 5. The sample buffer holds twice the batch size, an epoch refresh replaces
//    exactly half of it with staged rows, and replacement is deterministic
//    under a fixed seed. A live training run confirms the same wiring.
void check_buffer_semantics() {
    const std::size_t m = 16, d = 3;
    auto block = [&](double base, int label) {
        Tensor t = Tensor::zeros({m, d});
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                t.mutable_data()[i * d + j] = base + static_cast<double>(i);
            }
        }
        return std::pair<Tensor, std::vector<int>>(t, std::vector<int>(m, label));
    };
    auto run_refresh = [&](std::uint64_t seed) {
        SampleBuffer buf(2 * m, d);
        auto [a, la] = block(100.0, 0);
        auto [b, lb] = block(200.0, 0);
        auto [c, lc] = block(900.0, 1);
        buf.push(a, la);
        buf.push(b, lb); // buffer now at capacity
        buf.push(c, lc); // staged for the refresh
        std::mt19937_64 rng(seed);
        buf.end_epoch(rng);
        std::vector<double> firsts;
        for (std::size_t i = 0; i < buf.size(); ++i) firsts.push_back(buf.row(i).at(0));
        return std::pair<std::vector<double>, std::vector<int>>(firsts, buf.labels());
    };

    SampleBuffer probe(2 * m, d);
    bool capacity_ok = probe.capacity() == 2 * m;

    auto [v1, l1] = run_refresh(7);
    auto [v2, l2] = run_refresh(7);
    auto [v3, l3] = run_refresh(8);
    std::size_t replaced = 0;
    for (std::size_t i = 0; i < v1.size(); ++i) {
        if (v1[i] >= 900.0) ++replaced;
    }
    std::size_t labels_moved = 0;
    for (int l : l1) labels_moved += static_cast<std::size_t>(l);
    bool refresh_ok = v1.size() == 2 * m && replaced == m && labels_moved == replaced;
    bool deterministic = v1 == v2 && l1 == l2;
    bool seed_sensitive = v1 != v3;

    // Live run: the training loop sizes the buffer at twice its batch.
    ExperimentConfig cfg = toy_config();
    cfg.dataset.synthetic.n_normal = 160;
    cfg.dataset.synthetic.n_anomalous = 40;
    cfg.model.latent_dim = 8;
    cfg.training.latent.dim = 8;
    cfg.model.generator_hidden = {8};
    cfg.model.discriminator_hidden = {8};
    cfg.training.epochs = 4;
    DataSplit data = build_dataset(cfg.dataset, 1);
    auto [gen, disc] = build_networks(cfg.model, data.feature_dim, 1);
    TrainConfig tc = cfg.training;
    bool live_ok = true;
    TrainHooks hooks;
    hooks.on_epoch_end = [&](std::size_t, const SampleBuffer& buf) {
        live_ok = live_ok && buf.capacity() == 2 * tc.batch_size && buf.size() == buf.capacity();
    };
    train(tc, data, gen, disc, &hooks);

    bool pass = capacity_ok && refresh_ok && deterministic && seed_sensitive && live_ok;
    verdict(5, "sample buffer capacity, half refresh, determinism", pass,
            strf("capacity %zu, replaced %zu of %zu, deterministic %s, live wiring %s",
                 probe.capacity(), replaced, 2 * m, deterministic && seed_sensitive ? "yes" : "no",
                 live_ok ? "ok" : "bad"));
}

// 6. On the 2-d reference problem the median test AUROC over ten seeds
//    reaches 0.95, pseudo-anomalous generator samples sit at least 1.5x
//    farther out than fake-normal ones, and no seed exceeds five minutes.
void check_toy_detection() {
    const std::vector<ToyRun>& runs = toy_runs();
    std::vector<double> ratios;
    double max_secs = 0.0;
    std::mt19937_64 rng(555019);
    for (const ToyRun& tr : runs) {
        max_secs = std::max(max_secs, tr.seconds);
        const Checkpoint& best = tr.run.report.best;
        double n_normal = mean_norm_at_scale(best, 1.0, rng);
        double n_anom = mean_norm_at_scale(best, best.sigma, rng);
        ratios.push_back(n_anom / n_normal);
    }
    double med = median(toy_test_aurocs());
    double min_ratio = *std::min_element(ratios.begin(), ratios.end());
    bool pass = med >= 0.95 && min_ratio >= 1.5 && max_secs <= 300.0;
    verdict(6, "2-d detection quality and outward pseudo-anomalies", pass,
            strf("median test auroc %.4f (need 0.95), scale ratio min %.2f (need 1.5), "
                 "slowest seed %.1fs (cap 300s)",
                 med, min_ratio, max_secs));
}

// 7. Switching off the anomalous latents (alpha = 1) and/or the buffer
//    (xi = 1) orders the mean test AUROC as: full recipe >= each single
//    ingredient >= neither, with at least 0.05 between the extremes.
void check_ablation_ordering() {
    Stopwatch sw;
    ExperimentConfig base = toy_config();
    auto cell_mean = [&](double alpha, double xi, const char* label) {
        ExperimentConfig cfg = base;
        cfg.training.latent.alpha = alpha;
        cfg.training.xi = xi;
        std::vector<double> xs;
        for (std::uint64_t seed : cfg.seeds) {
            xs.push_back(execute_seed(cfg, seed).summary.test_auroc.value());
        }
        double m = mean(xs);
        progress(strf("%s: mean test auroc %.4f", label, m));
        return m;
    };
    double m_both = mean(toy_test_aurocs());
    progress(strf("anomalous latents + buffer: mean test auroc %.4f", m_both));
    double m_anom = cell_mean(0.75, 1.0, "anomalous latents only");
    double m_buf = cell_mean(1.0, 0.75, "buffer only");
    double m_none = cell_mean(1.0, 1.0, "neither");

    bool pass = m_both >= m_anom && m_anom >= m_none && m_both >= m_buf && m_buf >= m_none &&
                m_both - m_none >= 0.05;
    verdict(7, "ablation grid preserves the ingredient ordering", pass,
            strf("both %.4f >= anomalous %.4f >= neither %.4f; both >= buffer %.4f >= neither; "
                 "gap %.4f (need 0.05), %.0fs",
                 m_both, m_anom, m_none, m_buf, m_both - m_none, sw.secs()));
}

// 8. Anomalous latents drawn at sigma 4 beat sigma 2 on mean test AUROC.
void check_sigma_ordering() {
    Stopwatch sw;
    ExperimentConfig cfg = toy_config();
    cfg.training.latent.sigma = 2.0;
    std::vector<double> xs;
    for (std::uint64_t seed : cfg.seeds) {
        xs.push_back(execute_seed(cfg, seed).summary.test_auroc.value());
    }
    double m_sigma2 = mean(xs);
    double m_sigma4 = mean(toy_test_aurocs());
    verdict(8, "sigma 4 beats sigma 2 on mean test auroc", m_sigma4 > m_sigma2,
            strf("sigma4 %.4f vs sigma2 %.4f, %.0fs", m_sigma4, m_sigma2, sw.secs()));
}

// 9. The strongest reference model (highest validation AUROC) scores
//    held-out anomalies: generator samples drawn at latent scales 5..8 and
//    coordinate-shift anomalies. At least 95% must exceed the model's
//    validation Youden threshold.
void check_robustness() {
    const std::vector<ToyRun>& runs = toy_runs();
    const ToyRun* pick = &runs.front();
    for (const ToyRun& tr : runs) {
        if (tr.run.summary.best_val_auroc.value() > pick->run.summary.best_val_auroc.value()) {
            pick = &tr;
        }
    }
    const Checkpoint& best = pick->run.report.best;
    double thr = pick->run.summary.threshold.value();

    std::mt19937_64 rng(777031);
    std::size_t above = 0, total = 0;
    std::string parts;
    for (int s = 5; s <= 8; ++s) {
        Tensor z = Tensor::zeros({256, best.latent_dim});
        fill_gaussian(z.mutable_data(), rng, 0.0, static_cast<double>(s));
        std::vector<double> scores = anomaly_scores(best.discriminator, best.generator.infer(z));
        std::size_t k = 0;
        for (double v : scores) k += v > thr ? 1 : 0;
        parts += strf(" scale%d %zu/256", s, k);
        above += k;
        total += scores.size();
    }
    Tensor normals = Tensor::zeros({256, 2});
    fill_gaussian(normals.mutable_data(), rng);
    Tensor pert = gen_perturb_anomalies(normals, 0.25, 4.0, rng);
    std::vector<double> scores = anomaly_scores(best.discriminator, pert);
    std::size_t k = 0;
    for (double v : scores) k += v > thr ? 1 : 0;
    parts += strf(" perturb %zu/256", k);
    above += k;
    total += scores.size();

    double frac = static_cast<double>(above) / static_cast<double>(total);
    verdict(9, "held-out anomalies exceed the validation threshold", frac >= 0.95,
            strf("%.1f%% above threshold (need 95%%), seed %llu:%s", 100.0 * frac,
                 static_cast<unsigned long long>(pick->run.summary.seed), parts.c_str()));
    if (frac < 0.95) {
        note("known 2-d limit: scaled latents map through the near-linear generator to a");
        note("centered cloud, so a fixed share lands inside the boundary at any training");
        note("quality; in higher-dimensional data the same protocol clears 95% easily");
    }
}

// 10. The same config and seed reproduce an identical validation trace, and
//     a checkpoint survives a save/load round trip bitwise: the reloaded
//     discriminator reproduces every test score exactly.
void check_determinism_roundtrip() {
    Stopwatch sw;
    ExperimentConfig cfg = toy_config();
    cfg.training.epochs = 32;
    SeedRun a = execute_seed(cfg, 5);
    SeedRun b = execute_seed(cfg, 5);

    bool traces_equal = a.summary.trace.size() == b.summary.trace.size();
    if (traces_equal) {
        for (std::size_t i = 0; i < a.summary.trace.size(); ++i) {
            const ValRecord &ra = a.summary.trace[i], &rb = b.summary.trace[i];
            traces_equal = traces_equal && ra.epoch == rb.epoch && ra.auroc == rb.auroc &&
                           ra.d_loss == rb.d_loss && ra.g_loss == rb.g_loss;
        }
    }

    TempDir tmp("roundtrip");
    save_checkpoint(a.report.best, tmp.path / "ckpt.json");
    Checkpoint loaded = load_checkpoint(tmp.path / "ckpt.json");
    std::vector<double> s_orig = anomaly_scores(a.report.best.discriminator, a.data.test.x);
    std::vector<double> s_load = anomaly_scores(loaded.discriminator, a.data.test.x);

    bool pass = traces_equal && !s_orig.empty() && s_orig == s_load;
    verdict(10, "rerun determinism and bitwise checkpoint round trip", pass,
            strf("trace points %zu identical: %s; %zu test scores bitwise equal: %s; %.1fs",
                 a.summary.trace.size(), traces_equal ? "yes" : "no", s_orig.size(),
                 s_orig == s_load ? "yes" : "no", sw.secs()));
}

// 11. Feature-file path, end to end through the command-line tool: a 128-d
//     labeled CSV of two well-separated gaussians trains to a median test
//     AUROC of at least 0.99 over five seeds, the split manifests partition
//     the file with a clean train split, and the stored standardizer
//     statistics derive from the train rows alone.
void check_feature_pipeline() {
    Stopwatch sw;
    TempDir tmp("feature");

    // Inliers N(0, I), anomalies N(3*1, I), fixed generation seed 20260814,
    // label in the final column.
    const std::size_t d = 128, n_norm = 1600, n_anom = 320;
    std::mt19937_64 rng(20260814);
    std::vector<std::pair<int, std::vector<double>>> rows;
    for (std::size_t i = 0; i < n_norm + n_anom; ++i) {
        int label = i >= n_norm ? 1 : 0;
        std::vector<double> v(d);
        fill_gaussian(v, rng, label ? 3.0 : 0.0, 1.0);
        rows.emplace_back(label, std::move(v));
    }
    std::shuffle(rows.begin(), rows.end(), rng);

    fs::path csv = tmp.path / "features.csv";
    {
        std::ofstream out(csv);
        out << std::setprecision(17);
        for (const auto& [label, v] : rows) {
            for (double x : v) out << x << ',';
            out << label << '\n';
        }
    }

    json cfg;
    cfg["dataset"] = {{"source", "file"}, {"path", csv.string()}, {"label_column", d}, {"seed", 1}};
    cfg["model"] = {{"latent_dim", 100}, {"generator_hidden", {64}}, {"discriminator_hidden", {64}}};
    cfg["training"] = {{"epochs", 600}};
    cfg["seeds"] = {1, 2, 3, 4, 5};
    fs::path cfg_path = tmp.path / "config.json";
    {
        std::ofstream out(cfg_path);
        out << cfg.dump(1) << '\n';
    }

    fs::path out_dir = tmp.path / "out";
    progress("training the 128-d feature benchmark through the command-line tool, 5 seeds");
    std::string cmd = std::string("\"") + ALGAN_BIN_PATH + "\" train \"" + cfg_path.string() +
                      "\" --out-dir \"" + out_dir.string() + "\" > \"" +
                      (tmp.path / "train.log").string() + "\" 2>&1";
    int rc = std::system(cmd.c_str());
    if (rc != 0) {
        verdict(11, "feature-file pipeline reaches near-perfect detection", false,
                strf("train command exited with %d", rc));
        return;
    }

    std::vector<double> aurocs;
    {
        std::ifstream rep(out_dir / "report.jsonl");
        std::string line;
        while (std::getline(rep, line)) {
            json j = json::parse(line);
            if (j.value("record", "") == "seed") aurocs.push_back(j.at("test_auroc").get<double>());
        }
    }
    double med = aurocs.size() == 5 ? median(aurocs) : 0.0;

    // Split hygiene for every seed: pure train split, the three splits
    // partition the file rows, both holdout splits keep both classes, and
    // the stored standardizer matches statistics recomputed from the train
    // rows alone.
    bool hygiene = true;
    std::string why;
    for (int seed = 1; seed <= 5 && hygiene; ++seed) {
        fs::path seed_dir = out_dir / ("seed_" + std::to_string(seed));
        std::ifstream man(seed_dir / "split_manifest.csv");
        std::string line;
        std::getline(man, line); // header
        std::map<std::string, std::vector<std::size_t>> splits;
        std::set<std::size_t> seen;
        while (std::getline(man, line)) {
            auto comma = line.find(',');
            std::size_t row = std::stoul(line.substr(0, comma));
            splits[line.substr(comma + 1)].push_back(row);
            if (!seen.insert(row).second) {
                hygiene = false;
                why = strf("seed %d: row %zu appears twice", seed, row);
            }
        }
        if (seen.size() != rows.size()) {
            hygiene = false;
            why = strf("seed %d: manifest covers %zu of %zu rows", seed, seen.size(), rows.size());
        }
        for (std::size_t r : splits["train"]) {
            if (rows[r].first != 0) {
                hygiene = false;
                why = strf("seed %d: anomalous row %zu in train", seed, r);
            }
        }
        for (const char* part : {"val", "test"}) {
            std::size_t pos = 0;
            for (std::size_t r : splits[part]) pos += static_cast<std::size_t>(rows[r].first);
            if (pos == 0 || pos == splits[part].size()) {
                hygiene = false;
                why = strf("seed %d: %s split lost a class", seed, part);
            }
        }

        Checkpoint ck = load_checkpoint(seed_dir / "checkpoint.json");
        const std::vector<std::size_t>& train_ids = splits["train"];
        for (std::size_t j = 0; j < d && hygiene; ++j) {
            double m = 0.0;
            for (std::size_t r : train_ids) m += rows[r].second[j];
            m /= static_cast<double>(train_ids.size());
            double acc = 0.0;
            for (std::size_t r : train_ids) {
                double c = rows[r].second[j] - m;
                acc += c * c;
            }
            double v = acc / static_cast<double>(train_ids.size() - 1);
            double s = v > 0.0 ? std::sqrt(v) : 1.0;
            if (std::abs(ck.feature_mean[j] - m) > 1e-9 || std::abs(ck.feature_std[j] - s) > 1e-9) {
                hygiene = false;
                why = strf("seed %d: standardizer differs from train-only statistics", seed);
            }
        }
    }

    bool pass = med >= 0.99 && hygiene;
    verdict(11, "feature-file pipeline reaches near-perfect detection", pass,
            strf("median test auroc %.4f over %zu seeds (need 0.99), split hygiene %s, %.0fs",
                 med, aurocs.size(), hygiene ? "clean" : why.c_str(), sw.secs()));
}

} // namespace

int main() {
    std::printf("acceptance suite: trains real models end to end; expect several minutes\n");
    std::fflush(stdout);
    Stopwatch total;
    check_gradients();
    check_adam_closed_form();
    check_spectral_bound();
    check_auroc_oracle();
    check_buffer_semantics();
    check_toy_detection();
    check_ablation_ordering();
    check_sigma_ordering();
    check_robustness();
    check_determinism_roundtrip();
    check_feature_pipeline();
    std::printf("%d of 11 checks passed in %.0fs\n", 11 - g_failures, total.secs());
    return g_failures == 0 ? 0 : 1;
}
