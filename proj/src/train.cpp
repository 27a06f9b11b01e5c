#include "algan/train.hpp"

#include "algan/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace algan {

namespace {

// Uniform k-subset of {0..n-1} via partial Fisher-Yates; order is part of the
// draw so replacement pairings stay deterministic under a fixed seed.
std::vector<std::size_t> draw_without_replacement(std::size_t n, std::size_t k,
                                                  std::mt19937_64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + uniform_index(rng, n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

void check_finite_logits(const Tensor& logits, const char* which) {
    for (double v : logits.data()) {
        if (!std::isfinite(v)) {
            throw TrainingError(std::string(which) + " logits contain a non-finite value");
        }
    }
}

Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& order, std::size_t begin,
                   std::size_t count) {
    const std::size_t d = x.cols();
    std::vector<double> out;
    out.reserve(count * d);
    const auto src = x.data();
    for (std::size_t i = 0; i < count; ++i) {
        const double* row = src.data() + order[begin + i] * d;
        out.insert(out.end(), row, row + d);
    }
    return Tensor::from_data({count, d}, std::move(out));
}

} // namespace

void LatentSpec::validate() const {
    if (dim == 0) throw ConfigError("latent dim must be positive");
    if (!(sigma > 1.0)) throw ConfigError("latent sigma must exceed 1");
    if (!(alpha > 0.0) || alpha > 1.0) throw ConfigError("latent alpha must lie in (0, 1]");
}

LatentBatch sample_latents(const LatentSpec& spec, std::size_t n, LatentKind kind,
                           std::mt19937_64& rng) {
    spec.validate();
    if (n == 0) throw ConfigError("sample_latents: need at least one row");

    std::vector<double> z(n * spec.dim);
    std::vector<int> labels(n, 0);

    if (kind == LatentKind::normal_for_gen) {
        fill_gaussian(z, rng);
        return {Tensor::from_data({n, spec.dim}, std::move(z)), std::move(labels)};
    }

    const auto n_normal =
        std::min(n, static_cast<std::size_t>(std::llround(spec.alpha * static_cast<double>(n))));
    fill_gaussian(std::span<double>(z.data(), n_normal * spec.dim), rng);
    fill_gaussian(std::span<double>(z.data() + n_normal * spec.dim, (n - n_normal) * spec.dim),
                  rng, 0.0, spec.sigma);
    std::fill(labels.begin() + static_cast<std::ptrdiff_t>(n_normal), labels.end(), 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_vec(order, rng);

    std::vector<double> shuffled(n * spec.dim);
    std::vector<int> shuffled_labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::copy_n(z.data() + order[i] * spec.dim, spec.dim, shuffled.data() + i * spec.dim);
        shuffled_labels[i] = labels[order[i]];
    }
    return {Tensor::from_data({n, spec.dim}, std::move(shuffled)), std::move(shuffled_labels)};
}

SampleBuffer::SampleBuffer(std::size_t capacity, std::size_t dim)
    : capacity_(capacity), dim_(dim) {
    if (capacity == 0) throw ConfigError("sample buffer capacity must be positive");
    if (dim == 0) throw ConfigError("sample buffer dim must be positive");
    rows_.reserve(capacity);
    labels_.reserve(capacity);
}

void SampleBuffer::push(const Tensor& batch, const std::vector<int>& labels) {
    if (batch.rank() != 2 || batch.cols() != dim_) {
        throw DimensionError("sample buffer push: expected [n x " + std::to_string(dim_) +
                             "], got " + shape_str(batch.shape()));
    }
    if (!labels.empty() && labels.size() != batch.rows()) {
        throw DimensionError("sample buffer push: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(batch.rows()) + " rows");
    }
    const auto src = batch.data();
    for (std::size_t r = 0; r < batch.rows(); ++r) {
        std::vector<double> row(src.begin() + static_cast<std::ptrdiff_t>(r * dim_),
                                src.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim_));
        const int label = labels.empty() ? 0 : labels[r];
        if (rows_.size() < capacity_) {
            rows_.push_back(std::move(row));
            labels_.push_back(label);
        } else {
            staged_rows_.push_back(std::move(row));
            staged_labels_.push_back(label);
        }
    }
}

void SampleBuffer::end_epoch(std::mt19937_64& rng) {
    if (staged_rows_.empty()) return;
    const std::size_t half = (capacity_ + 1) / 2;
    const std::size_t n_replace = std::min(half, staged_rows_.size());
    const auto slots = draw_without_replacement(rows_.size(), n_replace, rng);
    const auto picks = draw_without_replacement(staged_rows_.size(), n_replace, rng);
    for (std::size_t i = 0; i < n_replace; ++i) {
        rows_[slots[i]] = std::move(staged_rows_[picks[i]]);
        labels_[slots[i]] = staged_labels_[picks[i]];
    }
    staged_rows_.clear();
    staged_labels_.clear();
}

Tensor SampleBuffer::sample(std::size_t count, std::mt19937_64& rng) const {
    if (rows_.empty()) throw ConfigError("sample buffer is empty");
    const std::size_t n_take = std::min(count, rows_.size());
    const auto picks = draw_without_replacement(rows_.size(), n_take, rng);
    std::vector<double> out;
    out.reserve(n_take * dim_);
    for (const std::size_t p : picks) {
        out.insert(out.end(), rows_[p].begin(), rows_[p].end());
    }
    return Tensor::from_data({n_take, dim_}, std::move(out));
}

Tensor SampleBuffer::row(std::size_t i) const {
    if (i >= rows_.size()) throw DimensionError("sample buffer row index out of range");
    return Tensor::from_data({dim_}, rows_[i]);
}

Tensor discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits,
                          const Tensor* buffer_logits, double xi) {
    if (!(xi > 0.0) || xi > 1.0) throw ConfigError("xi must lie in (0, 1]");
    check_finite_logits(real_logits, "real");
    check_finite_logits(fake_logits, "fake");

    // -log sigmoid(r) = softplus(-r); -log(1 - sigmoid(f)) = softplus(f).
    Tensor loss = mean(softplus(neg(real_logits)));
    if (buffer_logits != nullptr) {
        check_finite_logits(*buffer_logits, "buffer");
        loss = add(loss, scale(mean(softplus(fake_logits)), xi));
        loss = add(loss, scale(mean(softplus(*buffer_logits)), 1.0 - xi));
    } else {
        loss = add(loss, mean(softplus(fake_logits)));
    }
    return loss;
}

Tensor generator_loss(const Tensor& fake_logits) {
    check_finite_logits(fake_logits, "generator");
    return mean(softplus(neg(fake_logits)));
}

void TrainConfig::validate() const {
    latent.validate();
    if (epochs == 0) throw ConfigError("epochs must be positive");
    if (n_z == 0) throw ConfigError("latent refresh period n_z must be positive");
    if (n_dis == 0) throw ConfigError("discriminator steps per batch n_dis must be positive");
    if (batch_size < 2) throw ConfigError("batch_size must be at least 2 for batch statistics");
    if (!(xi > 0.0) || xi > 1.0) throw ConfigError("xi must lie in (0, 1]");
    if (!(lr_g > 0.0) || !(lr_d > 0.0)) throw ConfigError("learning rates must be positive");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
        throw ConfigError("adam betas must lie in [0, 1)");
    }
    if (val_period == 0) throw ConfigError("val_period must be positive");
}

RunReport train(const TrainConfig& config, const DataSplit& data, Network& gen, Network& disc,
                const TrainHooks* hooks) {
    config.validate();
    if (!data.train.defined() || data.train.size() == 0) {
        throw ConfigError("training set is empty");
    }
    const std::size_t n_train = data.train.rows();
    const std::size_t m = config.batch_size;
    if (n_train < m) {
        throw ConfigError("training set has " + std::to_string(n_train) +
                          " rows, fewer than one batch of " + std::to_string(m));
    }
    const std::size_t n_batches = n_train / m;
    const std::size_t data_dim = data.train.cols();

    std::mt19937_64 rng_latent(derive_seed(config.seed, 11));
    std::mt19937_64 rng_data(derive_seed(config.seed, 12));
    std::mt19937_64 rng_buffer(derive_seed(config.seed, 13));

    Adam opt_g(gen.named_parameters(), config.lr_g, config.beta1, config.beta2);
    Adam opt_d(disc.named_parameters(), config.lr_d, config.beta1, config.beta2);

    const bool keep_buffer = config.xi < 1.0;
    SampleBuffer buffer(2 * m, data_dim);

    const std::size_t pool_rows =
        config.latent_reuse == LatentReuse::pool ? n_batches * m : m;
    LatentBatch z_d;
    LatentBatch z_g;

    const bool have_val = data.val.x.defined() && data.val.x.size() > 0;

    RunReport report;
    double best = -1.0;
    bool have_best = false;
    const auto snapshot = [&] {
        report.best = Checkpoint{config.seed,
                                 config.latent.dim,
                                 config.latent.sigma,
                                 data.standardizer ? data.standardizer->mean
                                                   : std::vector<double>{},
                                 data.standardizer ? data.standardizer->std
                                                   : std::vector<double>{},
                                 gen.clone(),
                                 disc.clone()};
        have_best = true;
    };

    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        if (epoch == 1 || epoch % config.n_z == 0) {
            z_d = sample_latents(config.latent, pool_rows, LatentKind::mixed_for_disc, rng_latent);
            z_g = sample_latents(config.latent, pool_rows, LatentKind::normal_for_gen, rng_latent);
            if (hooks && hooks->on_latent_refresh) hooks->on_latent_refresh(epoch);
        }
        shuffle_vec(order, rng_data);

        double d_loss_sum = 0.0;
        double g_loss_sum = 0.0;
        std::size_t d_steps = 0;

        for (std::size_t b = 0; b < n_batches; ++b) {
            const auto fail = [&](const std::string& what) -> TrainingError {
                return TrainingError("epoch " + std::to_string(epoch) + ", batch " +
                                     std::to_string(b) + ": " + what);
            };
            const Tensor x = gather_rows(data.train, order, b * m, m);
            const std::size_t z_off = config.latent_reuse == LatentReuse::pool ? b * m : 0;
            const Tensor z_batch = z_d.z.slice_rows(z_off, m);
            const std::vector<int> z_labels(
                z_d.labels.begin() + static_cast<std::ptrdiff_t>(z_off),
                z_d.labels.begin() + static_cast<std::ptrdiff_t>(z_off + m));

            Tensor fake;
            for (std::size_t t = 0; t < config.n_dis; ++t) {
                fake = gen.forward(z_batch, Mode::train).detach();
                const bool with_buffer = keep_buffer && epoch > 1 && buffer.size() > 0;
                Tensor buf;
                if (with_buffer) buf = buffer.sample(m, rng_buffer);

                try {
                    Graph graph;
                    Tensor loss;
                    {
                        Recording rec(graph);
                        const Tensor real_logits = disc.forward(x, Mode::train);
                        const Tensor fake_logits = disc.forward(fake, Mode::train);
                        if (with_buffer) {
                            const Tensor buf_logits = disc.forward(buf, Mode::train);
                            loss = discriminator_loss(real_logits, fake_logits, &buf_logits,
                                                      config.xi);
                        } else {
                            loss = discriminator_loss(real_logits, fake_logits, nullptr,
                                                      config.xi);
                        }
                    }
                    if (!std::isfinite(loss.value())) {
                        throw TrainingError("non-finite discriminator loss");
                    }
                    opt_d.zero_grad();
                    graph.backward(loss);
                    opt_d.step();
                    d_loss_sum += loss.value();
                    ++d_steps;
                } catch (const TrainingError& e) {
                    throw fail(e.what());
                }
                if (hooks && hooks->on_disc_step) hooks->on_disc_step(epoch, b, with_buffer);
            }

            if (keep_buffer) buffer.push(fake, z_labels);

            const Tensor zg_batch = z_g.z.slice_rows(z_off, m);
            try {
                Graph graph;
                Tensor gloss;
                {
                    Recording rec(graph);
                    const Tensor fake_g = gen.forward(zg_batch, Mode::train);
                    const Tensor logits = disc.forward(fake_g, Mode::train);
                    gloss = generator_loss(logits);
                }
                if (!std::isfinite(gloss.value())) {
                    throw TrainingError("non-finite generator loss");
                }
                opt_g.zero_grad();
                graph.backward(gloss);
                opt_g.step();
                g_loss_sum += gloss.value();
            } catch (const TrainingError& e) {
                throw fail(e.what());
            }
            if (hooks && hooks->on_gen_step) hooks->on_gen_step(epoch, b);
        }

        if (keep_buffer) buffer.end_epoch(rng_buffer);
        if (hooks && hooks->on_epoch_end) hooks->on_epoch_end(epoch, buffer);

        report.d_loss_per_epoch.push_back(d_loss_sum / static_cast<double>(d_steps));
        report.g_loss_per_epoch.push_back(g_loss_sum / static_cast<double>(n_batches));

        if (have_val && (epoch % config.val_period == 0 || epoch == config.epochs)) {
            ScoredSet val_set{anomaly_scores(disc, data.val.x), data.val.labels};
            const double val_auroc = auroc(val_set);
            report.trace.push_back(ValRecord{epoch, val_auroc, report.d_loss_per_epoch.back(),
                                             report.g_loss_per_epoch.back()});
            if (val_auroc > best) {
                best = val_auroc;
                report.best_epoch = epoch;
                report.best_auroc = val_auroc;
                snapshot();
            }
        }
    }

    // No validation data: the final state is the kept model.
    if (!have_best) {
        report.best_epoch = config.epochs;
        snapshot();
    }
    return report;
}

} // namespace algan
