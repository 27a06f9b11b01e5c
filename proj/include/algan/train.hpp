#pragma once

#include "algan/checkpoint.hpp"
#include "algan/data.hpp"
#include "algan/eval.hpp"
#include "algan/nn.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace algan {

// Latent sampling plan: normal latents come from N(0,I); anomalous latents
// from N(0, sigma^2 I) with sigma > 1 so they land outside the normal bulk.
// alpha is the normal fraction of a mixed draw; alpha = 1 turns the anomalous
// component off entirely.
struct LatentSpec {
    std::size_t dim = 100;
    double sigma = 4.0;
    double alpha = 0.75;

    void validate() const;
};

enum class LatentKind { mixed_for_disc, normal_for_gen };

struct LatentBatch {
    Tensor z;                // [n x dim]
    std::vector<int> labels; // 1 where the row came from the anomalous component
};

// mixed_for_disc: round(alpha*n) normal rows and the rest anomalous, shuffled
// with labels kept. normal_for_gen: n normal rows.
LatentBatch sample_latents(const LatentSpec& spec, std::size_t n, LatentKind kind,
                           std::mt19937_64& rng);

// Fixed-capacity store of previously generated samples. Pushes append until
// capacity is reached; afterwards they stage for the epoch-end refresh, which
// overwrites exactly ceil(capacity/2) uniformly chosen slots with uniformly
// chosen staged rows. Stored rows carry their origin label for diagnostics.
class SampleBuffer {
public:
    SampleBuffer(std::size_t capacity, std::size_t dim);

    std::size_t size() const { return rows_.size(); }
    std::size_t capacity() const { return capacity_; }
    std::size_t dim() const { return dim_; }

    void push(const Tensor& batch, const std::vector<int>& labels);
    void end_epoch(std::mt19937_64& rng);

    // Uniform sample without replacement of min(count, size()) stored rows.
    Tensor sample(std::size_t count, std::mt19937_64& rng) const;

    const std::vector<int>& labels() const { return labels_; }
    Tensor row(std::size_t i) const;

private:
    std::size_t capacity_;
    std::size_t dim_;
    std::vector<std::vector<double>> rows_;
    std::vector<int> labels_;
    std::vector<std::vector<double>> staged_rows_;
    std::vector<int> staged_labels_;
};

// Binary cross-entropy on raw logits, in softplus form so saturated logits
// stay finite. Real samples push toward "real"; fresh fakes weigh xi and
// buffered fakes 1 - xi. Without a buffer batch both weights collapse to 1.
Tensor discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits,
                          const Tensor* buffer_logits, double xi);

// Non-saturating generator objective: mean softplus(-logit).
Tensor generator_loss(const Tensor& fake_logits);

enum class LatentReuse { literal, pool };

struct TrainConfig {
    std::size_t epochs = 64;
    std::size_t n_z = 2;      // latent pool refresh period (epochs)
    std::size_t n_dis = 2;    // discriminator updates per batch
    std::size_t batch_size = 16;
    LatentSpec latent;
    double xi = 0.75;         // (0,1]; 1 disables the buffer
    double lr_g = 2e-4;
    double lr_d = 1e-4;
    double beta1 = 0.0;
    double beta2 = 0.9;
    std::size_t val_period = 8;
    std::uint64_t seed = 1;
    LatentReuse latent_reuse = LatentReuse::pool;

    void validate() const;
};

struct ValRecord {
    std::size_t epoch = 0;
    double auroc = 0.0;
    double d_loss = 0.0; // epoch mean
    double g_loss = 0.0;
};

struct RunReport {
    std::vector<ValRecord> trace;
    std::size_t best_epoch = 0;
    std::optional<double> best_auroc; // empty when no validation data exists
    Checkpoint best;
    std::vector<double> d_loss_per_epoch;
    std::vector<double> g_loss_per_epoch;
};

// Test instrumentation; every callback is optional.
struct TrainHooks {
    std::function<void(std::size_t epoch)> on_latent_refresh;
    std::function<void(std::size_t epoch, std::size_t batch, bool used_buffer)> on_disc_step;
    std::function<void(std::size_t epoch, std::size_t batch)> on_gen_step;
    std::function<void(std::size_t epoch, const SampleBuffer&)> on_epoch_end;
};

// Adversarial training: per epoch the latent pools refresh on the n_z
// schedule, each real batch drives n_dis discriminator updates (fresh
// generator forward per batch, buffer term from epoch 2 when enabled), the
// buffer receives the batch's fakes, and one generator update follows from
// normal-only latents. Validation runs every val_period epochs and at the
// final epoch; the best-AUROC snapshot is kept.
RunReport train(const TrainConfig& config, const DataSplit& data, Network& gen, Network& disc,
                const TrainHooks* hooks = nullptr);

} // namespace algan
