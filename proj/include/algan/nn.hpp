#pragma once

#include "algan/tensor.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace algan {

enum class Mode { train, eval };

struct Dense {
    Tensor weight; // [in x out]
    Tensor bias;   // [out]
};

// Dense layer whose effective weight is W / sigma_hat, sigma_hat estimated by
// power iteration. u is the persisted iteration state on the output side.
struct SpectralDense {
    Dense inner;
    std::vector<double> u;
    int n_power_iters = 1;
};

struct BatchNorm {
    Tensor gamma; // [d]
    Tensor beta;  // [d]
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double momentum = 0.1;
    double eps = 1e-5;
};

enum class Act { relu, leaky_relu };

struct Activation {
    Act kind = Act::relu;
    double slope = 0.2; // leaky_relu only
};

using Layer = std::variant<Dense, SpectralDense, BatchNorm, Activation>;

// Power-iteration spectral normalization. With update_state the persisted u
// advances n_power_iters steps (outside the gradient graph) before the
// estimate; without, the stored u is used as-is so repeated calls are pure.
// Near-zero weight matrices are returned unchanged.
Tensor spectral_normalize(SpectralDense& layer, bool update_state);

// Train-mode batch normalization over rows (batch >= 2); updates running
// stats and records a fused backward rule for x, gamma, beta.
Tensor batch_norm_train(BatchNorm& bn, const Tensor& x);

// Eval-mode batch normalization from running statistics; mutates nothing.
Tensor batch_norm_eval(const BatchNorm& bn, const Tensor& x);

class Network {
public:
    Network() = default;

    void add(Layer layer) { layers_.push_back(std::move(layer)); }

    // Applies layers in order. Train mode uses batch statistics and advances
    // spectral-norm state; eval mode is pure. Output is a raw logit for
    // discriminator-shaped networks (no final sigmoid).
    Tensor forward(const Tensor& x, Mode mode);

    // Eval-mode forward that provably mutates nothing; safe concurrently.
    Tensor infer(const Tensor& x) const;

    std::vector<Tensor> parameters();
    std::vector<std::pair<std::string, Tensor>> named_parameters();
    void zero_grad();

    // Deep copy: parameters, spectral u state, and running statistics.
    Network clone() const;

    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

private:
    std::vector<Layer> layers_;
};

// Adam with bias correction. Parameters with no accumulated gradient are
// skipped; non-finite gradients abort with the parameter's name and the step.
class Adam {
public:
    Adam(std::vector<std::pair<std::string, Tensor>> params, double lr,
         double beta1, double beta2, double eps = 1e-8);

    void step();
    void zero_grad();
    std::size_t steps_taken() const { return t_; }

private:
    struct Slot {
        std::string name;
        Tensor param;
        std::vector<double> m;
        std::vector<double> v;
    };
    std::vector<Slot> slots_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t t_ = 0;
};

// Weights ~ N(0, 0.02^2), biases zero.
Dense make_dense(std::size_t in, std::size_t out, std::mt19937_64& rng);

// dims = {in, hidden..., out}. Generator: Dense+BatchNorm+ReLU per hidden
// stage, linear output (no BatchNorm on the last layer). Discriminator:
// spectral-normalized Dense + Leaky-ReLU per hidden stage, spectral-normalized
// linear output producing one logit column.
Network make_mlp_generator(const std::vector<std::size_t>& dims, std::uint64_t seed);
Network make_mlp_discriminator(const std::vector<std::size_t>& dims, std::uint64_t seed,
                               double leaky_slope = 0.2);

} // namespace algan
