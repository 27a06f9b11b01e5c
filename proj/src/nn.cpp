#include "algan/nn.hpp"

#include "algan/errors.hpp"
#include "algan/rng.hpp"

#include <cmath>
#include <cstring>

namespace algan {

namespace {

constexpr double kTinyNorm = 1e-12;

double vec_norm(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

} // namespace

Tensor spectral_normalize(SpectralDense& layer, bool update_state) {
    Tensor& W = layer.inner.weight;
    std::size_t in = W.rows(), out = W.cols();
    if (layer.u.size() != out) {
        throw DimensionError("spectral_normalize: u has " + std::to_string(layer.u.size()) +
                             " entries for weight " + shape_str(W.shape()));
    }
    const double* wd = W.data().data();

    auto apply_w = [&](const std::vector<double>& u) {
        std::vector<double> v(in, 0.0);
        for (std::size_t i = 0; i < in; ++i) {
            double acc = 0.0;
            const double* row = wd + i * out;
            for (std::size_t j = 0; j < out; ++j) acc += row[j] * u[j];
            v[i] = acc;
        }
        return v;
    };
    auto apply_wt = [&](const std::vector<double>& v) {
        std::vector<double> u(out, 0.0);
        for (std::size_t i = 0; i < in; ++i) {
            const double* row = wd + i * out;
            for (std::size_t j = 0; j < out; ++j) u[j] += row[j] * v[i];
        }
        return u;
    };

    // Power iteration runs on raw values, outside the gradient graph.
    std::vector<double> u = layer.u;
    std::vector<double> v;
    if (update_state) {
        for (int it = 0; it < layer.n_power_iters; ++it) {
            v = apply_w(u);
            double nv = vec_norm(v);
            if (nv < kTinyNorm) return W;
            for (double& x : v) x /= nv;
            u = apply_wt(v);
            double nu = vec_norm(u);
            if (nu < kTinyNorm) return W;
            for (double& x : u) x /= nu;
        }
        layer.u = u;
    } else {
        v = apply_w(u);
        double nv = vec_norm(v);
        if (nv < kTinyNorm) return W;
        for (double& x : v) x /= nv;
    }

    // sigma_hat = v^T W u as graph ops: gradient w.r.t. W flows through the
    // bilinear form while u, v stay constant.
    Tensor vrow = Tensor::from_data({1, in}, v);
    Tensor ucol = Tensor::from_data({out, 1}, u);
    Tensor sigma = matmul(matmul(vrow, W), ucol);
    if (sigma.at(0) < kTinyNorm) return W;
    return div(W, sigma);
}

Tensor batch_norm_train(BatchNorm& bn, const Tensor& x) {
    std::size_t d = bn.gamma.size();
    if (x.rank() != 2 || x.cols() != d) {
        throw DimensionError("batch_norm: input " + shape_str(x.shape()) + " vs " +
                             std::to_string(d) + " features");
    }
    std::size_t m = x.rows();
    if (m < 2) {
        throw DimensionError("batch_norm: train mode needs batch size >= 2, got " +
                             std::to_string(m));
    }

    const double* xd = x.data().data();
    std::vector<double> mu(d, 0.0), var(d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) mu[j] += xd[i * d + j];
    }
    for (double& v : mu) v /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double c = xd[i * d + j] - mu[j];
            var[j] += c * c;
        }
    }
    for (double& v : var) v /= static_cast<double>(m); // biased, used for normalization

    std::vector<double> inv_std(d);
    for (std::size_t j = 0; j < d; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + bn.eps);

    auto xhat = std::make_shared<std::vector<double>>(m * d);
    std::vector<double> y(m * d);
    const double* gd = bn.gamma.data().data();
    const double* bd = bn.beta.data().data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double h = (xd[i * d + j] - mu[j]) * inv_std[j];
            (*xhat)[i * d + j] = h;
            y[i * d + j] = gd[j] * h + bd[j];
        }
    }

    // Running stats track the unbiased batch variance.
    double unbias = static_cast<double>(m) / static_cast<double>(m - 1);
    for (std::size_t j = 0; j < d; ++j) {
        bn.running_mean[j] = (1.0 - bn.momentum) * bn.running_mean[j] + bn.momentum * mu[j];
        bn.running_var[j] = (1.0 - bn.momentum) * bn.running_var[j] + bn.momentum * var[j] * unbias;
    }

    bool traced = autodiff::tracing({&x, &bn.gamma, &bn.beta});
    Tensor out = autodiff::make_traced({m, d}, std::move(y), traced);
    if (traced) {
        Tensor xin = x, gamma = bn.gamma, beta = bn.beta;
        autodiff::push_backward([xin, gamma, beta, out, xhat, inv_std, m, d]() {
            auto g = autodiff::upstream_grad(out);
            if (g.empty()) return;
            std::vector<double> sum_g(d, 0.0), sum_gx(d, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < d; ++j) {
                    sum_g[j] += g[i * d + j];
                    sum_gx[j] += g[i * d + j] * (*xhat)[i * d + j];
                }
            }
            if (gamma.requires_grad()) autodiff::accumulate_grad(gamma, sum_gx);
            if (beta.requires_grad()) autodiff::accumulate_grad(beta, sum_g);
            if (xin.requires_grad()) {
                const double* gd = gamma.data().data();
                double inv_m = 1.0 / static_cast<double>(m);
                std::vector<double> gx(m * d);
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                        double centered = g[i * d + j] - sum_g[j] * inv_m -
                                          (*xhat)[i * d + j] * sum_gx[j] * inv_m;
                        gx[i * d + j] = gd[j] * inv_std[j] * centered;
                    }
                }
                autodiff::accumulate_grad(xin, gx);
            }
        });
    }
    return out;
}

Tensor batch_norm_eval(const BatchNorm& bn, const Tensor& x) {
    std::size_t d = bn.gamma.size();
    if (x.rank() != 2 || x.cols() != d) {
        throw DimensionError("batch_norm: input " + shape_str(x.shape()) + " vs " +
                             std::to_string(d) + " features");
    }
    std::size_t m = x.rows();
    std::vector<double> inv_std(d);
    for (std::size_t j = 0; j < d; ++j) inv_std[j] = 1.0 / std::sqrt(bn.running_var[j] + bn.eps);

    const double* xd = x.data().data();
    const double* gd = bn.gamma.data().data();
    const double* bd = bn.beta.data().data();
    auto xhat = std::make_shared<std::vector<double>>(m * d);
    std::vector<double> y(m * d);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            double h = (xd[i * d + j] - bn.running_mean[j]) * inv_std[j];
            (*xhat)[i * d + j] = h;
            y[i * d + j] = gd[j] * h + bd[j];
        }
    }

    bool traced = autodiff::tracing({&x, &bn.gamma, &bn.beta});
    Tensor out = autodiff::make_traced({m, d}, std::move(y), traced);
    if (traced) {
        Tensor xin = x, gamma = bn.gamma, beta = bn.beta;
        autodiff::push_backward([xin, gamma, beta, out, xhat, inv_std, m, d]() {
            auto g = autodiff::upstream_grad(out);
            if (g.empty()) return;
            if (gamma.requires_grad() || beta.requires_grad()) {
                std::vector<double> sum_g(d, 0.0), sum_gx(d, 0.0);
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                        sum_g[j] += g[i * d + j];
                        sum_gx[j] += g[i * d + j] * (*xhat)[i * d + j];
                    }
                }
                if (gamma.requires_grad()) autodiff::accumulate_grad(gamma, sum_gx);
                if (beta.requires_grad()) autodiff::accumulate_grad(beta, sum_g);
            }
            if (xin.requires_grad()) {
                const double* gd = gamma.data().data();
                std::vector<double> gx(m * d);
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < d; ++j) {
                        gx[i * d + j] = g[i * d + j] * gd[j] * inv_std[j];
                    }
                }
                autodiff::accumulate_grad(xin, gx);
            }
        });
    }
    return out;
}

namespace {

Tensor apply_layer(Layer& layer, const Tensor& x, Mode mode) {
    return std::visit(
        [&](auto& l) -> Tensor {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Dense>) {
                return add(matmul(x, l.weight), l.bias);
            } else if constexpr (std::is_same_v<T, SpectralDense>) {
                Tensor w_bar = spectral_normalize(l, mode == Mode::train);
                return add(matmul(x, w_bar), l.inner.bias);
            } else if constexpr (std::is_same_v<T, BatchNorm>) {
                return mode == Mode::train ? batch_norm_train(l, x) : batch_norm_eval(l, x);
            } else {
                return l.kind == Act::relu ? relu(x) : leaky_relu(x, l.slope);
            }
        },
        layer);
}

} // namespace

Tensor Network::forward(const Tensor& x, Mode mode) {
    Tensor h = x;
    for (Layer& layer : layers_) h = apply_layer(layer, h, mode);
    return h;
}

Tensor Network::infer(const Tensor& x) const {
    // Eval mode touches no layer state, so the cast is safe.
    return const_cast<Network*>(this)->forward(x, Mode::eval);
}

std::vector<Tensor> Network::parameters() {
    std::vector<Tensor> out;
    for (auto& [name, p] : named_parameters()) out.push_back(p);
    return out;
}

std::vector<std::pair<std::string, Tensor>> Network::named_parameters() {
    std::vector<std::pair<std::string, Tensor>> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        std::string prefix = "layer" + std::to_string(i) + ".";
        std::visit(
            [&](auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, Dense>) {
                    out.emplace_back(prefix + "weight", l.weight);
                    out.emplace_back(prefix + "bias", l.bias);
                } else if constexpr (std::is_same_v<T, SpectralDense>) {
                    out.emplace_back(prefix + "weight", l.inner.weight);
                    out.emplace_back(prefix + "bias", l.inner.bias);
                } else if constexpr (std::is_same_v<T, BatchNorm>) {
                    out.emplace_back(prefix + "gamma", l.gamma);
                    out.emplace_back(prefix + "beta", l.beta);
                }
            },
            layers_[i]);
    }
    return out;
}

void Network::zero_grad() {
    for (auto& p : parameters()) p.zero_grad();
}

Network Network::clone() const {
    Network copy;
    for (const Layer& layer : layers_) {
        std::visit(
            [&](const auto& l) {
                using T = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<T, Dense>) {
                    copy.add(Dense{l.weight.clone(), l.bias.clone()});
                } else if constexpr (std::is_same_v<T, SpectralDense>) {
                    copy.add(SpectralDense{{l.inner.weight.clone(), l.inner.bias.clone()},
                                           l.u, l.n_power_iters});
                } else if constexpr (std::is_same_v<T, BatchNorm>) {
                    copy.add(BatchNorm{l.gamma.clone(), l.beta.clone(), l.running_mean,
                                       l.running_var, l.momentum, l.eps});
                } else {
                    copy.add(l);
                }
            },
            layer);
    }
    return copy;
}

Adam::Adam(std::vector<std::pair<std::string, Tensor>> params, double lr, double beta1,
           double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (auto& [name, p] : params) {
        slots_.push_back(Slot{name, p, std::vector<double>(p.size(), 0.0),
                              std::vector<double>(p.size(), 0.0)});
    }
}

void Adam::step() {
    ++t_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (Slot& slot : slots_) {
        if (!slot.param.has_grad()) continue;
        auto g = slot.param.grad();
        auto p = slot.param.mutable_data();
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (!std::isfinite(g[i])) {
                throw TrainingError("adam: non-finite gradient in " + slot.name + " at step " +
                                    std::to_string(t_));
            }
            slot.m[i] = beta1_ * slot.m[i] + (1.0 - beta1_) * g[i];
            slot.v[i] = beta2_ * slot.v[i] + (1.0 - beta2_) * g[i] * g[i];
            double m_hat = slot.m[i] / bc1;
            double v_hat = slot.v[i] / bc2;
            p[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
        }
    }
}

void Adam::zero_grad() {
    for (Slot& slot : slots_) slot.param.zero_grad();
}

Dense make_dense(std::size_t in, std::size_t out, std::mt19937_64& rng) {
    Tensor w = Tensor::zeros({in, out});
    fill_gaussian(w.mutable_data(), rng, 0.0, 0.02);
    w.set_requires_grad(true);
    Tensor b = Tensor::zeros({out});
    b.set_requires_grad(true);
    return Dense{w, b};
}

namespace {

void check_dims(const std::vector<std::size_t>& dims) {
    if (dims.size() < 2) {
        throw ConfigError("network dims need at least input and output sizes");
    }
    for (std::size_t d : dims) {
        if (d == 0) throw ConfigError("network dims must be positive");
    }
}

BatchNorm make_batch_norm(std::size_t d) {
    Tensor gamma = Tensor::full({d}, 1.0);
    gamma.set_requires_grad(true);
    Tensor beta = Tensor::zeros({d});
    beta.set_requires_grad(true);
    return BatchNorm{gamma, beta, std::vector<double>(d, 0.0), std::vector<double>(d, 1.0),
                     0.1, 1e-5};
}

} // namespace

Network make_mlp_generator(const std::vector<std::size_t>& dims, std::uint64_t seed) {
    check_dims(dims);
    std::mt19937_64 rng(seed);
    Network net;
    for (std::size_t s = 0; s + 1 < dims.size(); ++s) {
        net.add(make_dense(dims[s], dims[s + 1], rng));
        bool last = s + 2 == dims.size();
        if (!last) {
            net.add(make_batch_norm(dims[s + 1]));
            net.add(Activation{Act::relu, 0.0});
        }
        // output stage stays linear: no batch norm, no activation
    }
    return net;
}

Network make_mlp_discriminator(const std::vector<std::size_t>& dims, std::uint64_t seed,
                               double leaky_slope) {
    check_dims(dims);
    std::mt19937_64 rng(seed);
    Network net;
    for (std::size_t s = 0; s + 1 < dims.size(); ++s) {
        SpectralDense layer{make_dense(dims[s], dims[s + 1], rng),
                            std::vector<double>(dims[s + 1]), 1};
        fill_gaussian(layer.u, rng);
        double nu = vec_norm(layer.u);
        for (double& x : layer.u) x /= nu;
        net.add(std::move(layer));
        if (s + 2 < dims.size()) net.add(Activation{Act::leaky_relu, leaky_slope});
    }
    return net;
}

} // namespace algan
