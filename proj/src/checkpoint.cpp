#include "algan/checkpoint.hpp"

#include "algan/errors.hpp"

#include <json.hpp>

#include <fstream>

namespace algan {

namespace {

using nlohmann::json;

constexpr const char* kFormatTag = "algan-checkpoint-v1";

json tensor_to_json(const Tensor& t) {
    json j;
    j["shape"] = t.shape();
    j["data"] = std::vector<double>(t.data().begin(), t.data().end());
    return j;
}

Tensor tensor_from_json(const json& j, bool requires_grad) {
    Shape shape = j.at("shape").get<Shape>();
    auto data = j.at("data").get<std::vector<double>>();
    Tensor t = Tensor::from_data(std::move(shape), std::move(data));
    t.set_requires_grad(requires_grad);
    return t;
}

json layer_to_json(const Layer& layer) {
    json j;
    std::visit(
        [&](const auto& l) {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, Dense>) {
                j["type"] = "dense";
                j["weight"] = tensor_to_json(l.weight);
                j["bias"] = tensor_to_json(l.bias);
            } else if constexpr (std::is_same_v<T, SpectralDense>) {
                j["type"] = "spectral_dense";
                j["weight"] = tensor_to_json(l.inner.weight);
                j["bias"] = tensor_to_json(l.inner.bias);
                j["u"] = l.u;
                j["power_iters"] = l.n_power_iters;
            } else if constexpr (std::is_same_v<T, BatchNorm>) {
                j["type"] = "batch_norm";
                j["gamma"] = tensor_to_json(l.gamma);
                j["beta"] = tensor_to_json(l.beta);
                j["running_mean"] = l.running_mean;
                j["running_var"] = l.running_var;
                j["momentum"] = l.momentum;
                j["eps"] = l.eps;
            } else {
                j["type"] = "activation";
                j["kind"] = l.kind == Act::relu ? "relu" : "leaky_relu";
                j["slope"] = l.slope;
            }
        },
        layer);
    return j;
}

Layer layer_from_json(const json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "dense") {
        return Dense{tensor_from_json(j.at("weight"), true), tensor_from_json(j.at("bias"), true)};
    }
    if (type == "spectral_dense") {
        return SpectralDense{{tensor_from_json(j.at("weight"), true),
                              tensor_from_json(j.at("bias"), true)},
                             j.at("u").get<std::vector<double>>(),
                             j.at("power_iters").get<int>()};
    }
    if (type == "batch_norm") {
        return BatchNorm{tensor_from_json(j.at("gamma"), true),
                         tensor_from_json(j.at("beta"), true),
                         j.at("running_mean").get<std::vector<double>>(),
                         j.at("running_var").get<std::vector<double>>(),
                         j.at("momentum").get<double>(),
                         j.at("eps").get<double>()};
    }
    if (type == "activation") {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind != "relu" && kind != "leaky_relu") {
            throw ParseError("checkpoint: unknown activation kind '" + kind + "'");
        }
        return Activation{kind == "relu" ? Act::relu : Act::leaky_relu,
                          j.at("slope").get<double>()};
    }
    throw ParseError("checkpoint: unknown layer type '" + type + "'");
}

json network_to_json(const Network& net) {
    json layers = json::array();
    for (const Layer& layer : net.layers()) layers.push_back(layer_to_json(layer));
    return layers;
}

Network network_from_json(const json& j) {
    Network net;
    for (const json& layer : j) net.add(layer_from_json(layer));
    return net;
}

} // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    json j;
    j["format"] = kFormatTag;
    j["seed"] = ckpt.seed;
    j["latent_dim"] = ckpt.latent_dim;
    j["sigma"] = ckpt.sigma;
    j["feature_mean"] = ckpt.feature_mean;
    j["feature_std"] = ckpt.feature_std;
    j["generator"] = network_to_json(ckpt.generator);
    j["discriminator"] = network_to_json(ckpt.discriminator);

    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(1) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    json j;
    try {
        in >> j;
        if (j.at("format").get<std::string>() != kFormatTag) {
            throw ParseError("checkpoint: unrecognized format tag in " + path.string());
        }
        Checkpoint ckpt;
        ckpt.seed = j.at("seed").get<std::uint64_t>();
        ckpt.latent_dim = j.at("latent_dim").get<std::size_t>();
        ckpt.sigma = j.at("sigma").get<double>();
        ckpt.feature_mean = j.at("feature_mean").get<std::vector<double>>();
        ckpt.feature_std = j.at("feature_std").get<std::vector<double>>();
        ckpt.generator = network_from_json(j.at("generator"));
        ckpt.discriminator = network_from_json(j.at("discriminator"));
        return ckpt;
    } catch (const json::exception& e) {
        throw ParseError("checkpoint: malformed file " + path.string() + ": " + e.what());
    }
}

} // namespace algan
