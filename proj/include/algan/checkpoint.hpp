#pragma once

#include "algan/nn.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace algan {

// Everything needed to re-score data with a trained model pair. feature_mean
// and feature_std are empty when inputs were not standardized.
struct Checkpoint {
    std::uint64_t seed = 0;
    std::size_t latent_dim = 100;
    double sigma = 4.0;
    std::vector<double> feature_mean;
    std::vector<double> feature_std;
    Network generator;
    Network discriminator;
};

// JSON on disk. Doubles are written in round-trip form: save then load yields
// bitwise-identical parameters, state, and therefore eval outputs.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace algan
