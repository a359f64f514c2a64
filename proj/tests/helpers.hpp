#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bcosad/bcos_network.hpp"
#include "bcosad/rng.hpp"

namespace testutil {

inline std::filesystem::path tmp_dir(const std::string& name) {
    auto p = std::filesystem::path(BCOSAD_TEST_TMP) / name;
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline bcosad::Vec random_vec(std::size_t n, bcosad::Rng& rng) {
    bcosad::Vec v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

// dims {in, hidden..., 2} with 2..4 layers and widths in [lo, hi]
inline bcosad::BcosNetwork random_net(bcosad::Rng& rng, std::size_t lo = 4, std::size_t hi = 16, double b = 0.0) {
    const std::size_t layers = 2 + rng.uniform_index(3);
    std::vector<std::size_t> dims;
    for (std::size_t l = 0; l < layers; ++l) dims.push_back(lo + rng.uniform_index(hi - lo + 1));
    dims.push_back(2);
    if (b > 0.0) return bcosad::BcosNetwork::random(dims, rng, b);
    const double choices[] = {1.25, 1.5, 2.0};
    return bcosad::BcosNetwork::random(dims, rng, choices[rng.uniform_index(3)]);
}

}  // namespace testutil
