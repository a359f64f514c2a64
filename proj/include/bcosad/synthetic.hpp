#pragma once

#include <cstddef>
#include <cstdint>

#include "bcosad/dataset.hpp"

namespace bcosad {

/// Novel-feature benchmark: normals are a mixture of clusters inside a
/// low-dimensional subspace of the input space.
struct SyntheticConfig {
    std::size_t dim = 16;
    std::size_t subspace_dim = 4;
    std::size_t clusters = 3;
    std::size_t train_normals = 1000;
    std::size_t test_normals = 600;
    std::size_t test_familiar = 400;  ///< anomalies from a held-out cluster inside the subspace
    std::size_t test_novel = 400;     ///< normal-like samples plus energy in the orthogonal complement
    double offset = 4.0;              ///< distance of the cluster mixture from the origin
    double cluster_radius = 2.5;      ///< distance of cluster centres from the mixture centre
    double cluster_spread = 0.2;      ///< per-coordinate std inside a cluster
    double noise = 0.05;              ///< isotropic noise in every input coordinate
    double min_scale = 0.3;           ///< per-sample intensity factor, uniform in [min_scale, max_scale]
    double max_scale = 2.5;
    double novel_energy = 2.5;        ///< per-coordinate std of the orthogonal-complement component
    std::uint64_t seed = 1;
};

struct SyntheticBenchmark {
    DatasetTable train;          ///< train_normal, labels all 0
    DatasetTable test_familiar;  ///< test normals then familiar anomalies
    DatasetTable test_novel;     ///< test normals then novel anomalies
    DatasetTable test_combined;  ///< test normals, familiar, novel
};

SyntheticBenchmark make_synthetic_benchmark(const SyntheticConfig& cfg);

}  // namespace bcosad
