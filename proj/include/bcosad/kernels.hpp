#pragma once

#include <cstddef>

#include "bcosad/bcos_network.hpp"
#include "bcosad/dataset.hpp"
#include "bcosad/scoring.hpp"

// Batch scoring kernels. Every kernel exists twice: `serial` is the reference
// implementation, `omp` distributes samples over OpenMP threads. Each sample
// is computed independently with the same code path, so both produce
// bit-identical results in sample order.
namespace bcosad::kernels {

struct RawScores {
    Vec ffs;
    Vec ens;
};

namespace serial {

Matrix batch_features(const BcosNetwork& net, const Matrix& samples, std::size_t layer);
Vec batch_ffs(const MemoryBank& bank, const Matrix& queries, std::size_t k);
/// Scores every bank row against the remaining rows.
Vec batch_ffs_leave_one_out(const MemoryBank& bank, std::size_t k);
Vec batch_ens(const BcosNetwork& net, const Matrix& samples, std::size_t layer, std::size_t node);
/// FFS and ENS from a single forward pass per sample.
RawScores batch_scores(const BcosNetwork& net, const MemoryBank& bank, const Matrix& samples,
                       const ScoreConfig& cfg);

}  // namespace serial

namespace omp {

Matrix batch_features(const BcosNetwork& net, const Matrix& samples, std::size_t layer);
Vec batch_ffs(const MemoryBank& bank, const Matrix& queries, std::size_t k);
Vec batch_ffs_leave_one_out(const MemoryBank& bank, std::size_t k);
Vec batch_ens(const BcosNetwork& net, const Matrix& samples, std::size_t layer, std::size_t node);
RawScores batch_scores(const BcosNetwork& net, const MemoryBank& bank, const Matrix& samples,
                       const ScoreConfig& cfg);

}  // namespace omp

}  // namespace bcosad::kernels
