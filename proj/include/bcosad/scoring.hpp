#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "bcosad/bcos_network.hpp"
#include "bcosad/dataset.hpp"
#include "bcosad/numerics.hpp"

namespace bcosad {

/// Features of all training-normal samples at one layer. Frozen after build.
class MemoryBank {
  public:
    /// Throws ConfigError for fewer than two rows.
    MemoryBank(Matrix features, std::size_t source_layer);

    const Matrix& features() const noexcept { return features_; }
    std::size_t source_layer() const noexcept { return source_layer_; }
    std::size_t feature_dim() const noexcept { return features_.cols(); }
    std::size_t size() const noexcept { return features_.rows(); }

  private:
    Matrix features_;
    std::size_t source_layer_;
};

MemoryBank build_memory_bank(const BcosNetwork& net, const DatasetTable& normals, std::size_t layer);

/// Sum of Euclidean distances from `feature` to its k nearest bank rows.
/// Ties are broken by the lower row index. `exclude_row` skips one row, which
/// lets a bank member be scored against the others.
double ffs(const MemoryBank& bank, ConstSpan feature, std::size_t k,
           std::optional<std::size_t> exclude_row = std::nullopt);

/// 1 - cos(collapse(net, trace, layer, node), trace.inputs[layer]), in [0, 2].
/// A vanished explanation scores 1.
double ens(const BcosNetwork& net, ConstSpan x, std::size_t layer, std::size_t node);
double ens_from_trace(const BcosNetwork& net, const ActivationTrace& trace, std::size_t layer,
                      std::size_t node);

struct ChannelStats {
    double mean = 0.0;
    double std = 1.0;  ///< population std, floored at kStdFloor

    double z(double raw) const noexcept { return (raw - mean) / std; }
    bool operator==(const ChannelStats&) const = default;
};

inline constexpr double kStdFloor = 1e-12;

struct Normalization {
    ChannelStats ffs;
    ChannelStats ens;
    bool operator==(const Normalization&) const = default;
};

ChannelStats fit_channel(std::span<const double> values);

/// Z-score statistics per channel, fitted on training-normal scores only.
Normalization fit_normalization(std::span<const double> ffs_scores, std::span<const double> ens_scores);

struct ScoreConfig {
    std::size_t k = 2;
    std::size_t novelty_layer = 0;
    std::size_t target_node = BcosNetwork::kNormalNode;
    double joint_weight = 1.0;
    std::optional<std::size_t> feature_layer;  ///< unset = penultimate representation
    std::optional<Normalization> normalization;
};

struct ScoreRecord {
    double ffs_raw = 0.0;
    double ens_raw = 0.0;
    double ffs_norm = 0.0;
    double ens_norm = 0.0;
    double joint = 0.0;
    std::size_t layer_used = 0;
    std::size_t node_used = 0;
};

/// joint = z(ffs_raw) + w * z(ens_raw). Throws StateError if the
/// normalization has not been fitted.
ScoreRecord joint_score(double ffs_raw, double ens_raw, const ScoreConfig& cfg);

}  // namespace bcosad
