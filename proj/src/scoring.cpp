#include "bcosad/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bcosad/errors.hpp"

namespace bcosad {

MemoryBank::MemoryBank(Matrix features, std::size_t source_layer)
    : features_(std::move(features)), source_layer_(source_layer) {
    if (features_.rows() < 2) throw ConfigError("MemoryBank: at least two rows required");
}

MemoryBank build_memory_bank(const BcosNetwork& net, const DatasetTable& normals, std::size_t layer) {
    if (normals.size() < 2) throw ConfigError("build_memory_bank: at least two normal samples required");
    if (layer >= net.layer_count()) throw IndexError("build_memory_bank: layer out of range");
    Matrix rows;
    for (std::size_t i = 0; i < normals.size(); ++i) rows.append_row(features(net, normals.row(i), layer));
    return MemoryBank(std::move(rows), layer);
}

double ffs(const MemoryBank& bank, ConstSpan feature, std::size_t k, std::optional<std::size_t> exclude_row) {
    if (feature.size() != bank.feature_dim()) throw DimensionError("ffs: feature width does not match bank");
    const std::size_t available = bank.size() - (exclude_row && *exclude_row < bank.size() ? 1 : 0);
    if (k == 0 || k > available) throw ConfigError("ffs: k must be in [1, bank rows]");

    // Keep the k best (squared distance, row) pairs; lexicographic order
    // gives the lower-index tie-break.
    std::vector<std::pair<double, std::size_t>> best;
    best.reserve(k + 1);
    for (std::size_t r = 0; r < bank.size(); ++r) {
        if (exclude_row && r == *exclude_row) continue;
        const std::pair<double, std::size_t> cand{squared_distance(bank.features().row(r), feature), r};
        if (best.size() == k && !(cand < best.back())) continue;
        best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
        if (best.size() > k) best.pop_back();
    }
    double sum = 0.0;
    for (const auto& [d2, r] : best) sum += std::sqrt(d2);
    return sum;
}

double ens_from_trace(const BcosNetwork& net, const ActivationTrace& trace, std::size_t layer,
                      std::size_t node) {
    const Vec explanation = collapse(net, trace, layer, node);
    return 1.0 - cosine(explanation, trace.inputs[layer]);
}

double ens(const BcosNetwork& net, ConstSpan x, std::size_t layer, std::size_t node) {
    if (layer >= net.layer_count()) throw IndexError("ens: layer out of range");
    if (node >= BcosNetwork::kHeadDim) throw IndexError("ens: node must be 0 or 1");
    return ens_from_trace(net, forward(net, x).trace, layer, node);
}

ChannelStats fit_channel(std::span<const double> values) {
    if (values.size() < 2) throw ConfigError("fit_normalization: at least two values per channel required");
    // Shifted by the first value so a constant channel has an exact mean.
    const double origin = values.front();
    double offset = 0.0;
    for (double v : values) offset += v - origin;
    const double mean = origin + offset / static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    return {mean, std::max(std::sqrt(var), kStdFloor)};
}

Normalization fit_normalization(std::span<const double> ffs_scores, std::span<const double> ens_scores) {
    return {fit_channel(ffs_scores), fit_channel(ens_scores)};
}

ScoreRecord joint_score(double ffs_raw, double ens_raw, const ScoreConfig& cfg) {
    if (!cfg.normalization) throw StateError("joint_score: normalization has not been fitted");
    ScoreRecord r;
    r.ffs_raw = ffs_raw;
    r.ens_raw = ens_raw;
    r.ffs_norm = cfg.normalization->ffs.z(ffs_raw);
    r.ens_norm = cfg.normalization->ens.z(ens_raw);
    r.joint = r.ffs_norm + cfg.joint_weight * r.ens_norm;
    r.layer_used = cfg.novelty_layer;
    r.node_used = cfg.target_node;
    return r;
}

}  // namespace bcosad
