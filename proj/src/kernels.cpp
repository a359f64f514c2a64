#include "bcosad/kernels.hpp"

#include <cstdint>
#include <exception>
#include <string>

#include "bcosad/errors.hpp"

namespace bcosad::kernels {

namespace {

std::size_t feature_layer_of(const BcosNetwork& net, const ScoreConfig& cfg) {
    return cfg.feature_layer.value_or(default_feature_layer(net));
}

void check_scores_config(const BcosNetwork& net, const MemoryBank& bank, const ScoreConfig& cfg) {
    if (cfg.novelty_layer >= net.layer_count()) throw IndexError("novelty_layer out of range");
    if (cfg.target_node >= BcosNetwork::kHeadDim) throw IndexError("target_node must be 0 or 1");
    if (feature_layer_of(net, cfg) != bank.source_layer())
        throw ConfigError("feature layer does not match the memory bank's source layer");
}

// Per-sample bodies shared by both variants.
void features_into(const BcosNetwork& net, const Matrix& samples, std::size_t layer, Matrix& out,
                   std::size_t i) {
    const Vec f = features(net, samples.row(i), layer);
    std::copy(f.begin(), f.end(), out.row(i).begin());
}

void score_one(const BcosNetwork& net, const MemoryBank& bank, const Matrix& samples, const ScoreConfig& cfg,
               RawScores& out, std::size_t i) {
    const auto fw = forward(net, samples.row(i));
    out.ffs[i] = ffs(bank, fw.trace.inputs[bank.source_layer()], cfg.k);
    out.ens[i] = ens_from_trace(net, fw.trace, cfg.novelty_layer, cfg.target_node);
}

std::size_t feature_width(const BcosNetwork& net, std::size_t layer) {
    if (layer >= net.layer_count()) throw IndexError("batch_features: layer out of range");
    return net.dims()[layer];
}

// Exceptions must not escape an OpenMP region; the first one is rethrown
// after the loop.
class ErrorSlot {
  public:
    template <typename F>
    void run(F&& f) noexcept {
        try {
            f();
        } catch (...) {
#pragma omp critical(bcosad_error_slot)
            if (!error_) error_ = std::current_exception();
        }
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

  private:
    std::exception_ptr error_;
};

}  // namespace

namespace serial {

Matrix batch_features(const BcosNetwork& net, const Matrix& samples, std::size_t layer) {
    Matrix out(samples.rows(), feature_width(net, layer));
    for (std::size_t i = 0; i < samples.rows(); ++i) features_into(net, samples, layer, out, i);
    return out;
}

Vec batch_ffs(const MemoryBank& bank, const Matrix& queries, std::size_t k) {
    Vec out(queries.rows());
    for (std::size_t i = 0; i < queries.rows(); ++i) out[i] = ffs(bank, queries.row(i), k);
    return out;
}

Vec batch_ffs_leave_one_out(const MemoryBank& bank, std::size_t k) {
    Vec out(bank.size());
    for (std::size_t i = 0; i < bank.size(); ++i) out[i] = ffs(bank, bank.features().row(i), k, i);
    return out;
}

Vec batch_ens(const BcosNetwork& net, const Matrix& samples, std::size_t layer, std::size_t node) {
    Vec out(samples.rows());
    for (std::size_t i = 0; i < samples.rows(); ++i) out[i] = ens(net, samples.row(i), layer, node);
    return out;
}

RawScores batch_scores(const BcosNetwork& net, const MemoryBank& bank, const Matrix& samples,
                       const ScoreConfig& cfg) {
    check_scores_config(net, bank, cfg);
    RawScores out{Vec(samples.rows()), Vec(samples.rows())};
    for (std::size_t i = 0; i < samples.rows(); ++i) score_one(net, bank, samples, cfg, out, i);
    return out;
}

}  // namespace serial

namespace omp {

Matrix batch_features(const BcosNetwork& net, const Matrix& samples, std::size_t layer) {
    Matrix out(samples.rows(), feature_width(net, layer));
    const auto n = static_cast<std::int64_t>(samples.rows());
    ErrorSlot err;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        err.run([&] { features_into(net, samples, layer, out, static_cast<std::size_t>(i)); });
    err.rethrow();
    return out;
}

Vec batch_ffs(const MemoryBank& bank, const Matrix& queries, std::size_t k) {
    Vec out(queries.rows());
    const auto n = static_cast<std::int64_t>(queries.rows());
    ErrorSlot err;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        err.run([&] { out[i] = ffs(bank, queries.row(static_cast<std::size_t>(i)), k); });
    err.rethrow();
    return out;
}

Vec batch_ffs_leave_one_out(const MemoryBank& bank, std::size_t k) {
    Vec out(bank.size());
    const auto n = static_cast<std::int64_t>(bank.size());
    ErrorSlot err;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        err.run([&] {
            const auto r = static_cast<std::size_t>(i);
            out[r] = ffs(bank, bank.features().row(r), k, r);
        });
    }
    err.rethrow();
    return out;
}

Vec batch_ens(const BcosNetwork& net, const Matrix& samples, std::size_t layer, std::size_t node) {
    Vec out(samples.rows());
    const auto n = static_cast<std::int64_t>(samples.rows());
    ErrorSlot err;
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i)
        err.run([&] { out[i] = ens(net, samples.row(static_cast<std::size_t>(i)), layer, node); });
    err.rethrow();
    return out;
}

RawScores batch_scores(const BcosNetwork& net, const MemoryBank& bank, const Matrix& samples,
                       const ScoreConfig& cfg) {
    check_scores_config(net, bank, cfg);
    RawScores out{Vec(samples.rows()), Vec(samples.rows())};
    const auto n = static_cast<std::int64_t>(samples.rows());
    ErrorSlot err;
#pragma omp parallel for schedule(dynamic, 8)
    for (std::int64_t i = 0; i < n; ++i)
        err.run([&] { score_one(net, bank, samples, cfg, out, static_cast<std::size_t>(i)); });
    err.rethrow();
    return out;
}

}  // namespace omp

}  // namespace bcosad::kernels
