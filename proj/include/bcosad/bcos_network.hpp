#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bcosad/dataset.hpp"
#include "bcosad/numerics.hpp"
#include "bcosad/rng.hpp"

namespace bcosad {

inline constexpr double kDefaultB = 1.5;

/// Bias-free B-cos layer. Unit u computes bcos_unit(x, weights.row(u), b_exponent).
struct BcosLayer {
    Matrix weights;  ///< out_dim x in_dim
    double b_exponent = kDefaultB;

    std::size_t in_dim() const noexcept { return weights.cols(); }
    std::size_t out_dim() const noexcept { return weights.rows(); }
    bool operator==(const BcosLayer&) const = default;
};

/// Stack of B-cos layers ending in a two-node head
/// (node 0 = normal, node 1 = outlier).
class BcosNetwork {
  public:
    static constexpr std::size_t kHeadDim = 2;
    static constexpr std::size_t kNormalNode = 0;
    static constexpr std::size_t kOutlierNode = 1;

    BcosNetwork() = default;
    /// Validates: at least two layers, chained dims, head of width 2, B > 1.
    explicit BcosNetwork(std::vector<BcosLayer> layers);

    /// Weights uniform in [-1/sqrt(in_dim), 1/sqrt(in_dim)], drawn layer by
    /// layer in row-major order. dims = {input, hidden..., 2}.
    static BcosNetwork random(std::span<const std::size_t> dims, Rng& rng, double b = kDefaultB);
    static BcosNetwork random(std::span<const std::size_t> dims, Rng& rng,
                              std::span<const double> b_per_layer);

    std::size_t layer_count() const noexcept { return layers_.size(); }
    std::size_t input_dim() const noexcept { return layers_.front().in_dim(); }
    const std::vector<BcosLayer>& layers() const noexcept { return layers_; }
    std::vector<BcosLayer>& mutable_layers() noexcept { return layers_; }
    const BcosLayer& layer(std::size_t i) const { return layers_.at(i); }
    /// {input, hidden..., 2}
    std::vector<std::size_t> dims() const;

    bool operator==(const BcosNetwork&) const = default;

  private:
    std::vector<BcosLayer> layers_;
};

/// Quantities recorded during one forward pass. inputs[l] feeds layer l, so
/// inputs[0] is the raw input and outputs.back() are the logits.
struct ActivationTrace {
    std::vector<Vec> inputs;
    std::vector<Vec> cosines;  ///< cosines[l][u] = cos(inputs[l], w_{l,u}), 0 under the norm floor
    std::vector<Vec> outputs;

    const Vec& logits() const { return outputs.back(); }
};

struct ForwardResult {
    Vec logits;
    ActivationTrace trace;
};

/// |x| |w| |cos|^B sign(cos), evaluated as (w.x) |cos|^(B-1) so that it equals
/// dot(effective_weight(x, w, B), x). Returns 0 when either norm is below
/// kNormFloor.
double bcos_unit(ConstSpan x, ConstSpan w, double b);

/// w |cos(x, w)|^(B-1); the zero vector under the norm floor.
Vec effective_weight(ConstSpan x, ConstSpan w, double b);

ForwardResult forward(const BcosNetwork& net, ConstSpan x);

/// Row `to_node` of the product of effective-weight matrices of layers
/// from_layer..L-1, built from the traced inputs. Its dot product with
/// trace.inputs[from_layer] reproduces the logit of `to_node`.
Vec collapse(const BcosNetwork& net, const ActivationTrace& trace, std::size_t from_layer,
             std::size_t to_node);

/// Traced input of layer `layer`; layer 0 is the raw input.
Vec features(const BcosNetwork& net, ConstSpan x, std::size_t layer);

/// Input of the head layer (the penultimate representation).
inline std::size_t default_feature_layer(const BcosNetwork& net) { return net.layer_count() - 1; }

/// Independent logistic loss on each head node: node `label` has target 1,
/// the other node target 0. Summed over both nodes.
double logistic_loss(ConstSpan logits, int label);

struct GradientResult {
    double loss = 0.0;
    std::vector<Matrix> weight_grads;  ///< one per layer, same shape as the weights
};

/// Analytic gradient of logistic_loss with respect to every weight. Units
/// whose |cos| falls below kNormFloor contribute zero local derivative.
GradientResult gradients(const BcosNetwork& net, ConstSpan x, int label, double logit_scale = 1.0);

enum class Optimizer { Sgd, Adam };
const char* to_string(Optimizer o);
Optimizer parse_optimizer(const std::string& name);

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t epochs = 200;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    /// Rescale every weight row to unit norm after each step (and once
    /// before training), so outputs can only grow through alignment.
    bool unit_norm_rows = false;
    /// The loss sees logit_scale * logits; the network itself is unchanged.
    double logit_scale = 1.0;
    /// Decoupled decay: w -= learning_rate * weight_decay * w each step.
    double weight_decay = 0.0;
    Optimizer optimizer = Optimizer::Sgd;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
};

struct TrainReport {
    std::vector<double> epoch_loss;  ///< mean loss over all samples after each epoch
    std::vector<double> epoch_accuracy;
};

/// Mini-batch training (Adam or plain SGD) on normals (label 0) vs outliers (label 1).
/// Sample order is reshuffled every epoch from cfg.seed; the result depends
/// only on (net, data, cfg). The input network is not modified.
BcosNetwork train(const BcosNetwork& net, const DatasetTable& normals, const DatasetTable& outliers,
                  const TrainConfig& cfg, TrainReport* report = nullptr);

/// Fraction of samples whose larger logit matches the label.
double accuracy(const BcosNetwork& net, const DatasetTable& normals, const DatasetTable& outliers);

// Binary model container; byte layout in docs/model_format.md.
inline constexpr std::uint32_t kModelFormatVersion = 1;
void save_model(const BcosNetwork& net, std::ostream& out);
void save_model(const BcosNetwork& net, const std::string& path);
BcosNetwork load_model(std::istream& in);
BcosNetwork load_model(const std::string& path);

}  // namespace bcosad
