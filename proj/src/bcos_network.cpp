#include "bcosad/bcos_network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bcosad/errors.hpp"

namespace bcosad {

BcosNetwork::BcosNetwork(std::vector<BcosLayer> layers) : layers_(std::move(layers)) {
    if (layers_.size() < 2) throw ConfigError("BcosNetwork: at least two layers required");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& layer = layers_[l];
        if (layer.weights.empty()) throw ConfigError("BcosNetwork: empty layer " + std::to_string(l));
        if (!(layer.b_exponent > 1.0) || !std::isfinite(layer.b_exponent))
            throw ConfigError("BcosNetwork: B must be > 1 (layer " + std::to_string(l) + ")");
        require_finite(layer.weights.data(), "BcosNetwork weights");
        if (l > 0 && layer.in_dim() != layers_[l - 1].out_dim())
            throw DimensionError("BcosNetwork: layer " + std::to_string(l) +
                                 " input width does not match previous output");
    }
    if (layers_.back().out_dim() != kHeadDim)
        throw DimensionError("BcosNetwork: head layer must have 2 outputs");
}

BcosNetwork BcosNetwork::random(std::span<const std::size_t> dims, Rng& rng, double b) {
    std::vector<double> bs(dims.size() > 0 ? dims.size() - 1 : 0, b);
    return random(dims, rng, bs);
}

BcosNetwork BcosNetwork::random(std::span<const std::size_t> dims, Rng& rng,
                                std::span<const double> b_per_layer) {
    if (dims.size() < 3) throw ConfigError("BcosNetwork::random: need input, hidden and head dims");
    if (b_per_layer.size() != dims.size() - 1)
        throw DimensionError("BcosNetwork::random: one B per layer required");
    std::vector<BcosLayer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const std::size_t in = dims[l];
        const std::size_t out = dims[l + 1];
        if (in == 0 || out == 0) throw ConfigError("BcosNetwork::random: zero-width layer");
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Matrix w(out, in);
        for (double& v : w.data()) v = rng.uniform(-bound, bound);
        layers.push_back({std::move(w), b_per_layer[l]});
    }
    return BcosNetwork(std::move(layers));
}

std::vector<std::size_t> BcosNetwork::dims() const {
    std::vector<std::size_t> d;
    if (layers_.empty()) return d;
    d.push_back(layers_.front().in_dim());
    for (const auto& l : layers_) d.push_back(l.out_dim());
    return d;
}

namespace {

struct Alignment {
    double dot = 0.0;
    double cos = 0.0;
    double scale = 0.0;  // |cos|^(B-1), 0 under the norm floor
};

Alignment align(ConstSpan x, ConstSpan w, double norm_x, double b) {
    Alignment a;
    const double norm_w = norm(w);
    if (norm_x < kNormFloor || norm_w < kNormFloor) return a;
    a.dot = dot(x, w);
    a.cos = std::clamp(a.dot / (norm_x * norm_w), -1.0, 1.0);
    a.scale = std::pow(std::abs(a.cos), b - 1.0);
    return a;
}

void check_node(std::size_t node) {
    if (node >= BcosNetwork::kHeadDim) throw IndexError("node index must be 0 or 1");
}

}  // namespace

double bcos_unit(ConstSpan x, ConstSpan w, double b) {
    if (x.size() != w.size()) throw DimensionError("bcos_unit: length mismatch");
    const Alignment a = align(x, w, norm(x), b);
    return a.dot * a.scale;
}

Vec effective_weight(ConstSpan x, ConstSpan w, double b) {
    if (x.size() != w.size()) throw DimensionError("effective_weight: length mismatch");
    const Alignment a = align(x, w, norm(x), b);
    Vec out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] * a.scale;
    return out;
}

ForwardResult forward(const BcosNetwork& net, ConstSpan x) {
    if (net.layer_count() == 0) throw StateError("forward: empty network");
    if (x.size() != net.input_dim())
        throw DimensionError("forward: input has " + std::to_string(x.size()) + " values, network expects " +
                             std::to_string(net.input_dim()));
    ForwardResult r;
    auto& t = r.trace;
    const std::size_t L = net.layer_count();
    t.inputs.reserve(L);
    t.cosines.reserve(L);
    t.outputs.reserve(L);

    Vec current(x.begin(), x.end());
    for (const auto& layer : net.layers()) {
        const double nx = norm(current);
        Vec out(layer.out_dim());
        Vec cos(layer.out_dim());
        for (std::size_t u = 0; u < layer.out_dim(); ++u) {
            const Alignment a = align(current, layer.weights.row(u), nx, layer.b_exponent);
            out[u] = a.dot * a.scale;
            cos[u] = a.cos;
        }
        t.inputs.push_back(std::move(current));
        t.cosines.push_back(std::move(cos));
        t.outputs.push_back(out);
        current = std::move(out);
    }
    r.logits = t.outputs.back();
    return r;
}

Vec collapse(const BcosNetwork& net, const ActivationTrace& trace, std::size_t from_layer,
             std::size_t to_node) {
    const std::size_t L = net.layer_count();
    if (from_layer >= L) throw IndexError("collapse: from_layer out of range");
    check_node(to_node);
    if (trace.inputs.size() != L) throw DimensionError("collapse: trace does not match network");

    // Walk back from the head, multiplying the row vector by each layer's
    // effective-weight matrix.
    const auto& head = net.layers().back();
    Vec row = effective_weight(trace.inputs[L - 1], head.weights.row(to_node), head.b_exponent);
    for (std::size_t l = L - 1; l-- > from_layer;) {
        const auto& layer = net.layers()[l];
        const auto& input = trace.inputs[l];
        const double nx = norm(input);
        Vec next(layer.in_dim(), 0.0);
        for (std::size_t u = 0; u < layer.out_dim(); ++u) {
            if (row[u] == 0.0) continue;
            const auto w = layer.weights.row(u);
            const double s = row[u] * align(input, w, nx, layer.b_exponent).scale;
            if (s == 0.0) continue;
            for (std::size_t i = 0; i < next.size(); ++i) next[i] += s * w[i];
        }
        row = std::move(next);
    }
    return row;
}

Vec features(const BcosNetwork& net, ConstSpan x, std::size_t layer) {
    if (layer >= net.layer_count()) throw IndexError("features: layer out of range");
    auto r = forward(net, x);
    return std::move(r.trace.inputs[layer]);
}

namespace {

// log(1 + exp(v)) without overflow.
double softplus(double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); }

double sigmoid(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

}  // namespace

double logistic_loss(ConstSpan logits, int label) {
    if (logits.size() != BcosNetwork::kHeadDim) throw DimensionError("logistic_loss: two logits required");
    if (label != 0 && label != 1) throw ConfigError("logistic_loss: label must be 0 or 1");
    // Node `label` has target 1, the other node target 0.
    double loss = 0.0;
    for (std::size_t j = 0; j < BcosNetwork::kHeadDim; ++j)
        loss += j == static_cast<std::size_t>(label) ? softplus(-logits[j]) : softplus(logits[j]);
    return loss;
}

GradientResult gradients(const BcosNetwork& net, ConstSpan x, int label, double logit_scale) {
    const auto fw = forward(net, x);
    const auto& t = fw.trace;
    GradientResult g;
    const Vec scaled = {logit_scale * fw.logits[0], logit_scale * fw.logits[1]};
    g.loss = logistic_loss(scaled, label);

    // d loss / d logit_j = sigmoid(logit_j) - target_j
    Vec upstream = {sigmoid(scaled[0]), sigmoid(scaled[1])};
    upstream[static_cast<std::size_t>(label)] -= 1.0;
    for (double& u : upstream) u *= logit_scale;

    const std::size_t L = net.layer_count();
    g.weight_grads.resize(L);
    for (std::size_t l = L; l-- > 0;) {
        const auto& layer = net.layers()[l];
        const auto& a = t.inputs[l];
        const double na = norm(a);
        const double b = layer.b_exponent;
        Matrix gw(layer.out_dim(), layer.in_dim());
        Vec ga(layer.in_dim(), 0.0);
        for (std::size_t u = 0; u < layer.out_dim(); ++u) {
            const double gu = upstream[u];
            const double c = t.cosines[l][u];
            if (gu == 0.0 || std::abs(c) < kNormFloor) continue;
            const auto w = layer.weights.row(u);
            const double nw = norm(w);
            const double y = t.outputs[l][u];
            const double p = std::pow(std::abs(c), b - 1.0);
            // y = sign(d)|d|^B (|w||a|)^(1-B) with d = w.a
            const double cw_a = gu * b * p;
            const double cw_w = gu * (1.0 - b) * y / (nw * nw);
            const double ca_a = gu * (1.0 - b) * y / (na * na);
            auto row = gw.row(u);
            for (std::size_t i = 0; i < a.size(); ++i) {
                row[i] = cw_a * a[i] + cw_w * w[i];
                ga[i] += cw_a * w[i] + ca_a * a[i];
            }
        }
        g.weight_grads[l] = std::move(gw);
        upstream = std::move(ga);
    }
    return g;
}

namespace {

void check_training_data(const BcosNetwork& net, const DatasetTable& normals, const DatasetTable& outliers) {
    if (normals.size() == 0 || outliers.size() == 0) throw ConfigError("train: empty split");
    if (normals.dim() != net.input_dim() || outliers.dim() != net.input_dim())
        throw DimensionError("train: data width does not match network input");
}

}  // namespace

double accuracy(const BcosNetwork& net, const DatasetTable& normals, const DatasetTable& outliers) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < normals.size(); ++i) {
        const auto z = forward(net, normals.row(i)).logits;
        correct += z[0] > z[1] ? 1 : 0;
    }
    for (std::size_t i = 0; i < outliers.size(); ++i) {
        const auto z = forward(net, outliers.row(i)).logits;
        correct += z[1] > z[0] ? 1 : 0;
    }
    return static_cast<double>(correct) / static_cast<double>(normals.size() + outliers.size());
}

const char* to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(const std::string& name) {
    if (name == "sgd") return Optimizer::Sgd;
    if (name == "adam") return Optimizer::Adam;
    throw ConfigError("unknown optimizer '" + name + "' (expected sgd or adam)");
}

BcosNetwork train(const BcosNetwork& net, const DatasetTable& normals, const DatasetTable& outliers,
                  const TrainConfig& cfg, TrainReport* report) {
    check_training_data(net, normals, outliers);
    if (!(cfg.learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (cfg.batch_size == 0) throw ConfigError("train: batch_size must be positive");
    if (cfg.optimizer == Optimizer::Adam &&
        !(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0 && cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0 &&
          cfg.adam_epsilon > 0.0))
        throw ConfigError("train: adam betas must be in [0, 1) and epsilon positive");
    if (!(cfg.weight_decay >= 0.0) || cfg.learning_rate * cfg.weight_decay >= 1.0)
        throw ConfigError("train: weight_decay must be >= 0 and learning_rate * weight_decay < 1");

    BcosNetwork model = net;
    const std::size_t n_normal = normals.size();
    const std::size_t total = n_normal + outliers.size();
    auto sample = [&](std::size_t i) { return i < n_normal ? normals.row(i) : outliers.row(i - n_normal); };
    auto label_of = [&](std::size_t i) { return i < n_normal ? 0 : 1; };

    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(cfg.seed);

    auto normalize_rows = [&] {
        if (!cfg.unit_norm_rows) return;
        for (auto& layer : model.mutable_layers()) {
            for (std::size_t u = 0; u < layer.out_dim(); ++u) {
                auto row = layer.weights.row(u);
                const double n = norm(row);
                if (n < kNormFloor) continue;
                for (double& v : row) v /= n;
            }
        }
    };
    if (cfg.epochs > 0) normalize_rows();

    std::vector<Matrix> acc, moment1, moment2;
    for (const auto& layer : model.layers()) {
        moment1.emplace_back(layer.out_dim(), layer.in_dim());
        moment2.emplace_back(layer.out_dim(), layer.in_dim());
    }
    std::uint64_t steps = 0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        // Fisher-Yates, spelled out so the permutation is reproducible.
        for (std::size_t i = total; i > 1; --i) std::swap(order[i - 1], order[rng.uniform_index(i)]);

        for (std::size_t start = 0; start < total; start += cfg.batch_size) {
            const std::size_t end = std::min(total, start + cfg.batch_size);
            acc.clear();
            for (const auto& layer : model.layers()) acc.emplace_back(layer.out_dim(), layer.in_dim());
            for (std::size_t k = start; k < end; ++k) {
                const auto g = gradients(model, sample(order[k]), label_of(order[k]), cfg.logit_scale);
                for (std::size_t l = 0; l < acc.size(); ++l) {
                    auto& dst = acc[l].data();
                    const auto& src = g.weight_grads[l].data();
                    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
                }
            }
            const double inv_batch = 1.0 / static_cast<double>(end - start);
            const double shrink = 1.0 - cfg.learning_rate * cfg.weight_decay;
            ++steps;
            const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(steps));
            const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(steps));
            for (std::size_t l = 0; l < acc.size(); ++l) {
                auto& w = model.mutable_layers()[l].weights.data();
                const auto& gsum = acc[l].data();
                if (cfg.optimizer == Optimizer::Sgd) {
                    for (std::size_t i = 0; i < w.size(); ++i) w[i] = shrink * w[i] - cfg.learning_rate * inv_batch * gsum[i];
                } else {
                    auto& m = moment1[l].data();
                    auto& v = moment2[l].data();
                    for (std::size_t i = 0; i < w.size(); ++i) {
                        const double g = gsum[i] * inv_batch;
                        m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
                        v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
                        w[i] = shrink * w[i] - cfg.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.adam_epsilon);
                    }
                }
                // Row norms must stay finite too, or every cosine collapses to 0.
                const auto& layer = model.layers()[l];
                for (std::size_t u = 0; u < layer.out_dim(); ++u)
                    if (!std::isfinite(norm(layer.weights.row(u))))
                        throw ConfigError("train: weights diverged in epoch " + std::to_string(epoch) +
                                          "; lower the learning rate");
            }
            normalize_rows();
        }

        if (report) {
            double loss = 0.0;
            std::size_t correct = 0;
            for (std::size_t i = 0; i < total; ++i) {
                const auto z = forward(model, sample(i)).logits;
                loss += logistic_loss(Vec{cfg.logit_scale * z[0], cfg.logit_scale * z[1]}, label_of(i));
                const int predicted = z[1] > z[0] ? 1 : 0;
                correct += predicted == label_of(i) ? 1 : 0;
            }
            report->epoch_loss.push_back(loss / static_cast<double>(total));
            report->epoch_accuracy.push_back(static_cast<double>(correct) / static_cast<double>(total));
        }
    }
    return model;
}

}  // namespace bcosad
