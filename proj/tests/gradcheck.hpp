#pragma once

#include <algorithm>
#include <cmath>

#include "bcosad/bcos_network.hpp"

namespace testutil {

struct GradCheck {
    double max_rel = 0.0;
    std::size_t checked = 0;
    std::size_t skipped = 0;
};

// Central differences on every weight. Rows of units with |cos| < cos_skip are
// skipped. The relative error is |a - n| / max(|a|, |n|, floor): below
// `floor` the central difference itself is dominated by rounding.
inline GradCheck check_gradients(const bcosad::BcosNetwork& net, bcosad::ConstSpan x, int label,
                                 double h = 1e-5, double cos_skip = 1e-6, double floor = 1e-6) {
    using namespace bcosad;
    GradCheck out;
    const auto analytic = gradients(net, x, label);
    const auto trace = forward(net, x).trace;
    BcosNetwork probe = net;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const auto& layer = net.layer(l);
        for (std::size_t u = 0; u < layer.out_dim(); ++u) {
            if (std::abs(trace.cosines[l][u]) < cos_skip) {
                out.skipped += layer.in_dim();
                continue;
            }
            for (std::size_t i = 0; i < layer.in_dim(); ++i) {
                double& w = probe.mutable_layers()[l].weights(u, i);
                const double saved = w;
                w = saved + h;
                const double up = logistic_loss(forward(probe, x).logits, label);
                w = saved - h;
                const double down = logistic_loss(forward(probe, x).logits, label);
                w = saved;
                const double numeric = (up - down) / (2.0 * h);
                const double a = analytic.weight_grads[l](u, i);
                const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
                out.max_rel = std::max(out.max_rel, rel);
                ++out.checked;
            }
        }
    }
    return out;
}

}  // namespace testutil
