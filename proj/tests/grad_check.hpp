#pragma once

// Central finite-difference oracle shared by unit and acceptance tests. It only
// calls the forward loss, never the analytic backward pass.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "anx/encoder.hpp"

namespace anx::testing {

struct GroupError {
    std::string name;
    double relative_error{0.0};
    double analytic_norm{0.0};
};

/// |a - n| / (|a| + |n|) over a whole tensor. The denominator is floored at
/// 1e-4, so a group whose true gradient is identically zero (key biases:
/// softmax ignores a per-row shift) must match to 1e-8 in absolute terms.
inline double group_relative_error(const transformer::Matrix& analytic, const transformer::Matrix& numeric) {
    const double diff = (analytic - numeric).norm();
    const double scale = std::max(analytic.norm() + numeric.norm(), 1e-4);
    return diff / scale;
}

/// Numerical gradient of `loss` w.r.t. every entry of every tensor in `model`.
inline transformer::EncoderParams numeric_gradient(transformer::EncoderModel model,
                                                   const std::function<double(const transformer::EncoderModel&)>& loss,
                                                   double h = 1e-6) {
    transformer::EncoderParams grad = model.params.zeros_like();
    auto params = model.params.named();
    auto grads = grad.named();
    for (std::size_t t = 0; t < params.size(); ++t) {
        transformer::Matrix& p = *params[t].second;
        transformer::Matrix& g = *grads[t].second;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double saved = p.data()[i];
            p.data()[i] = saved + h;
            const double up = loss(model);
            p.data()[i] = saved - h;
            const double down = loss(model);
            p.data()[i] = saved;
            g.data()[i] = (up - down) / (2.0 * h);
        }
    }
    return grad;
}

/// Tiny encoder with every tensor randomized (including layer norms and the
/// head) so no gradient group is trivially zero.
inline transformer::EncoderModel randomized_tiny_model(std::uint64_t seed, std::size_t vocab_size = 12) {
    transformer::EncoderConfig cfg;
    cfg.vocab_size = vocab_size;
    cfg.d_model = 8;
    cfg.n_heads = 1;
    cfg.n_layers = 1;
    cfg.d_ff = 16;
    cfg.max_len = 6;
    cfg.dropout_p = 0.0;
    auto model = transformer::EncoderModel::initialize(cfg, seed);
    Rng rng(seed ^ 0xabcdefULL);
    for (auto& [name, m] : model.params.named()) {
        for (Eigen::Index i = 0; i < m->size(); ++i) {
            m->data()[i] += 0.3 * rng.normal();
        }
    }
    return model;
}

}  // namespace anx::testing
