#pragma once

#include <cmath>
#include <cstdint>

#include "hcad/model/params.hpp"

namespace hcad::model {

struct AdamState {
    ModelParams m;  // first moments
    ModelParams v;  // second moments
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-7;
    double learning_rate = 1e-4;

    static AdamState for_params(const ModelParams& p, double learning_rate = 1e-4) {
        AdamState s;
        s.m = p.zeros_like();
        s.v = p.zeros_like();
        s.learning_rate = learning_rate;
        return s;
    }
};

/// Bias-corrected Adam update, in place.
inline void adam_step(ModelParams& params, const Gradients& grads, AdamState& s) {
    ++s.step;
    const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = s.m.tensors();
    auto v = s.v.tensors();
    for (std::size_t t = 0; t < p.size(); ++t) {
        for (std::size_t i = 0; i < p[t].size(); ++i) {
            const double gi = g[t][i];
            m[t][i] = s.beta1 * m[t][i] + (1.0 - s.beta1) * gi;
            v[t][i] = s.beta2 * v[t][i] + (1.0 - s.beta2) * gi * gi;
            const double m_hat = m[t][i] / bc1;
            const double v_hat = v[t][i] / bc2;
            p[t][i] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
        }
    }
}

}  // namespace hcad::model
