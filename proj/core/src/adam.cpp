#include "volcast/adam.hpp"

#include <cmath>

#include "volcast/errors.hpp"

namespace volcast {

AdamState::AdamState(const ParamSet& params, AdamConfig cfg) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& e : params) {
        m_.emplace_back(e.array->rows(), e.array->cols());
        v_.emplace_back(e.array->rows(), e.array->cols());
    }
}

void AdamState::step(const ParamSet& params, std::span<const Array> grads) {
    if (grads.size() != params.size()) throw ShapeError("adam_step: gradient count mismatch");
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (size_t i = 0; i < params.size(); ++i) {
        Array& p = *params[i].array;
        const Array& g = grads[i];
        if (!g.same_shape(p))
            throw ShapeError("adam_step: gradient shape mismatch for " + params[i].name);
        Array& m = m_[i];
        Array& v = v_[i];
        for (int k = 0; k < p.size(); ++k) {
            m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
            v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
            const double m_hat = m[k] / bc1;
            const double v_hat = v[k] / bc2;
            p[k] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
        }
    }
}

}  // namespace volcast
