#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "volcast/array.hpp"
#include "volcast/params.hpp"

namespace volcast {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second-moment state congruent to one ParamSet.
class AdamState {
public:
    AdamState(const ParamSet& params, AdamConfig cfg);

    // In-place bias-corrected update: p -= lr * m_hat / (sqrt(v_hat) + eps).
    // `grads` are gradients of the loss being minimized, in ParamSet order.
    void step(const ParamSet& params, std::span<const Array> grads);

    int64_t step_count() const { return step_count_; }
    const AdamConfig& config() const { return cfg_; }

private:
    AdamConfig cfg_;
    std::vector<Array> m_, v_;
    int64_t step_count_ = 0;
};

}  // namespace volcast
