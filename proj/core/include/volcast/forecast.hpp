#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "volcast/dsvm.hpp"
#include "volcast/rng.hpp"

namespace volcast::forecast {

// Equal-weight mixture of zero-mean Gaussians, one component per posterior
// sample path.
struct PredictiveMixture {
    std::vector<double> sigmas;

    int components() const { return static_cast<int>(sigmas.size()); }
};

struct ForecastRecord {
    std::string timestamp;
    double realized = 0.0;
    double pred_vol = 0.0;
    double pred_nll = 0.0;
    bool flagged = false;  // set when a rolling refit failed to converge
};

// One-step-ahead predictive mixture: sample S latent paths from the
// posterior over the window, advance each through the latent transition and
// the volatility recurrence one extra step.
PredictiveMixture predict_one(const dsvm::GenerativeParams& theta,
                              const dsvm::InferenceParams& phi,
                              std::span<const double> window, int S, Rng& rng);

// Point forecast following the sampled-return procedure: one return draw per
// component when n_draws equals the component count, uniformly resampled
// components otherwise. n_draws >= 2.
double point_volatility_sampled(const PredictiveMixture& m, Rng& rng, int n_draws);

// sqrt(mean of component variances); the n_draws -> inf limit of the above.
double point_volatility_analytic(const PredictiveMixture& m);

enum class PointMethod { kSampled, kAnalytic };

// -log of the mixture density at r_next, log-sum-exp stabilized.
double predictive_nll(const PredictiveMixture& m, double r_next);

// Recursive one-step-ahead evaluation without retraining. Record i targets
// series index first_target + i, conditions on the trailing `window_len`
// returns, and draws from an rng stream derived from (seed, target index).
std::vector<ForecastRecord> rolling_forecast(const dsvm::GenerativeParams& theta,
                                             const dsvm::InferenceParams& phi,
                                             std::span<const double> values,
                                             std::span<const std::string> timestamps,
                                             int window_len, int S, uint64_t seed,
                                             PointMethod method = PointMethod::kSampled,
                                             int first_target = -1, int threads = 1);

}  // namespace volcast::forecast
