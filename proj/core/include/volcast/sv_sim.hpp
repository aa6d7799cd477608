#pragma once

#include <vector>

#include "volcast/rng.hpp"

namespace volcast::data {

// Log-variance AR(1) stochastic volatility simulator, optionally with
// leverage: corr(eps_{t-1}, z_t) = rho.
struct SvSimParams {
    double mu = -1.0;      // log-variance level
    double ar_phi = 0.95;  // persistence, |ar_phi| < 1
    double sigma_z = 0.2;  // innovation std, > 0
    double rho = 0.0;      // leverage, in (-1, 1); 0 disables it
};

struct SvPath {
    std::vector<double> returns, sigma;
};

//   log sigma2_t = mu + ar_phi (log sigma2_{t-1} - mu) + z_t
//   r_t = sigma_t eps_t
//   z_t = rho sigma_z eps_{t-1} + sigma_z sqrt(1-rho^2) xi_t
// with eps, xi iid standard normal and log sigma2_0 = mu.
SvPath simulate_sv(const SvSimParams& params, int n, Rng& rng);

}  // namespace volcast::data
