#include "volcast/sv_sim.hpp"

#include <cmath>

#include "volcast/errors.hpp"

namespace volcast::data {

SvPath simulate_sv(const SvSimParams& params, int n, Rng& rng) {
    if (!(std::fabs(params.ar_phi) < 1.0)) throw DomainError("simulate_sv: |ar_phi| must be < 1");
    if (!(params.sigma_z >= 0.0)) throw DomainError("simulate_sv: sigma_z must be >= 0");
    if (!(std::fabs(params.rho) < 1.0)) throw DomainError("simulate_sv: |rho| must be < 1");
    if (n < 1) throw DomainError("simulate_sv: n must be >= 1");

    SvPath out;
    out.returns.resize(n);
    out.sigma.resize(n);

    const double cross = params.rho * params.sigma_z;
    const double indep = params.sigma_z * std::sqrt(1.0 - params.rho * params.rho);

    double logvar = params.mu;
    double eps_prev = rng.normal();  // innovation of the (unobserved) step 0
    for (int t = 0; t < n; ++t) {
        const double xi = rng.normal();
        const double z = cross * eps_prev + indep * xi;
        logvar = params.mu + params.ar_phi * (logvar - params.mu) + z;
        const double sigma = std::exp(0.5 * logvar);
        const double eps = rng.normal();
        out.sigma[t] = sigma;
        out.returns[t] = sigma * eps;
        eps_prev = eps;
    }
    return out;
}

}  // namespace volcast::data
