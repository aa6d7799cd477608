#pragma once

#include <span>
#include <vector>

#include "volcast/dsvm.hpp"

// Quadrature evaluations of the toy-model ELBO, log marginal likelihood and
// one-step-ahead moments for T <= 2 and d_z = 1, built on the naive network
// oracles (no library forward paths, no sampling).
namespace oracle {

// E_q[ sum_t log p(r_t|sigma_t) + log p(z_t|z_{t-1}) - log q(z_t|.) ],
// nested Gauss-Hermite over the posterior chain. returns.size() in {1, 2}.
double quadrature_elbo(const volcast::dsvm::GenerativeParams& theta,
                       const volcast::dsvm::InferenceParams& phi,
                       std::span<const double> returns, int gh_points = 64);

// log int p(r_{1:T}, z_{1:T}) dz, nested Gauss-Hermite over the prior chain.
double log_marginal(const volcast::dsvm::GenerativeParams& theta,
                    std::span<const double> returns, int gh_points = 128);

// E[ sigma_{T+1}^2 | r_1 ] for T = 1: outer expectation over q(z_1|r_1),
// inner over p(z_2|z_1).
double expected_sigma_sq_next(const volcast::dsvm::GenerativeParams& theta,
                              const volcast::dsvm::InferenceParams& phi, double r1,
                              int gh_points = 96);

}  // namespace oracle
