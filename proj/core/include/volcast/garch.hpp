#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "volcast/forecast.hpp"

namespace volcast::garch {

enum class Variant { kGarch, kGjr, kTgarch, kEgarch };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct Spec {
    Variant variant = Variant::kGarch;
    int p = 1;
    int q = 1;
};

// omega; alpha_1..p; gamma_1..p (empty for plain GARCH); beta_1..q.
struct Params {
    double omega = 0.0;
    std::vector<double> alpha;
    std::vector<double> gamma;
    std::vector<double> beta;
};

// Throws DomainError if params violate the variant's constraints:
//   GARCH:  omega>0, alpha>=0, beta>=0, sum(alpha)+sum(beta) < 1
//   GJR:    as GARCH plus sum(alpha)+sum(beta)+sum(gamma)/2 < 1, gamma >= -1
//   TGARCH: omega>0, alpha>=0, beta>=0, |gamma| <= 1
//   EGARCH: |sum(beta)| < 1
void validate(const Spec& spec, const Params& params);

// Conditional variance path. `init` is a variance level used for the first
// max(p,q) steps (internally sqrt'd for TGARCH, log'd for EGARCH). EGARCH
// uses lagged standardized innovations and E|eps| = sqrt(2/pi). Only the
// structural (positivity) constraints are required here; the recursion is
// well defined without stationarity.
std::vector<double> filter(const Spec& spec, const Params& params, std::span<const double> r,
                           double init);

// Gaussian negative log-likelihood conditional on the pre-sample: sums
// -log N(r_t; 0, sigma2_t) over t > max(p,q), with init set to the second
// moment of r. A nonfinite variance path yields a large finite penalty and
// sets *nonfinite_flag when provided.
double nll(const Spec& spec, const Params& params, std::span<const double> r,
           bool* nonfinite_flag = nullptr);

constexpr double kPenaltyNll = 1e12;

struct FitResult {
    Params params;
    double loglik = 0.0;  // maximized log-likelihood
    bool converged = false;
    int iterations = 0;
};

// Maximum likelihood by Nelder-Mead over an unconstrained reparameterization
// that enforces the variant invariants by construction; 3 starts derived
// from `seed`. Requires n >= 50.
FitResult fit(const Spec& spec, std::span<const double> r, uint64_t seed);

// Volatility (standard deviation) for the next observation after r.
double forecast_one(const Spec& spec, const Params& params, std::span<const double> r);

// Refits on the trailing `window` at every step and emits the one-step
// Gaussian NLL at the realized return. Non-convergent refits carry the most
// recent converged parameters forward and flag the record.
std::vector<forecast::ForecastRecord> rolling_eval(const Spec& spec,
                                                   std::span<const double> values,
                                                   std::span<const std::string> timestamps,
                                                   int window, uint64_t seed, int threads = 1,
                                                   int first_target = -1);

}  // namespace volcast::garch
