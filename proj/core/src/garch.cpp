#include "volcast/garch.hpp"

#include <algorithm>
#include <cmath>

#include "volcast/errors.hpp"
#include "volcast/nelder_mead.hpp"
#include "volcast/parallel.hpp"
#include "volcast/rng.hpp"

namespace volcast::garch {

namespace {

constexpr double kSqrt2OverPi = 0.79788456080286535588;  // sqrt(2/pi)
constexpr double kMaxPersistence = 0.999;

double logit(double x) {
    return std::log(x / (1.0 - x));
}

double second_moment(std::span<const double> r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return s / static_cast<double>(r.size());
}

}  // namespace

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::kGarch: return "garch";
        case Variant::kGjr: return "gjr";
        case Variant::kTgarch: return "tgarch";
        case Variant::kEgarch: return "egarch";
    }
    return "?";
}

Variant variant_from_name(const std::string& name) {
    if (name == "garch") return Variant::kGarch;
    if (name == "gjr") return Variant::kGjr;
    if (name == "tgarch") return Variant::kTgarch;
    if (name == "egarch") return Variant::kEgarch;
    throw ConfigError("unknown GARCH variant '" + name + "'");
}

namespace {

// The structural constraints keep the recursions well defined (positive
// variance); the stationarity constraints additionally bound the process.
// filter() only needs the former, so direct-substitution checks with
// explosive coefficients remain possible; fit() always returns parameters
// satisfying both.
void validate_impl(const Spec& spec, const Params& params, bool stationarity) {
    if (spec.p < 1 || spec.q < 1) throw DomainError("garch: orders must be >= 1");
    const size_t p = static_cast<size_t>(spec.p), q = static_cast<size_t>(spec.q);
    if (params.alpha.size() != p || params.beta.size() != q)
        throw DomainError("garch: coefficient count does not match orders");
    const bool has_gamma = spec.variant != Variant::kGarch;
    if (params.gamma.size() != (has_gamma ? p : 0))
        throw DomainError("garch: gamma count does not match variant/order");

    double sum_alpha = 0.0, sum_beta = 0.0, sum_gamma = 0.0;
    for (double a : params.alpha) sum_alpha += a;
    for (double b : params.beta) sum_beta += b;
    for (double g : params.gamma) sum_gamma += g;

    switch (spec.variant) {
        case Variant::kGarch:
        case Variant::kGjr:
            if (!(params.omega > 0.0)) throw DomainError("garch: omega must be positive");
            for (double a : params.alpha)
                if (a < 0.0) throw DomainError("garch: alpha must be nonnegative");
            for (double b : params.beta)
                if (b < 0.0) throw DomainError("garch: beta must be nonnegative");
            for (double g : params.gamma)
                if (g < -1.0) throw DomainError("gjr: gamma must be >= -1");
            if (stationarity && !(sum_alpha + sum_beta + 0.5 * sum_gamma < 1.0))
                throw DomainError("garch: stationarity violated");
            break;
        case Variant::kTgarch:
            if (!(params.omega > 0.0)) throw DomainError("tgarch: omega must be positive");
            for (double a : params.alpha)
                if (a < 0.0) throw DomainError("tgarch: alpha must be nonnegative");
            for (double b : params.beta)
                if (b < 0.0) throw DomainError("tgarch: beta must be nonnegative");
            for (double g : params.gamma)
                if (std::fabs(g) > 1.0) throw DomainError("tgarch: |gamma| must be <= 1");
            break;
        case Variant::kEgarch:
            if (stationarity && !(std::fabs(sum_beta) < 1.0))
                throw DomainError("egarch: |sum(beta)| must be < 1");
            break;
    }
}

}  // namespace

void validate(const Spec& spec, const Params& params) {
    validate_impl(spec, params, true);
}

std::vector<double> filter(const Spec& spec, const Params& params, std::span<const double> r,
                           double init) {
    validate_impl(spec, params, false);
    if (!(init > 0.0)) throw DomainError("garch filter: init variance must be positive");
    const int n = static_cast<int>(r.size());
    const int m = std::max(spec.p, spec.q);
    if (n < m) throw DataError("garch filter: series shorter than max(p,q)");

    std::vector<double> sigma2(n);
    switch (spec.variant) {
        case Variant::kGarch: {
            for (int t = 0; t < m; ++t) sigma2[t] = init;
            for (int t = m; t < n; ++t) {
                double acc = params.omega;
                for (int i = 1; i <= spec.p; ++i) acc += params.alpha[i - 1] * (r[t - i] * r[t - i]);
                for (int j = 1; j <= spec.q; ++j) acc += params.beta[j - 1] * sigma2[t - j];
                sigma2[t] = acc;
            }
            break;
        }
        case Variant::kGjr: {
            for (int t = 0; t < m; ++t) sigma2[t] = init;
            for (int t = m; t < n; ++t) {
                double acc = params.omega;
                for (int i = 1; i <= spec.p; ++i) {
                    const double r2 = r[t - i] * r[t - i];
                    const double ind = r[t - i] < 0.0 ? 1.0 : 0.0;
                    acc += params.alpha[i - 1] * (r2 + params.gamma[i - 1] * ind * r2);
                }
                for (int j = 1; j <= spec.q; ++j) acc += params.beta[j - 1] * sigma2[t - j];
                sigma2[t] = acc;
            }
            break;
        }
        case Variant::kTgarch: {
            std::vector<double> sigma(n);
            const double s0 = std::sqrt(init);
            for (int t = 0; t < m; ++t) sigma[t] = s0;
            for (int t = m; t < n; ++t) {
                double acc = params.omega;
                for (int i = 1; i <= spec.p; ++i)
                    acc += params.alpha[i - 1] *
                           (std::fabs(r[t - i]) - params.gamma[i - 1] * r[t - i]);
                for (int j = 1; j <= spec.q; ++j) acc += params.beta[j - 1] * sigma[t - j];
                sigma[t] = acc;
            }
            for (int t = 0; t < n; ++t) sigma2[t] = sigma[t] * sigma[t];
            break;
        }
        case Variant::kEgarch: {
            std::vector<double> logvar(n);
            const double l0 = std::log(init);
            for (int t = 0; t < m; ++t) logvar[t] = l0;
            for (int t = m; t < n; ++t) {
                double acc = params.omega;
                for (int i = 1; i <= spec.p; ++i) {
                    const double eps = r[t - i] / std::exp(0.5 * logvar[t - i]);
                    acc += params.alpha[i - 1] * eps +
                           params.gamma[i - 1] * (std::fabs(eps) - kSqrt2OverPi);
                }
                for (int j = 1; j <= spec.q; ++j) acc += params.beta[j - 1] * logvar[t - j];
                logvar[t] = acc;
            }
            for (int t = 0; t < n; ++t) sigma2[t] = std::exp(logvar[t]);
            break;
        }
    }
    return sigma2;
}

double nll(const Spec& spec, const Params& params, std::span<const double> r,
           bool* nonfinite_flag) {
    if (nonfinite_flag) *nonfinite_flag = false;
    const double init = second_moment(r);
    if (!(init > 0.0)) {
        if (nonfinite_flag) *nonfinite_flag = true;
        return kPenaltyNll;
    }
    std::vector<double> sigma2 = filter(spec, params, r, init);
    const int m = std::max(spec.p, spec.q);
    double acc = 0.0;
    for (size_t t = m; t < sigma2.size(); ++t) {
        if (!(sigma2[t] > 0.0) || !std::isfinite(sigma2[t])) {
            if (nonfinite_flag) *nonfinite_flag = true;
            return kPenaltyNll;
        }
        acc -= kernel::gaussian_log_density_value(r[t], 0.0, std::sqrt(sigma2[t]));
    }
    if (!std::isfinite(acc)) {
        if (nonfinite_flag) *nonfinite_flag = true;
        return kPenaltyNll;
    }
    return acc;
}

namespace {

// Unconstrained parameterizations mapping R^k onto each variant's feasible
// set, so decoded parameters always pass validate().
int transform_dim(const Spec& spec) {
    switch (spec.variant) {
        case Variant::kGarch: return spec.p + spec.q + 1;
        case Variant::kGjr: return 2 * spec.p + spec.q + 1;
        case Variant::kTgarch: return 1 + 2 * spec.p + spec.q;
        case Variant::kEgarch: return 1 + 2 * spec.p + spec.q;
    }
    return 0;
}

// Splits budget s into `count` nonnegative parts with count-1 logits
// (stick-breaking; the last part takes the remainder).
std::vector<double> stick_break(double s, std::span<const double> u, int count) {
    std::vector<double> parts(count);
    double rem = s;
    for (int k = 0; k + 1 < count; ++k) {
        parts[k] = rem * kernel::sigmoid_scalar(u[k]);
        rem -= parts[k];
    }
    parts[count - 1] = rem;
    return parts;
}

Params decode(const Spec& spec, std::span<const double> u) {
    Params out;
    const int p = spec.p, q = spec.q;
    switch (spec.variant) {
        case Variant::kGarch: {
            const double s = kMaxPersistence * kernel::sigmoid_scalar(u[0]);
            auto parts = stick_break(s, u.subspan(1, p + q - 1), p + q);
            out.alpha.assign(parts.begin(), parts.begin() + p);
            out.beta.assign(parts.begin() + p, parts.end());
            out.omega = std::exp(u[p + q]);
            break;
        }
        case Variant::kGjr: {
            const double s = kMaxPersistence * kernel::sigmoid_scalar(u[0]);
            auto parts = stick_break(s, u.subspan(1, 2 * p + q - 1), 2 * p + q);
            out.alpha.assign(parts.begin(), parts.begin() + p);
            out.gamma.resize(p);
            for (int i = 0; i < p; ++i) out.gamma[i] = 2.0 * parts[p + i];
            out.beta.assign(parts.begin() + 2 * p, parts.end());
            out.omega = std::exp(u[2 * p + q]);
            break;
        }
        case Variant::kTgarch: {
            out.omega = std::exp(u[0]);
            out.alpha.resize(p);
            out.gamma.resize(p);
            for (int i = 0; i < p; ++i) out.alpha[i] = std::exp(u[1 + i]);
            for (int i = 0; i < p; ++i) out.gamma[i] = std::tanh(u[1 + p + i]);
            const double b = kMaxPersistence * kernel::sigmoid_scalar(u[1 + 2 * p]);
            out.beta = stick_break(b, u.subspan(2 + 2 * p, q - 1), q);
            break;
        }
        case Variant::kEgarch: {
            out.omega = u[0];
            out.alpha.assign(u.begin() + 1, u.begin() + 1 + p);
            out.gamma.assign(u.begin() + 1 + p, u.begin() + 1 + 2 * p);
            out.beta.resize(q);
            for (int j = 0; j < q; ++j) out.beta[j] = std::tanh(u[1 + 2 * p + j]) / q;
            break;
        }
    }
    return out;
}

std::vector<double> make_start(const Spec& spec, std::span<const double> r, int attempt,
                               Rng& rng) {
    const double s2 = std::max(second_moment(r), 1e-12);
    const double pers_target[] = {0.90, 0.60, 0.97};
    const double pers = pers_target[attempt % 3];
    std::vector<double> u(transform_dim(spec), 0.0);
    switch (spec.variant) {
        case Variant::kGarch: {
            u[0] = logit(pers / kMaxPersistence);
            u[1] = logit(0.12);  // alpha share of the persistence budget
            u[spec.p + spec.q] = std::log(std::max(s2 * (1.0 - pers), 1e-12));
            break;
        }
        case Variant::kGjr: {
            u[0] = logit(pers / kMaxPersistence);
            u[1] = logit(0.10);
            u[1 + spec.p] = logit(0.05);  // gamma/2 share
            u[2 * spec.p + spec.q] = std::log(std::max(s2 * (1.0 - pers), 1e-12));
            break;
        }
        case Variant::kTgarch: {
            const double sig = std::sqrt(s2);
            u[0] = std::log(std::max(sig * (1.0 - pers), 1e-12));
            u[1] = std::log(0.10);
            u[1 + spec.p] = 0.0;
            u[1 + 2 * spec.p] = logit(std::min(pers, 0.98) / kMaxPersistence);
            break;
        }
        case Variant::kEgarch: {
            u[0] = (1.0 - pers) * std::log(s2);
            u[1] = 0.0;
            u[1 + spec.p] = 0.1;
            u[1 + 2 * spec.p] = std::atanh(std::min(pers, 0.995));
            break;
        }
    }
    for (double& x : u) x += 0.3 * (2.0 * rng.uniform01() - 1.0);
    return u;
}

}  // namespace

FitResult fit(const Spec& spec, std::span<const double> r, uint64_t seed) {
    if (r.size() < 50) throw DataError("garch fit: need at least 50 observations");

    const auto objective = [&](std::span<const double> u) {
        return nll(spec, decode(spec, u), r);
    };

    Rng rng(seed);
    NelderMeadOptions opts;
    NelderMeadResult best;
    bool have = false;
    int best_iterations = 0;
    for (int attempt = 0; attempt < 3; ++attempt) {
        Rng start_rng = rng.derive(static_cast<uint64_t>(attempt));
        std::vector<double> u0 = make_start(spec, r, attempt, start_rng);
        NelderMeadResult run = nelder_mead(objective, u0, opts);
        // Restart once from the found point with a fresh simplex.
        NelderMeadResult polished = nelder_mead(objective, run.x, opts);
        polished.iterations += run.iterations;
        polished.converged = polished.converged && polished.fx < kPenaltyNll;
        if (!have || polished.fx < best.fx) {
            best = polished;
            best_iterations = polished.iterations;
            have = true;
        }
    }

    FitResult result;
    result.params = decode(spec, best.x);
    result.loglik = -best.fx;
    result.converged = best.converged && best.fx < kPenaltyNll;
    result.iterations = best_iterations;
    return result;
}

double forecast_one(const Spec& spec, const Params& params, std::span<const double> r) {
    const int m = std::max(spec.p, spec.q);
    if (static_cast<int>(r.size()) < m) throw DataError("garch forecast: series too short");
    const double init = second_moment(r);
    std::vector<double> extended(r.begin(), r.end());
    extended.push_back(0.0);  // never enters its own pre-observation variance
    std::vector<double> sigma2 = filter(spec, params, extended, init);
    return std::sqrt(sigma2.back());
}

std::vector<forecast::ForecastRecord> rolling_eval(const Spec& spec,
                                                   std::span<const double> values,
                                                   std::span<const std::string> timestamps,
                                                   int window, uint64_t seed, int threads,
                                                   int first_target) {
    const int n = static_cast<int>(values.size());
    if (first_target < 0) first_target = window;
    if (first_target < window)
        throw DomainError("rolling_eval: first_target leaves too little history");
    if (n <= first_target) throw DataError("rolling_eval: series shorter than window + 1");
    if (!timestamps.empty() && timestamps.size() != values.size())
        throw UsageError("rolling_eval: timestamp count mismatch");

    const int count = n - first_target;
    std::vector<FitResult> fits(count);
    Rng base(seed);
    parallel_for(count, threads, [&](int k) {
        const int i = first_target + k;
        fits[k] = fit(spec, values.subspan(i - window, window),
                      base.derive(static_cast<uint64_t>(i)).seed());
    });

    std::vector<forecast::ForecastRecord> records(count);
    Params current;
    bool have_converged = false;
    for (int k = 0; k < count; ++k) {
        const int i = first_target + k;
        bool flagged = false;
        if (fits[k].converged) {
            current = fits[k].params;
            have_converged = true;
        } else {
            flagged = true;
            if (!have_converged) current = fits[k].params;  // last iterate, still flagged
        }
        const double sigma = forecast_one(spec, current, values.subspan(i - window, window));
        forecast::ForecastRecord& rec = records[k];
        rec.timestamp = timestamps.empty() ? std::to_string(i) : timestamps[i];
        rec.realized = values[i];
        rec.pred_vol = sigma;
        rec.pred_nll = -kernel::gaussian_log_density_value(values[i], 0.0, sigma);
        rec.flagged = flagged;
    }
    return records;
}

}  // namespace volcast::garch
