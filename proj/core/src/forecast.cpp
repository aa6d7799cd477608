#include "volcast/forecast.hpp"

#include <cmath>

#include "volcast/errors.hpp"
#include "volcast/parallel.hpp"

namespace volcast::forecast {

PredictiveMixture predict_one(const dsvm::GenerativeParams& theta,
                              const dsvm::InferenceParams& phi,
                              std::span<const double> window, int S, Rng& rng) {
    if (window.empty()) throw DomainError("predict_one: empty conditioning window");
    if (S < 1) throw DomainError("predict_one: S must be >= 1");
    const int T = static_cast<int>(window.size());
    const int d_z = theta.cfg.d_z;

    // The encoder pass depends only on the window, not on the sample.
    std::vector<Array> a = dsvm::encode_backward(phi, window);

    PredictiveMixture mix;
    mix.sigmas.resize(S);
    for (int s = 0; s < S; ++s) {
        Array z_prev(d_z, 1);
        Array h_prev(theta.cfg.d_h, 1);
        double sigma_prev = 0.0;
        double r_prev = 0.0;
        Array eta(d_z, 1);
        for (int t = 0; t < T; ++t) {
            for (int i = 0; i < d_z; ++i) eta[i] = rng.normal();
            dsvm::PosteriorStep post = dsvm::posterior_step(phi, z_prev, a[t], eta);
            dsvm::VolStep vol = dsvm::volatility_step(theta, h_prev, sigma_prev, r_prev, post.z);
            z_prev = std::move(post.z);
            h_prev = std::move(vol.h);
            sigma_prev = vol.sigma;
            r_prev = window[t];
        }
        // Advance the latent one step through the prior and read the
        // volatility for T+1.
        auto [prior_mean, prior_std] = dsvm::prior_step(theta, z_prev);
        Array z_next(d_z, 1);
        for (int i = 0; i < d_z; ++i) z_next[i] = prior_mean[i] + prior_std[i] * rng.normal();
        dsvm::VolStep vol =
            dsvm::volatility_step(theta, h_prev, sigma_prev, window[T - 1], z_next);
        mix.sigmas[s] = vol.sigma;
    }
    return mix;
}

double point_volatility_sampled(const PredictiveMixture& m, Rng& rng, int n_draws) {
    if (n_draws < 2) throw DomainError("point_volatility: n_draws must be >= 2");
    if (m.components() < 1) throw DomainError("point_volatility: empty mixture");
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n_draws; ++i) {
        const int c = (n_draws == m.components()) ? i : rng.uniform_int(m.components());
        const double r = m.sigmas[c] * rng.normal();
        sum += r;
        sum_sq += r * r;
    }
    const double n = static_cast<double>(n_draws);
    const double var = (sum_sq - sum * sum / n) / (n - 1.0);
    return std::sqrt(std::max(var, 0.0));
}

double point_volatility_analytic(const PredictiveMixture& m) {
    if (m.components() < 1) throw DomainError("point_volatility: empty mixture");
    double s = 0.0;
    for (double sig : m.sigmas) s += sig * sig;
    return std::sqrt(s / m.components());
}

double predictive_nll(const PredictiveMixture& m, double r_next) {
    if (m.components() < 1) throw DomainError("predictive_nll: empty mixture");
    double max_lp = -std::numeric_limits<double>::infinity();
    std::vector<double> lps(m.sigmas.size());
    for (size_t i = 0; i < m.sigmas.size(); ++i) {
        lps[i] = kernel::gaussian_log_density_value(r_next, 0.0, m.sigmas[i]);
        max_lp = std::max(max_lp, lps[i]);
    }
    double acc = 0.0;
    for (double lp : lps) acc += std::exp(lp - max_lp);
    return -(max_lp + std::log(acc / m.components()));
}

std::vector<ForecastRecord> rolling_forecast(const dsvm::GenerativeParams& theta,
                                             const dsvm::InferenceParams& phi,
                                             std::span<const double> values,
                                             std::span<const std::string> timestamps,
                                             int window_len, int S, uint64_t seed,
                                             PointMethod method, int first_target, int threads) {
    const int n = static_cast<int>(values.size());
    if (n <= window_len) throw DataError("rolling_forecast: series shorter than window + 1");
    if (first_target < 0) first_target = window_len;
    if (first_target < window_len)
        throw DomainError("rolling_forecast: first_target leaves too little history");
    if (!timestamps.empty() && timestamps.size() != values.size())
        throw UsageError("rolling_forecast: timestamp count mismatch");

    const int count = n - first_target;
    std::vector<ForecastRecord> records(count);
    Rng base(seed);
    parallel_for(count, threads, [&](int k) {
        const int i = first_target + k;  // target index
        Rng rng = base.derive(static_cast<uint64_t>(i));
        auto window = values.subspan(i - window_len, window_len);
        PredictiveMixture mix = predict_one(theta, phi, window, S, rng);
        ForecastRecord& rec = records[k];
        rec.timestamp = timestamps.empty() ? std::to_string(i) : timestamps[i];
        rec.realized = values[i];
        rec.pred_vol = (method == PointMethod::kAnalytic)
                           ? point_volatility_analytic(mix)
                           : point_volatility_sampled(mix, rng, mix.components());
        rec.pred_nll = predictive_nll(mix, values[i]);
    });
    return records;
}

}  // namespace volcast::forecast
