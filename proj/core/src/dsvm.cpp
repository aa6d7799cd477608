#include "volcast/dsvm.hpp"

#include <cmath>

#include "volcast/errors.hpp"

namespace volcast::dsvm {

GenerativeParams init_generative(const ModelConfig& cfg, Rng& rng) {
    GenerativeParams p;
    p.cfg = cfg;
    p.f1 = init_mlp(cfg.d_z, cfg.mlp_hidden, cfg.d_z, OutputAct::kLinear, rng);
    p.f2 = init_mlp(cfg.d_z, cfg.mlp_hidden, cfg.d_z, OutputAct::kSoftplus, rng);
    p.f3 = init_mlp(cfg.d_h, cfg.mlp_hidden, 1, OutputAct::kSoftplus, rng);
    p.f_h = init_gru(2 + cfg.d_z, cfg.d_h, rng);
    return p;
}

InferenceParams init_inference(const ModelConfig& cfg, Rng& rng) {
    InferenceParams p;
    p.cfg = cfg;
    p.g1 = init_mlp(cfg.d_z + cfg.d_a, cfg.mlp_hidden, cfg.d_z, OutputAct::kLinear, rng);
    p.g2 = init_mlp(cfg.d_z + cfg.d_a, cfg.mlp_hidden, cfg.d_z, OutputAct::kSoftplus, rng);
    p.g_a = init_gru(1, cfg.d_a, rng);
    return p;
}

std::pair<Array, Array> prior_step(const GenerativeParams& p, const Array& z_prev) {
    return {mlp_forward(p.f1, z_prev), mlp_forward(p.f2, z_prev)};
}

VolStep volatility_step(const GenerativeParams& p, const Array& h_prev, double sigma_prev,
                        double r_prev, const Array& z_t) {
    Array sig = Array::scalar(sigma_prev);
    Array ret = Array::scalar(r_prev);
    const Array* parts[] = {&sig, &ret, &z_t};
    Array x = kernel::concat(parts);
    Array h = gru_step(p.f_h, h_prev, x);
    Array sigma = mlp_forward(p.f3, h);
    return {std::move(h), sigma[0]};
}

std::vector<Array> encode_backward(const InferenceParams& p, std::span<const double> returns) {
    if (returns.empty()) throw DomainError("encode_backward: empty sequence");
    const int T = static_cast<int>(returns.size());
    std::vector<Array> a(T);
    Array state(p.g_a.hidden_size(), 1);  // A_{T+1} = 0
    for (int t = T - 1; t >= 0; --t) {
        state = gru_step(p.g_a, state, Array::scalar(returns[t]));
        a[t] = state;
    }
    return a;
}

PosteriorStep posterior_step(const InferenceParams& p, const Array& z_prev, const Array& a_t,
                             const Array& eta_t) {
    const Array* parts[] = {&z_prev, &a_t};
    Array x = kernel::concat(parts);
    Array mean = mlp_forward(p.g1, x);
    Array std = mlp_forward(p.g2, x);
    Array z = kernel::add(mean, kernel::mul(eta_t, std));
    return {std::move(mean), std::move(std), std::move(z)};
}

double elbo_value(const GenerativeParams& theta, const InferenceParams& phi,
                  std::span<const double> returns, const std::vector<Array>& eta,
                  LatentPath* path_out) {
    const int T = static_cast<int>(returns.size());
    if (T == 0) throw DomainError("elbo_value: empty sequence");
    if (static_cast<int>(eta.size()) != T)
        throw UsageError("elbo_value: eta length does not match sequence length");

    std::vector<Array> a(T);
    {
        Array state(phi.g_a.hidden_size(), 1);
        for (int t = T - 1; t >= 0; --t) {
            try {
                state = gru_step(phi.g_a, state, Array::scalar(returns[t]));
            } catch (const NonFiniteError& e) {
                throw DivergenceError(t + 1, e.what());
            }
            a[t] = state;
        }
    }

    Array z_prev(theta.cfg.d_z, 1);
    Array h_prev(theta.cfg.d_h, 1);
    double sigma_prev = 0.0;
    double r_prev = 0.0;
    double total = 0.0;

    for (int t = 0; t < T; ++t) {
        try {
            auto [prior_mean, prior_std] = prior_step(theta, z_prev);
            PosteriorStep post = posterior_step(phi, z_prev, a[t], eta[t]);
            VolStep vol = volatility_step(theta, h_prev, sigma_prev, r_prev, post.z);

            const double ll =
                kernel::gaussian_log_density_value(returns[t], 0.0, vol.sigma);
            double kl = 0.0;
            for (int i = 0; i < theta.cfg.d_z; ++i)
                kl += kernel::gaussian_kl_value(post.mean[i], post.std[i], prior_mean[i],
                                                prior_std[i]);
            total += ll - kl;
            if (!std::isfinite(total)) throw NonFiniteError("elbo_value: nonfinite total");

            if (path_out) {
                path_out->z.push_back(post.z);
                path_out->prior_mean.push_back(prior_mean);
                path_out->prior_std.push_back(prior_std);
                path_out->post_mean.push_back(post.mean);
                path_out->post_std.push_back(post.std);
                path_out->eta.push_back(eta[t]);
                path_out->encoder_state.push_back(a[t]);
                path_out->h.push_back(vol.h);
                path_out->sigma.push_back(vol.sigma);
            }

            z_prev = std::move(post.z);
            h_prev = std::move(vol.h);
            sigma_prev = vol.sigma;
            r_prev = returns[t];
        } catch (const NonFiniteError& e) {
            throw DivergenceError(t + 1, e.what());
        }
    }
    return total;
}

GeneratedPath generate(const GenerativeParams& p, Rng& rng, int T) {
    GeneratedPath out;
    Array z_prev(p.cfg.d_z, 1);
    Array h_prev(p.cfg.d_h, 1);
    double sigma_prev = 0.0;
    double r_prev = 0.0;
    for (int t = 0; t < T; ++t) {
        auto [mean, std] = prior_step(p, z_prev);
        Array z(p.cfg.d_z, 1);
        for (int i = 0; i < p.cfg.d_z; ++i) z[i] = mean[i] + std[i] * rng.normal();
        VolStep vol = volatility_step(p, h_prev, sigma_prev, r_prev, z);
        const double r = vol.sigma * rng.normal();
        out.returns.push_back(r);
        out.sigma.push_back(vol.sigma);
        out.z.push_back(z);
        z_prev = std::move(z);
        h_prev = std::move(vol.h);
        sigma_prev = vol.sigma;
        r_prev = r;
    }
    return out;
}

std::vector<Array> draw_eta(int T, int d_z, Rng& rng) {
    std::vector<Array> eta;
    eta.reserve(T);
    for (int t = 0; t < T; ++t) {
        Array e(d_z, 1);
        for (int i = 0; i < d_z; ++i) e[i] = rng.normal();
        eta.push_back(std::move(e));
    }
    return eta;
}

GenerativeVars bind(Tape& tape, const GenerativeParams& p) {
    return GenerativeVars{bind(tape, p.f1), bind(tape, p.f2), bind(tape, p.f3),
                          bind(tape, p.f_h)};
}

InferenceVars bind(Tape& tape, const InferenceParams& p) {
    return InferenceVars{bind(tape, p.g1), bind(tape, p.g2), bind(tape, p.g_a)};
}

namespace {

void push_adjoints(std::vector<Array>& out, const MlpVars& m) {
    out.push_back(m.w1.adjoint());
    out.push_back(m.b1.adjoint());
    out.push_back(m.w2.adjoint());
    out.push_back(m.b2.adjoint());
    out.push_back(m.w3.adjoint());
    out.push_back(m.b3.adjoint());
}

void push_adjoints(std::vector<Array>& out, const GruVars& g) {
    out.push_back(g.wu.adjoint());
    out.push_back(g.uu.adjoint());
    out.push_back(g.bu.adjoint());
    out.push_back(g.wr.adjoint());
    out.push_back(g.ur.adjoint());
    out.push_back(g.br.adjoint());
    out.push_back(g.wc.adjoint());
    out.push_back(g.uc.adjoint());
    out.push_back(g.bc.adjoint());
}

}  // namespace

std::vector<Array> gather_adjoints(const GenerativeVars& g) {
    std::vector<Array> out;
    out.reserve(6 * 3 + 9);
    push_adjoints(out, g.f1);
    push_adjoints(out, g.f2);
    push_adjoints(out, g.f3);
    push_adjoints(out, g.f_h);
    return out;
}

std::vector<Array> gather_adjoints(const InferenceVars& g) {
    std::vector<Array> out;
    out.reserve(6 * 2 + 9);
    push_adjoints(out, g.g1);
    push_adjoints(out, g.g2);
    push_adjoints(out, g.g_a);
    return out;
}

Var elbo(Tape& tape, const GenerativeVars& theta, const InferenceVars& phi,
         std::span<const double> returns, const std::vector<Array>& eta,
         LatentPath* path_out) {
    const int T = static_cast<int>(returns.size());
    if (T == 0) throw DomainError("elbo: empty sequence");
    if (static_cast<int>(eta.size()) != T)
        throw UsageError("elbo: eta length does not match sequence length");
    const int d_z = eta[0].rows();
    const int d_a = phi.g_a.bu.rows();
    const int d_h = theta.f_h.bu.rows();

    tape.reserve(tape.size() + 130 * static_cast<size_t>(T) + 64);

    // Backward encoder pass over the returns.
    std::vector<Var> a(T);
    Var a_state = tape.leaf(Array(d_a, 1));  // A_{T+1} = 0
    for (int t = T - 1; t >= 0; --t) {
        try {
            a_state = gru_step(phi.g_a, a_state, tape.constant(returns[t]));
        } catch (const NonFiniteError& e) {
            throw DivergenceError(t + 1, e.what());
        }
        a[t] = a_state;
    }

    Var z_prev = tape.leaf(Array(d_z, 1));
    Var h_prev = tape.leaf(Array(d_h, 1));
    Var sigma_prev = tape.constant(0.0);
    Var total;

    for (int t = 0; t < T; ++t) {
        try {
            Var prior_mean = mlp_forward(theta.f1, z_prev);
            Var prior_std = mlp_forward(theta.f2, z_prev);

            Var post_in = concat({z_prev, a[t]});
            Var post_mean = mlp_forward(phi.g1, post_in);
            Var post_std = mlp_forward(phi.g2, post_in);
            Var eta_t = tape.leaf(eta[t]);
            Var z_t = add(post_mean, mul(eta_t, post_std));

            Var r_prev = tape.constant(t == 0 ? 0.0 : returns[t - 1]);
            Var x = concat({sigma_prev, r_prev, z_t});
            Var h_t = gru_step(theta.f_h, h_prev, x);
            Var sigma_t = mlp_forward(theta.f3, h_t);

            Var ll = gaussian_log_density(tape.constant(returns[t]), tape.constant(0.0),
                                          sigma_t);
            Var kl;
            for (int i = 0; i < d_z; ++i) {
                Var term = gaussian_kl(index(post_mean, i), index(post_std, i),
                                       index(prior_mean, i), index(prior_std, i));
                kl = (i == 0) ? term : add(kl, term);
            }
            Var step = sub(ll, kl);
            total = (t == 0) ? step : add(total, step);

            if (path_out) {
                path_out->z.push_back(z_t.value());
                path_out->prior_mean.push_back(prior_mean.value());
                path_out->prior_std.push_back(prior_std.value());
                path_out->post_mean.push_back(post_mean.value());
                path_out->post_std.push_back(post_std.value());
                path_out->eta.push_back(eta[t]);
                path_out->encoder_state.push_back(a[t].value());
                path_out->h.push_back(h_t.value());
                path_out->sigma.push_back(sigma_t.value()[0]);
            }

            z_prev = z_t;
            h_prev = h_t;
            sigma_prev = index(sigma_t, 0);
        } catch (const NonFiniteError& e) {
            throw DivergenceError(t + 1, e.what());
        }
    }
    return total;
}

}  // namespace volcast::dsvm
