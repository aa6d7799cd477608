#pragma once

#include <string>
#include <vector>

#include "volcast/array.hpp"
#include "volcast/nets.hpp"
#include "volcast/params.hpp"
#include "volcast/rng.hpp"
#include "volcast/tape.hpp"

namespace volcast::dsvm {

struct ModelConfig {
    int d_z = 1;         // latent dimension
    int d_h = 10;        // volatility GRU hidden size
    int d_a = 10;        // backward encoder hidden size
    int mlp_hidden = 16; // width of every MLP hidden layer
};

// Generative side: latent transition (f1 mean, f2 std), volatility readout
// (f3) and the volatility recurrence cell (f_h over [sigma, r, z]).
struct GenerativeParams {
    MlpParams f1, f2, f3;
    GruParams f_h;
    ModelConfig cfg;

    void collect(ParamSet& set) {
        f1.collect(set, "theta.f1");
        f2.collect(set, "theta.f2");
        f3.collect(set, "theta.f3");
        f_h.collect(set, "theta.f_h");
    }
};

// Inference side: backward encoder g_A over returns, posterior mean g1 and
// std g2 over [z_prev, A_t].
struct InferenceParams {
    MlpParams g1, g2;
    GruParams g_a;
    ModelConfig cfg;

    void collect(ParamSet& set) {
        g1.collect(set, "phi.g1");
        g2.collect(set, "phi.g2");
        g_a.collect(set, "phi.g_a");
    }
};

GenerativeParams init_generative(const ModelConfig& cfg, Rng& rng);
InferenceParams init_inference(const ModelConfig& cfg, Rng& rng);

// Per-timestep record of one latent trajectory (index 0 is t=1).
struct LatentPath {
    std::vector<Array> z;        // sampled latent
    std::vector<Array> prior_mean, prior_std;
    std::vector<Array> post_mean, post_std;
    std::vector<Array> eta;      // auxiliary standard-normal noise
    std::vector<Array> encoder_state;  // A_t
    std::vector<Array> h;        // volatility recurrence state
    std::vector<double> sigma;   // volatility sigma_t

    int length() const { return static_cast<int>(sigma.size()); }
};

// ----- plain (gradient-free) operations -----

// Latent transition parameters: m = f1(z_prev), v = f2(z_prev) > 0.
std::pair<Array, Array> prior_step(const GenerativeParams& p, const Array& z_prev);

// One volatility recurrence step; sigma_t is scalar and positive.
struct VolStep {
    Array h;
    double sigma;
};
VolStep volatility_step(const GenerativeParams& p, const Array& h_prev, double sigma_prev,
                        double r_prev, const Array& z_t);

// Right-to-left encoder pass; result[t] (0-based, t in [0, T)) is A_{t+1}
// and depends only on returns[t..T).
std::vector<Array> encode_backward(const InferenceParams& p, std::span<const double> returns);

// Posterior parameters and reparameterized draw z = m + eta .* v.
struct PosteriorStep {
    Array mean, std, z;
};
PosteriorStep posterior_step(const InferenceParams& p, const Array& z_prev, const Array& a_t,
                             const Array& eta_t);

// Single-sample ELBO value (log-likelihood sum minus analytic KL sum) with
// the full latent path. Throws DivergenceError on nonfinite intermediates.
double elbo_value(const GenerativeParams& theta, const InferenceParams& phi,
                  std::span<const double> returns, const std::vector<Array>& eta,
                  LatentPath* path_out = nullptr);

// Ancestral simulation from the generative model.
struct GeneratedPath {
    std::vector<double> returns, sigma;
    std::vector<Array> z;
};
GeneratedPath generate(const GenerativeParams& p, Rng& rng, int T);

// Standard-normal noise block, one Array of size d_z per timestep.
std::vector<Array> draw_eta(int T, int d_z, Rng& rng);

// ----- tape-bound (differentiable) operations -----

struct GenerativeVars {
    MlpVars f1, f2, f3;
    GruVars f_h;
};
struct InferenceVars {
    MlpVars g1, g2;
    GruVars g_a;
};

GenerativeVars bind(Tape& tape, const GenerativeParams& p);
InferenceVars bind(Tape& tape, const InferenceParams& p);

// Gradients of leaves bound by bind(), in collect() order.
std::vector<Array> gather_adjoints(const GenerativeVars& g);
std::vector<Array> gather_adjoints(const InferenceVars& g);

// Differentiable single-sample ELBO on the tape. Bit-identical in value to
// elbo_value on the same inputs.
Var elbo(Tape& tape, const GenerativeVars& theta, const InferenceVars& phi,
         std::span<const double> returns, const std::vector<Array>& eta,
         LatentPath* path_out = nullptr);

}  // namespace volcast::dsvm
