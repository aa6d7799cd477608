#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles/elbo_oracles.hpp"
#include "oracles/naive_nets.hpp"
#include "volcast/dsvm.hpp"
#include "volcast/errors.hpp"
#include "volcast/grad_check.hpp"

using namespace volcast;
using dsvm::GenerativeParams;
using dsvm::InferenceParams;
using dsvm::ModelConfig;

namespace {

ModelConfig toy_config() {
    ModelConfig cfg;
    cfg.d_z = 1;
    cfg.d_h = 3;
    cfg.d_a = 3;
    cfg.mlp_hidden = 4;
    return cfg;
}

struct Model {
    GenerativeParams theta;
    InferenceParams phi;
};

Model random_model(uint64_t seed, ModelConfig cfg) {
    Rng rng(seed);
    Model m;
    m.theta = dsvm::init_generative(cfg, rng);
    m.phi = dsvm::init_inference(cfg, rng);
    return m;
}

void zero_weights(ParamSet& set) {
    for (const auto& e : set) e.array->fill(0.0);
}

Model zero_model(ModelConfig cfg) {
    Model m = random_model(0, cfg);
    ParamSet set;
    m.theta.collect(set);
    m.phi.collect(set);
    zero_weights(set);
    return m;
}

constexpr double kLogTwoFloored = 0.69314718055994530942 + kStdFloor;

}  // namespace

TEST(PriorStep, ZeroWeightsGiveZeroMeanLogTwoStd) {
    Model m = zero_model(toy_config());
    auto [mean, std] = dsvm::prior_step(m.theta, Array::scalar(0.7));
    EXPECT_DOUBLE_EQ(mean[0], 0.0);
    EXPECT_DOUBLE_EQ(std[0], std::log(2.0) + kStdFloor);
}

TEST(PriorStep, DeterministicUnderSeed) {
    Model a = random_model(99, toy_config());
    Model b = random_model(99, toy_config());
    auto [m1, v1] = dsvm::prior_step(a.theta, Array::scalar(0.0));
    auto [m2, v2] = dsvm::prior_step(b.theta, Array::scalar(0.0));
    EXPECT_EQ(m1[0], m2[0]);
    EXPECT_EQ(v1[0], v2[0]);
}

TEST(PriorStep, MatchesNaiveMlp) {
    Model m = random_model(7, toy_config());
    auto [mean, std] = dsvm::prior_step(m.theta, Array::scalar(-0.35));
    EXPECT_NEAR(mean[0], oracle::naive_mlp(m.theta.f1, {-0.35})[0], 1e-12);
    EXPECT_NEAR(std[0], oracle::naive_mlp(m.theta.f2, {-0.35})[0], 1e-12);
}

TEST(VolatilityStep, ZeroWeightsFirstStep) {
    Model m = zero_model(toy_config());
    Array h0(m.theta.cfg.d_h, 1);
    dsvm::VolStep v = dsvm::volatility_step(m.theta, h0, 0.0, 0.0, Array::scalar(0.4));
    for (int i = 0; i < v.h.size(); ++i) EXPECT_DOUBLE_EQ(v.h[i], 0.0);
    EXPECT_DOUBLE_EQ(v.sigma, std::log(2.0) + kStdFloor);
}

TEST(VolatilityStep, PureFunction) {
    Model m = random_model(17, toy_config());
    Array h0(m.theta.cfg.d_h, 1);
    h0[1] = 0.3;
    dsvm::VolStep a = dsvm::volatility_step(m.theta, h0, 0.5, -0.1, Array::scalar(0.2));
    dsvm::VolStep b = dsvm::volatility_step(m.theta, h0, 0.5, -0.1, Array::scalar(0.2));
    EXPECT_EQ(a.sigma, b.sigma);
    for (int i = 0; i < a.h.size(); ++i) EXPECT_EQ(a.h[i], b.h[i]);
}

TEST(VolatilityStep, ThreeStepUnrollMatchesNaiveRecurrence) {
    Model m = random_model(23, toy_config());
    const double z[] = {0.3, -0.8, 0.15};
    const double r[] = {0.02, -0.05, 0.01};

    Array h_prev(m.theta.cfg.d_h, 1);
    double sigma_prev = 0.0, r_prev = 0.0;
    std::vector<double> h_naive(m.theta.cfg.d_h, 0.0);
    double sigma_naive = 0.0, r_naive_prev = 0.0;
    for (int t = 0; t < 3; ++t) {
        dsvm::VolStep v = dsvm::volatility_step(m.theta, h_prev, sigma_prev, r_prev,
                                                Array::scalar(z[t]));
        h_naive = oracle::naive_gru(m.theta.f_h, h_naive, {sigma_naive, r_naive_prev, z[t]});
        sigma_naive = oracle::naive_mlp(m.theta.f3, h_naive)[0];
        EXPECT_NEAR(v.sigma, sigma_naive, 1e-12);
        h_prev = std::move(v.h);
        sigma_prev = v.sigma;
        r_prev = r[t];
        r_naive_prev = r[t];
    }
}

TEST(EncodeBackward, ZeroWeightsGiveZeroStates) {
    Model m = zero_model(toy_config());
    const double r[] = {0.1, -0.2, 0.3};
    auto a = dsvm::encode_backward(m.phi, r);
    for (const Array& state : a)
        for (int i = 0; i < state.size(); ++i) EXPECT_DOUBLE_EQ(state[i], 0.0);
}

TEST(EncodeBackward, DependsOnlyOnSuffix) {
    Model m = random_model(31, toy_config());
    std::vector<double> r = {0.1, -0.2, 0.3, 0.05, -0.4};
    auto a = dsvm::encode_backward(m.phi, r);
    std::vector<double> r2 = r;
    r2[0] += 1.0;
    r2[1] -= 2.0;
    auto a2 = dsvm::encode_backward(m.phi, r2);
    for (int i = 0; i < a[2].size(); ++i) {
        EXPECT_EQ(a[2][i], a2[2][i]);
        EXPECT_EQ(a[3][i], a2[3][i]);
        EXPECT_EQ(a[4][i], a2[4][i]);
    }
    // And the prefix states do change.
    EXPECT_NE(a[0][0], a2[0][0]);
}

TEST(EncodeBackward, MatchesReversedLoopOracle) {
    Model m = random_model(37, toy_config());
    std::vector<double> r = {0.1, -0.2, 0.3};
    auto a = dsvm::encode_backward(m.phi, r);
    std::vector<double> state(m.phi.g_a.hidden_size(), 0.0);
    for (int t = 2; t >= 0; --t) {
        state = oracle::naive_gru(m.phi.g_a, state, {r[t]});
        for (int i = 0; i < a[t].size(); ++i) EXPECT_NEAR(a[t][i], state[i], 1e-12);
    }
}

TEST(EncodeBackward, EmptySequenceThrows) {
    Model m = random_model(1, toy_config());
    EXPECT_THROW(dsvm::encode_backward(m.phi, std::span<const double>{}), DomainError);
}

TEST(PosteriorStep, ZeroNoiseGivesMean) {
    Model m = random_model(41, toy_config());
    Array a_t(m.phi.cfg.d_a, 1);
    a_t[0] = 0.2;
    dsvm::PosteriorStep post =
        dsvm::posterior_step(m.phi, Array::scalar(0.1), a_t, Array::scalar(0.0));
    EXPECT_EQ(post.z[0], post.mean[0]);
}

TEST(PosteriorStep, ZeroWeightsScaleNoiseByLogTwo) {
    Model m = zero_model(toy_config());
    Array a_t(m.phi.cfg.d_a, 1);
    dsvm::PosteriorStep post =
        dsvm::posterior_step(m.phi, Array::scalar(0.0), a_t, Array::scalar(1.7));
    EXPECT_DOUBLE_EQ(post.z[0], 1.7 * kLogTwoFloored);
}

TEST(PosteriorStep, EmpiricalMomentsMatchParameters) {
    Model m = random_model(43, toy_config());
    Array a_t(m.phi.cfg.d_a, 1);
    a_t[0] = -0.4;
    Array z_prev = Array::scalar(0.25);
    dsvm::PosteriorStep ref =
        dsvm::posterior_step(m.phi, z_prev, a_t, Array::scalar(0.0));
    const double mean = ref.mean[0], stdv = ref.std[0];

    Rng rng(777);
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        dsvm::PosteriorStep post =
            dsvm::posterior_step(m.phi, z_prev, a_t, Array::scalar(rng.normal()));
        s += post.z[0];
        s2 += post.z[0] * post.z[0];
    }
    const double emp_mean = s / n;
    const double emp_std = std::sqrt(s2 / n - emp_mean * emp_mean);
    EXPECT_NEAR(emp_mean, mean, 3.0 * stdv / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(emp_std, stdv, 3.0 * stdv / std::sqrt(2.0 * n));
}

TEST(Elbo, SharedZeroWeightsHaveZeroKl) {
    Model m = zero_model(toy_config());
    const double r[] = {0.12, -0.3, 0.07, 0.2};
    Rng rng(5);
    auto eta = dsvm::draw_eta(4, 1, rng);
    dsvm::LatentPath path;
    const double value = dsvm::elbo_value(m.theta, m.phi, r, eta, &path);

    double expect = 0.0;
    for (double rt : r)
        expect += kernel::gaussian_log_density_value(rt, 0.0, kLogTwoFloored);
    EXPECT_DOUBLE_EQ(value, expect);
    for (int t = 0; t < 4; ++t) {
        EXPECT_EQ(path.post_mean[t][0], path.prior_mean[t][0]);
        EXPECT_EQ(path.post_std[t][0], path.prior_std[t][0]);
        EXPECT_DOUBLE_EQ(path.sigma[t], kLogTwoFloored);
    }
}

TEST(Elbo, TapeAndPlainValuesAgreeBitwise) {
    Model m = random_model(53, toy_config());
    const double r[] = {0.12, -0.3, 0.07};
    Rng rng(6);
    auto eta = dsvm::draw_eta(3, 1, rng);

    dsvm::LatentPath plain_path;
    const double plain = dsvm::elbo_value(m.theta, m.phi, r, eta, &plain_path);

    Tape tape;
    auto theta_vars = dsvm::bind(tape, m.theta);
    auto phi_vars = dsvm::bind(tape, m.phi);
    dsvm::LatentPath tape_path;
    Var v = dsvm::elbo(tape, theta_vars, phi_vars, r, eta, &tape_path);

    EXPECT_EQ(plain, v.value()[0]);
    for (int t = 0; t < 3; ++t) {
        EXPECT_EQ(plain_path.sigma[t], tape_path.sigma[t]);
        EXPECT_EQ(plain_path.z[t][0], tape_path.z[t][0]);
        EXPECT_EQ(plain_path.post_std[t][0], tape_path.post_std[t][0]);
    }
}

TEST(Elbo, ReparameterizationIdentityHoldsExactly) {
    Model m = random_model(59, toy_config());
    const double r[] = {0.12, -0.3, 0.07};
    Rng rng(7);
    auto eta = dsvm::draw_eta(3, 1, rng);
    dsvm::LatentPath path;
    dsvm::elbo_value(m.theta, m.phi, r, eta, &path);
    for (int t = 0; t < 3; ++t)
        EXPECT_EQ(path.z[t][0], path.post_mean[t][0] + path.eta[t][0] * path.post_std[t][0]);
}

TEST(Elbo, PositivityOfAllScaleParameters) {
    for (uint64_t seed = 0; seed < 10; ++seed) {
        Model m = random_model(seed, toy_config());
        const double r[] = {0.5, -1.2, 0.3, 0.0, 2.0};
        Rng rng(seed + 100);
        auto eta = dsvm::draw_eta(5, 1, rng);
        dsvm::LatentPath path;
        dsvm::elbo_value(m.theta, m.phi, r, eta, &path);
        for (int t = 0; t < 5; ++t) {
            EXPECT_GT(path.sigma[t], 0.0);
            EXPECT_GT(path.prior_std[t][0], 0.0);
            EXPECT_GT(path.post_std[t][0], 0.0);
        }
    }
}

TEST(Elbo, MonteCarloMeanMatchesQuadratureT1) {
    Model m = random_model(61, toy_config());
    const double r[] = {0.4};
    const double quad = oracle::quadrature_elbo(m.theta, m.phi, r, 64);

    Rng rng(8);
    const int n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
        auto eta = dsvm::draw_eta(1, 1, rng);
        const double v = dsvm::elbo_value(m.theta, m.phi, r, eta);
        acc += v;
        acc2 += v * v;
    }
    const double mean = acc / n;
    const double se = std::sqrt((acc2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, quad, std::max(1e-2, 3.0 * se));
}

TEST(Elbo, MonteCarloMeanMatchesQuadratureT2) {
    Model m = random_model(67, toy_config());
    const double r[] = {0.4, -0.6};
    const double quad = oracle::quadrature_elbo(m.theta, m.phi, r, 64);

    Rng rng(9);
    const int n = 100000;
    double acc = 0.0, acc2 = 0.0;
    for (int i = 0; i < n; ++i) {
        auto eta = dsvm::draw_eta(2, 1, rng);
        const double v = dsvm::elbo_value(m.theta, m.phi, r, eta);
        acc += v;
        acc2 += v * v;
    }
    const double mean = acc / n;
    const double se = std::sqrt((acc2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, quad, std::max(1e-2, 3.0 * se));
}

TEST(Elbo, LowerBoundsLogMarginal) {
    for (uint64_t seed = 0; seed < 8; ++seed) {
        Model m = random_model(seed * 13 + 1, toy_config());
        const double r1[] = {0.3};
        EXPECT_LE(oracle::quadrature_elbo(m.theta, m.phi, r1, 64),
                  oracle::log_marginal(m.theta, r1, 128) + 1e-6);
        const double r2[] = {0.3, -0.9};
        EXPECT_LE(oracle::quadrature_elbo(m.theta, m.phi, r2, 64),
                  oracle::log_marginal(m.theta, r2, 128) + 1e-6);
    }
}

TEST(Elbo, DivergenceErrorCarriesTimestep) {
    Model m = random_model(71, toy_config());
    const double r[] = {0.1, 1e308, 0.1};
    Rng rng(10);
    auto eta = dsvm::draw_eta(3, 1, rng);
    try {
        dsvm::elbo_value(m.theta, m.phi, r, eta);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.timestep(), 2);
    }
}

TEST(Elbo, GenerativeCausality) {
    // sigma_t depends only on (sigma_{1:t-1}, r_{1:t-1}, z_{1:t}): with a
    // frozen z path, perturbing r at t' >= t leaves sigma_t unchanged.
    Model m = random_model(73, toy_config());
    std::vector<double> r = {0.1, -0.2, 0.3, 0.4, -0.5};
    std::vector<double> z = {0.5, -0.1, 0.8, -0.3, 0.2};

    const auto unroll = [&](const std::vector<double>& returns) {
        std::vector<double> sigma;
        Array h(m.theta.cfg.d_h, 1);
        double sigma_prev = 0.0, r_prev = 0.0;
        for (size_t t = 0; t < returns.size(); ++t) {
            dsvm::VolStep v =
                dsvm::volatility_step(m.theta, h, sigma_prev, r_prev, Array::scalar(z[t]));
            sigma.push_back(v.sigma);
            h = std::move(v.h);
            sigma_prev = v.sigma;
            r_prev = returns[t];
        }
        return sigma;
    };

    const auto base = unroll(r);
    std::vector<double> perturbed = r;
    perturbed[2] += 5.0;
    perturbed[3] -= 2.0;
    perturbed[4] += 1.0;
    const auto after = unroll(perturbed);
    EXPECT_EQ(base[0], after[0]);
    EXPECT_EQ(base[1], after[1]);
    EXPECT_EQ(base[2], after[2]);  // r_3 enters only h_4
    EXPECT_NE(base[3], after[3]);
}

TEST(Elbo, PosteriorCausality) {
    // m_q, v_q at step t depend on (z_{t-1}, r_{t:T}) only.
    Model m = random_model(79, toy_config());
    std::vector<double> r = {0.1, -0.2, 0.3, 0.4};
    Rng rng(11);
    auto eta = dsvm::draw_eta(4, 1, rng);

    auto a1 = dsvm::encode_backward(m.phi, r);
    std::vector<double> r2 = r;
    r2[0] += 3.0;  // strictly before t = 2 (0-based index 1)
    auto a2 = dsvm::encode_backward(m.phi, r2);

    Array z_prev = Array::scalar(0.4);
    dsvm::PosteriorStep p1 = dsvm::posterior_step(m.phi, z_prev, a1[1], eta[1]);
    dsvm::PosteriorStep p2 = dsvm::posterior_step(m.phi, z_prev, a2[1], eta[1]);
    EXPECT_EQ(p1.mean[0], p2.mean[0]);
    EXPECT_EQ(p1.std[0], p2.std[0]);
}

TEST(Generate, ZeroWeightsGiveConstantSigmaAndMatchingSampleStd) {
    Model m = zero_model(toy_config());
    Rng rng(12);
    auto path = dsvm::generate(m.theta, rng, 100000);
    for (int t = 0; t < 5; ++t) EXPECT_DOUBLE_EQ(path.sigma[t], kLogTwoFloored);
    double s2 = 0.0;
    for (double r : path.returns) s2 += r * r;
    const double sample_std = std::sqrt(s2 / path.returns.size());
    EXPECT_NEAR(sample_std, kLogTwoFloored,
                3.0 * kLogTwoFloored / std::sqrt(2.0 * path.returns.size()));
}

TEST(Generate, SameSeedSamePath) {
    Model m = random_model(83, toy_config());
    Rng a(99), b(99);
    auto pa = dsvm::generate(m.theta, a, 50);
    auto pb = dsvm::generate(m.theta, b, 50);
    for (int t = 0; t < 50; ++t) {
        EXPECT_EQ(pa.returns[t], pb.returns[t]);
        EXPECT_EQ(pa.sigma[t], pb.sigma[t]);
    }
}

TEST(Generate, FirstLatentFollowsPrior) {
    Model m = random_model(89, toy_config());
    auto [mean, stdv] = dsvm::prior_step(m.theta, Array::scalar(0.0));
    Rng rng(13);
    const int n = 100000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        auto path = dsvm::generate(m.theta, rng, 1);
        s += path.z[0][0];
        s2 += path.z[0][0] * path.z[0][0];
    }
    const double emp_mean = s / n;
    const double emp_std = std::sqrt(s2 / n - emp_mean * emp_mean);
    EXPECT_NEAR(emp_mean, mean[0], 3.0 * stdv[0] / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(emp_std, stdv[0], 3.0 * stdv[0] / std::sqrt(2.0 * n));
}

TEST(Elbo, FullGradCheckWithFrozenNoise) {
    // Gradients of the frozen-noise ELBO w.r.t. every parameter.
    ModelConfig cfg = toy_config();
    Model m = random_model(97, cfg);
    const std::vector<double> returns = {0.2, -0.4, 0.1};
    Rng rng(14);
    auto eta = dsvm::draw_eta(3, 1, rng);

    ParamSet set;
    m.theta.collect(set);
    m.phi.collect(set);
    std::vector<Array> leaves = set.clone_values();

    // Wire the grad_check leaves straight into the bound-parameter structs
    // (same order as collect()), so adjoints land on the checked leaves.
    const auto builder = [&](Tape& tape, std::span<const Var> v) {
        dsvm::GenerativeVars tv{
            MlpVars{v[0], v[1], v[2], v[3], v[4], v[5], m.theta.f1.output_act},
            MlpVars{v[6], v[7], v[8], v[9], v[10], v[11], m.theta.f2.output_act},
            MlpVars{v[12], v[13], v[14], v[15], v[16], v[17], m.theta.f3.output_act},
            GruVars{v[18], v[19], v[20], v[21], v[22], v[23], v[24], v[25], v[26]}};
        dsvm::InferenceVars pv{
            MlpVars{v[27], v[28], v[29], v[30], v[31], v[32], m.phi.g1.output_act},
            MlpVars{v[33], v[34], v[35], v[36], v[37], v[38], m.phi.g2.output_act},
            GruVars{v[39], v[40], v[41], v[42], v[43], v[44], v[45], v[46], v[47]}};
        return dsvm::elbo(tape, tv, pv, returns, eta);
    };
    EXPECT_LT(grad_check(builder, leaves, 1e-5), 1e-4);
}
