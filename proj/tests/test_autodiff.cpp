#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles/naive_nets.hpp"
#include "oracles/quadrature.hpp"
#include "volcast/errors.hpp"
#include "volcast/grad_check.hpp"
#include "volcast/rng.hpp"
#include "volcast/tape.hpp"

using namespace volcast;

namespace {

Array random_array(int rows, int cols, Rng& rng, double scale = 1.0) {
    Array a(rows, cols);
    for (int i = 0; i < a.size(); ++i) a[i] = scale * (2.0 * rng.uniform01() - 1.0);
    return a;
}

}  // namespace

TEST(ForwardOps, ClosedFormPoints) {
    Tape tape;
    Var zero = tape.constant(0.0);
    EXPECT_DOUBLE_EQ(softplus(zero).value()[0], std::log(2.0));
    EXPECT_DOUBLE_EQ(tanh(zero).value()[0], 0.0);
    EXPECT_DOUBLE_EQ(sigmoid(zero).value()[0], 0.5);
}

TEST(ForwardOps, MatmulIdentity) {
    Tape tape;
    Array eye(2, 2);
    eye(0, 0) = eye(1, 1) = 1.0;
    Var m = tape.leaf(eye);
    Var x = tape.leaf(Array::from_vector({1.0, 2.0}));
    Var y = matmul(m, x);
    EXPECT_DOUBLE_EQ(y.value()[0], 1.0);
    EXPECT_DOUBLE_EQ(y.value()[1], 2.0);
}

TEST(ForwardOps, ShapeMismatchNamesOpAndShapes) {
    Tape tape;
    Var a = tape.leaf(Array(2, 3));
    Var b = tape.leaf(Array(2, 1));
    try {
        matmul(a, b);
        FAIL() << "expected ShapeError";
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("matmul"), std::string::npos) << msg;
        EXPECT_NE(msg.find("(2x3)"), std::string::npos) << msg;
        EXPECT_NE(msg.find("(2x1)"), std::string::npos) << msg;
    }
    EXPECT_THROW(add(a, b), ShapeError);
}

TEST(ForwardOps, NonFiniteIsAnError) {
    Tape tape;
    EXPECT_THROW(log(tape.constant(-1.0)), NonFiniteError);
    EXPECT_THROW(exp(tape.constant(1000.0)), NonFiniteError);
    EXPECT_THROW(tape.leaf(Array::scalar(std::nan(""))), NonFiniteError);
}

TEST(ForwardOps, SoftplusOverflowSafe) {
    Tape tape;
    // Raw log(1+e^x) overflows long before x = 800.
    Var big = softplus(tape.constant(800.0));
    EXPECT_DOUBLE_EQ(big.value()[0], 800.0);
    Var small = softplus(tape.constant(-800.0));
    EXPECT_DOUBLE_EQ(small.value()[0], 0.0);
}

TEST(GaussianLogDensity, ClosedFormPoints) {
    Tape tape;
    Var v1 = gaussian_log_density(tape.constant(0.0), tape.constant(0.0), tape.constant(1.0));
    EXPECT_NEAR(v1.value()[0], -0.918939, 1e-6);
    Var v2 = gaussian_log_density(tape.constant(1.0), tape.constant(0.0), tape.constant(1.0));
    EXPECT_NEAR(v2.value()[0], -1.418939, 1e-6);
}

TEST(GaussianLogDensity, MatchesHighPrecisionOracle) {
    Tape tape;
    Var v = gaussian_log_density(tape.constant(0.3), tape.constant(0.1), tape.constant(0.5));
    EXPECT_NEAR(v.value()[0], oracle::naive_gaussian_log_density(0.3, 0.1, 0.5), 1e-14);
}

TEST(GaussianLogDensity, RejectsNonPositiveStd) {
    Tape tape;
    EXPECT_THROW(
        gaussian_log_density(tape.constant(0.0), tape.constant(0.0), tape.constant(0.0)),
        DomainError);
    EXPECT_THROW(
        gaussian_log_density(tape.constant(0.0), tape.constant(0.0), tape.constant(-1.0)),
        DomainError);
}

TEST(GaussianKl, ClosedFormPoints) {
    Tape tape;
    Var same = gaussian_kl(tape.constant(0.0), tape.constant(1.0), tape.constant(0.0),
                           tape.constant(1.0));
    EXPECT_DOUBLE_EQ(same.value()[0], 0.0);
    Var shifted = gaussian_kl(tape.constant(1.0), tape.constant(1.0), tape.constant(0.0),
                              tape.constant(1.0));
    EXPECT_DOUBLE_EQ(shifted.value()[0], 0.5);
}

TEST(GaussianKl, MatchesGridIntegrationOracle) {
    const double mq = 0.2, vq = 0.9, mp = -0.1, vp = 1.3;
    // int q log(q/p) over a grid wide enough to be exhaustive for these stds.
    const double integral = oracle::trapezoid(-14.0, 14.0, 400001, [&](double z) {
        const double lq = oracle::naive_gaussian_log_density(z, mq, vq);
        const double lp = oracle::naive_gaussian_log_density(z, mp, vp);
        return std::exp(lq) * (lq - lp);
    });
    Tape tape;
    Var kl = gaussian_kl(tape.constant(mq), tape.constant(vq), tape.constant(mp),
                         tape.constant(vp));
    EXPECT_NEAR(kl.value()[0], integral, 1e-9);
}

TEST(GaussianKl, NonNegativeAndZeroOnlyAtEquality) {
    Rng rng(77);
    for (int i = 0; i < 200; ++i) {
        const double mq = 2.0 * rng.uniform01() - 1.0;
        const double vq = 0.1 + 2.0 * rng.uniform01();
        const double mp = 2.0 * rng.uniform01() - 1.0;
        const double vp = 0.1 + 2.0 * rng.uniform01();
        Tape tape;
        Var kl = gaussian_kl(tape.constant(mq), tape.constant(vq), tape.constant(mp),
                             tape.constant(vp));
        EXPECT_GE(kl.value()[0], 0.0);
        if (mq != mp || vq != vp) {
            EXPECT_GT(kl.value()[0], 0.0);
        }
        Tape tape2;
        Var zero = gaussian_kl(tape2.constant(mq), tape2.constant(vq), tape2.constant(mq),
                               tape2.constant(vq));
        EXPECT_DOUBLE_EQ(zero.value()[0], 0.0);
    }
}

TEST(Backward, SoftplusDerivativeAtZero) {
    Tape tape;
    Var x = tape.leaf(Array::scalar(0.0));
    Var y = softplus(x);
    tape.backward(y);
    EXPECT_DOUBLE_EQ(x.adjoint()[0], 0.5);
}

TEST(Backward, KlMeanGradient) {
    Tape tape;
    Var mq = tape.leaf(Array::scalar(1.0));
    Var kl = gaussian_kl(mq, tape.constant(1.0), tape.constant(0.0), tape.constant(1.0));
    tape.backward(kl);
    EXPECT_DOUBLE_EQ(mq.adjoint()[0], 1.0);
}

TEST(Backward, AccumulatesFanOut) {
    // f(x) = x*x + x => f'(x) = 2x + 1
    Tape tape;
    Var x = tape.leaf(Array::scalar(3.0));
    Var y = add(mul(x, x), x);
    tape.backward(y);
    EXPECT_DOUBLE_EQ(x.adjoint()[0], 7.0);
}

TEST(Backward, RequiresScalarOutput) {
    Tape tape;
    Var x = tape.leaf(Array::from_vector({1.0, 2.0}));
    EXPECT_THROW(tape.backward(x), UsageError);
}

TEST(Backward, RepeatedBackwardNeedsReset) {
    Tape tape;
    Var x = tape.leaf(Array::scalar(2.0));
    Var y = mul(x, x);
    tape.backward(y);
    EXPECT_DOUBLE_EQ(x.adjoint()[0], 4.0);
    EXPECT_THROW(tape.backward(y), UsageError);
    tape.reset();
    tape.backward(y);
    EXPECT_DOUBLE_EQ(x.adjoint()[0], 4.0);
}

TEST(Backward, ThreeLayerCompositeMatchesFiniteDifferences) {
    Rng rng(1234);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<Array> leaves = {
            random_array(3, 4, rng), random_array(3, 1, rng), random_array(3, 3, rng),
            random_array(3, 1, rng), random_array(4, 1, rng),
        };
        const auto builder = [](Tape&, std::span<const Var> v) {
            Var h1 = tanh(add(matmul(v[0], v[4]), v[1]));
            Var h2 = softplus(add(matmul(v[2], h1), v[3]));
            return sum(mul(h2, h2));
        };
        EXPECT_LT(grad_check(builder, leaves, 1e-5), 1e-5);
    }
}

// Every registered op differentiates against central differences.
TEST(Backward, EveryOpMatchesFiniteDifferences) {
    Rng rng(999);
    const double tol = 1e-5;

    const auto check = [&](const NodeBuilder& b, std::vector<Array> leaves) {
        EXPECT_LT(grad_check(b, leaves, 1e-5), tol);
    };

    check([](Tape&, std::span<const Var> v) { return sum(matmul(v[0], v[1])); },
          {random_array(3, 3, rng), random_array(3, 2, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(add(v[0], v[1])); },
          {random_array(4, 1, rng), random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(mul(v[0], v[1])); },
          {random_array(4, 1, rng), random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(neg(v[0])); },
          {random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(scale(v[0], -2.5)); },
          {random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(shift(v[0], 1.5)); },
          {random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(mul(concat({v[0], v[1]}),
                                                             concat({v[1], v[0]}))); },
          {random_array(3, 1, rng), random_array(3, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(tanh(v[0])); },
          {random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(sigmoid(v[0])); },
          {random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(softplus(v[0])); },
          {random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(exp(v[0])); },
          {random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return sum(log(shift(softplus(v[0]), 0.1))); },
          {random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) { return index(v[0], 2); },
          {random_array(4, 1, rng)});
    check([](Tape&, std::span<const Var> v) {
              return gaussian_log_density(index(v[0], 0), index(v[0], 1),
                                          shift(softplus(index(v[0], 2)), 0.05));
          },
          {random_array(3, 1, rng)});
    check([](Tape&, std::span<const Var> v) {
              Var vq = shift(softplus(index(v[0], 1)), 0.05);
              Var vp = shift(softplus(index(v[0], 3)), 0.05);
              return gaussian_kl(index(v[0], 0), vq, index(v[0], 2), vp);
          },
          {random_array(4, 1, rng)});
}

TEST(GradCheck, LinearMapIsExact) {
    Rng rng(5);
    std::vector<Array> leaves = {random_array(4, 1, rng)};
    const auto builder = [](Tape&, std::span<const Var> v) { return sum(scale(v[0], 3.0)); };
    EXPECT_LT(grad_check(builder, leaves, 1e-5), 1e-10);
}

TEST(GradCheck, SoftplusChain) {
    Rng rng(6);
    std::vector<Array> leaves = {random_array(4, 1, rng)};
    const auto builder = [](Tape&, std::span<const Var> v) {
        return sum(softplus(softplus(v[0])));
    };
    EXPECT_LT(grad_check(builder, leaves, 1e-5), 1e-6);
}

TEST(Rng, IdenticalSeedsGiveIdenticalStreams) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(a.next_u64(), b.next_u64());
    }
    Rng c(42), d(42);
    for (int i = 0; i < 1000; ++i) {
        EXPECT_EQ(c.normal(), d.normal());
        EXPECT_EQ(c.uniform01(), d.uniform01());
    }
}

TEST(Rng, DeriveIsIndependentOfDrawCount) {
    Rng a(42), b(42);
    (void)a.normal();
    (void)a.normal();
    EXPECT_EQ(a.derive(7).next_u64(), b.derive(7).next_u64());
    EXPECT_NE(a.derive(7).next_u64(), a.derive(8).next_u64());
}

TEST(Rng, NormalMomentsSane) {
    Rng rng(2024);
    const int n = 200000;
    double s = 0.0, s2 = 0.0, s3 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
        s3 += z * z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(static_cast<double>(n)));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
    EXPECT_NEAR(s3 / n, 0.0, 5.0 * std::sqrt(15.0 / n));
}

TEST(Quadrature, GaussHermiteSanity) {
    const auto gh = oracle::gauss_hermite(64);
    double w_sum = 0.0, wx2_sum = 0.0;
    for (int i = 0; i < 64; ++i) {
        w_sum += gh.weights[i];
        wx2_sum += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
    }
    const double sqrt_pi = 1.7724538509055160273;
    EXPECT_NEAR(w_sum, sqrt_pi, 1e-12);
    EXPECT_NEAR(wx2_sum, sqrt_pi / 2.0, 1e-12);
    // E[Z^4] = 3 for a standard normal.
    EXPECT_NEAR(oracle::expect_normal(0.0, 1.0, 64, [](double z) { return z * z * z * z; }),
                3.0, 1e-10);
}
