#pragma once

#include <functional>
#include <vector>

namespace oracle {

// Gauss-Hermite nodes/weights for integrals of the form
// int exp(-x^2) f(x) dx (physicists' convention).
struct GaussHermite {
    std::vector<double> nodes, weights;
};
GaussHermite gauss_hermite(int n);

// E[f(Z)] for Z ~ N(mean, std^2) via an n-point Gauss-Hermite rule.
double expect_normal(double mean, double std, int n, const std::function<double(double)>& f);

// Trapezoid rule on a uniform grid over [lo, hi].
double trapezoid(double lo, double hi, int points, const std::function<double(double)>& f);

}  // namespace oracle
