#pragma once

#include <functional>
#include <span>
#include <vector>

namespace volcast {

struct NelderMeadOptions {
    double diameter_tol = 1e-8;  // stop when max vertex distance falls below
    int max_iter = 4000;
    double init_step = 0.25;     // initial simplex offset per coordinate
};

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Downhill simplex minimization (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). The objective may return +inf or a large penalty outside its
// domain.
NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, const NelderMeadOptions& opts = {});

}  // namespace volcast
