#include "volcast/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "volcast/errors.hpp"

namespace volcast {

namespace {

double simplex_diameter(const std::vector<std::vector<double>>& xs) {
    double d = 0.0;
    for (size_t i = 1; i < xs.size(); ++i) {
        double s = 0.0;
        for (size_t k = 0; k < xs[0].size(); ++k) {
            const double diff = xs[i][k] - xs[0][k];
            s += diff * diff;
        }
        d = std::max(d, std::sqrt(s));
    }
    return d;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                             std::span<const double> x0, const NelderMeadOptions& opts) {
    const size_t n = x0.size();
    if (n == 0) throw DomainError("nelder_mead: empty start point");

    std::vector<std::vector<double>> xs(n + 1, std::vector<double>(x0.begin(), x0.end()));
    for (size_t i = 0; i < n; ++i) xs[i + 1][i] += opts.init_step;
    std::vector<double> fs(n + 1);
    for (size_t i = 0; i <= n; ++i) fs[i] = f(xs[i]);

    std::vector<size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);

    NelderMeadResult result;
    int iter = 0;
    for (; iter < opts.max_iter; ++iter) {
        std::iota(order.begin(), order.end(), size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return fs[a] < fs[b]; });
        const size_t best = order[0], worst = order[n], second_worst = order[n - 1];

        if (simplex_diameter(xs) < opts.diameter_tol) {
            result.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (size_t i = 0; i <= n; ++i) {
            if (i == worst) continue;
            for (size_t k = 0; k < n; ++k) centroid[k] += xs[i][k];
        }
        for (size_t k = 0; k < n; ++k) centroid[k] /= static_cast<double>(n);

        for (size_t k = 0; k < n; ++k) xr[k] = centroid[k] + (centroid[k] - xs[worst][k]);
        const double fr = f(xr);

        if (fr < fs[best]) {
            for (size_t k = 0; k < n; ++k) xe[k] = centroid[k] + 2.0 * (centroid[k] - xs[worst][k]);
            const double fe = f(xe);
            if (fe < fr) {
                xs[worst] = xe;
                fs[worst] = fe;
            } else {
                xs[worst] = xr;
                fs[worst] = fr;
            }
        } else if (fr < fs[second_worst]) {
            xs[worst] = xr;
            fs[worst] = fr;
        } else {
            const bool outside = fr < fs[worst];
            if (outside) {
                for (size_t k = 0; k < n; ++k) xc[k] = centroid[k] + 0.5 * (xr[k] - centroid[k]);
            } else {
                for (size_t k = 0; k < n; ++k)
                    xc[k] = centroid[k] + 0.5 * (xs[worst][k] - centroid[k]);
            }
            const double fc = f(xc);
            if (fc < std::min(fr, fs[worst])) {
                xs[worst] = xc;
                fs[worst] = fc;
            } else {
                // shrink toward the best vertex
                for (size_t i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    for (size_t k = 0; k < n; ++k)
                        xs[i][k] = xs[best][k] + 0.5 * (xs[i][k] - xs[best][k]);
                    fs[i] = f(xs[i]);
                }
            }
        }
    }

    size_t best = 0;
    for (size_t i = 1; i <= n; ++i)
        if (fs[i] < fs[best]) best = i;
    result.x = xs[best];
    result.fx = fs[best];
    result.iterations = iter;
    return result;
}

}  // namespace volcast
