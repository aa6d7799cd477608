#include "volcast/grad_check.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "volcast/errors.hpp"

namespace volcast {

namespace {

double eval_scalar(const NodeBuilder& f, std::span<const Array> leaves) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(leaves.size());
    for (const Array& a : leaves) vars.push_back(tape.leaf(a));
    Var out = f(tape, vars);
    if (!out.value().is_scalar()) throw UsageError("grad_check: builder must return a scalar");
    return out.value()[0];
}

}  // namespace

double grad_check(const NodeBuilder& f, std::span<const Array> leaves, double step) {
    Tape tape;
    std::vector<Var> vars;
    vars.reserve(leaves.size());
    for (const Array& a : leaves) vars.push_back(tape.leaf(a));
    Var out = f(tape, vars);
    if (!out.value().is_scalar()) throw UsageError("grad_check: builder must return a scalar");
    tape.backward(out);

    double worst = 0.0;
    std::vector<Array> probe(leaves.begin(), leaves.end());
    for (size_t l = 0; l < leaves.size(); ++l) {
        for (int i = 0; i < probe[l].size(); ++i) {
            const double x0 = probe[l][i];
            probe[l][i] = x0 + step;
            const double fp = eval_scalar(f, probe);
            probe[l][i] = x0 - step;
            const double fm = eval_scalar(f, probe);
            probe[l][i] = x0;

            const double fd = (fp - fm) / (2.0 * step);
            const double ad = vars[l].adjoint()[i];
            double err = std::fabs(ad - fd) / std::max(1.0, std::fabs(fd));
            if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace volcast
