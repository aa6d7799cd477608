#pragma once

#include <functional>
#include <span>

#include "volcast/array.hpp"
#include "volcast/tape.hpp"

namespace volcast {

// Builds a scalar expression from leaf variables. Must be deterministic in
// the leaf values (freeze any noise before checking).
using NodeBuilder = std::function<Var(Tape&, std::span<const Var>)>;

// Compares reverse-mode gradients against central finite differences with
// the given step. Returns max over all leaf entries of
//   |ad - fd| / max(1, |fd|).
// NaN anywhere counts as an infinite error.
double grad_check(const NodeBuilder& f, std::span<const Array> leaves, double step);

}  // namespace volcast
