#include "volcast/nets.hpp"

#include <cmath>

#include "volcast/errors.hpp"

namespace volcast {

void ParamSet::assign_values(const std::vector<Array>& values) {
    if (values.size() != entries_.size()) throw UsageError("ParamSet: value count mismatch");
    for (size_t i = 0; i < values.size(); ++i) {
        if (!values[i].same_shape(*entries_[i].array))
            throw ShapeError("ParamSet: shape mismatch for " + entries_[i].name);
        *entries_[i].array = values[i];
    }
}

void MlpParams::collect(ParamSet& set, const std::string& prefix) {
    set.add(prefix + ".w1", &w1);
    set.add(prefix + ".b1", &b1);
    set.add(prefix + ".w2", &w2);
    set.add(prefix + ".b2", &b2);
    set.add(prefix + ".w3", &w3);
    set.add(prefix + ".b3", &b3);
}

void GruParams::collect(ParamSet& set, const std::string& prefix) {
    set.add(prefix + ".wu", &wu);
    set.add(prefix + ".uu", &uu);
    set.add(prefix + ".bu", &bu);
    set.add(prefix + ".wr", &wr);
    set.add(prefix + ".ur", &ur);
    set.add(prefix + ".br", &br);
    set.add(prefix + ".wc", &wc);
    set.add(prefix + ".uc", &uc);
    set.add(prefix + ".bc", &bc);
}

namespace {

Array glorot(int out, int in, Rng& rng) {
    Array w(out, in);
    const double bound = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < w.size(); ++i) w[i] = (2.0 * rng.uniform01() - 1.0) * bound;
    return w;
}

}  // namespace

MlpParams init_mlp(int in, int hidden, int out, OutputAct act, Rng& rng) {
    if (in <= 0 || hidden <= 0 || out <= 0) throw DomainError("init_mlp: sizes must be positive");
    MlpParams p;
    p.w1 = glorot(hidden, in, rng);
    p.b1 = Array(hidden, 1);
    p.w2 = glorot(hidden, hidden, rng);
    p.b2 = Array(hidden, 1);
    p.w3 = glorot(out, hidden, rng);
    p.b3 = Array(out, 1);
    p.output_act = act;
    return p;
}

GruParams init_gru(int in, int hidden, Rng& rng) {
    if (in <= 0 || hidden <= 0) throw DomainError("init_gru: sizes must be positive");
    GruParams p;
    p.wu = glorot(hidden, in, rng);
    p.uu = glorot(hidden, hidden, rng);
    p.bu = Array(hidden, 1);
    p.wr = glorot(hidden, in, rng);
    p.ur = glorot(hidden, hidden, rng);
    p.br = Array(hidden, 1);
    p.wc = glorot(hidden, in, rng);
    p.uc = glorot(hidden, hidden, rng);
    p.bc = Array(hidden, 1);
    return p;
}

Array mlp_forward(const MlpParams& p, const Array& x) {
    if (x.rows() != p.input_size() || !x.is_vector())
        throw ShapeError("mlp_forward: input " + x.shape_str() + " does not match width " +
                         std::to_string(p.input_size()));
    Array h1 = kernel::tanh(kernel::add(kernel::matmul(p.w1, x), p.b1));
    Array h2 = kernel::tanh(kernel::add(kernel::matmul(p.w2, h1), p.b2));
    Array out = kernel::add(kernel::matmul(p.w3, h2), p.b3);
    if (p.output_act == OutputAct::kSoftplus) out = kernel::shift(kernel::softplus(out), kStdFloor);
    kernel::ensure_finite(out, "mlp_forward");
    return out;
}

Array gru_step(const GruParams& p, const Array& h_prev, const Array& x) {
    if (x.rows() != p.input_size() || h_prev.rows() != p.hidden_size())
        throw ShapeError("gru_step: input " + x.shape_str() + " / state " + h_prev.shape_str() +
                         " do not match cell (" + std::to_string(p.input_size()) + " -> " +
                         std::to_string(p.hidden_size()) + ")");
    using namespace kernel;
    Array u = sigmoid(add(add(matmul(p.wu, x), matmul(p.uu, h_prev)), p.bu));
    Array r = sigmoid(add(add(matmul(p.wr, x), matmul(p.ur, h_prev)), p.br));
    Array c = tanh(add(add(matmul(p.wc, x), matmul(p.uc, mul(r, h_prev))), p.bc));
    Array h(h_prev.rows(), 1);
    for (int i = 0; i < h.size(); ++i) h[i] = u[i] * h_prev[i] + (1.0 - u[i]) * c[i];
    ensure_finite(h, "gru_step");
    return h;
}

MlpVars bind(Tape& tape, const MlpParams& p) {
    return MlpVars{tape.leaf(p.w1), tape.leaf(p.b1), tape.leaf(p.w2),
                   tape.leaf(p.b2), tape.leaf(p.w3), tape.leaf(p.b3), p.output_act};
}

GruVars bind(Tape& tape, const GruParams& p) {
    return GruVars{tape.leaf(p.wu), tape.leaf(p.uu), tape.leaf(p.bu),
                   tape.leaf(p.wr), tape.leaf(p.ur), tape.leaf(p.br),
                   tape.leaf(p.wc), tape.leaf(p.uc), tape.leaf(p.bc)};
}

Var mlp_forward(const MlpVars& p, Var x) {
    Var h1 = tanh(add(matmul(p.w1, x), p.b1));
    Var h2 = tanh(add(matmul(p.w2, h1), p.b2));
    Var out = add(matmul(p.w3, h2), p.b3);
    if (p.output_act == OutputAct::kSoftplus) out = shift(softplus(out), kStdFloor);
    return out;
}

Var gru_step(const GruVars& p, Var h_prev, Var x) {
    Var u = sigmoid(add(add(matmul(p.wu, x), matmul(p.uu, h_prev)), p.bu));
    Var r = sigmoid(add(add(matmul(p.wr, x), matmul(p.ur, h_prev)), p.br));
    Var c = tanh(add(add(matmul(p.wc, x), matmul(p.uc, mul(r, h_prev))), p.bc));
    Var one_minus_u = shift(neg(u), 1.0);
    return add(mul(u, h_prev), mul(one_minus_u, c));
}

}  // namespace volcast
