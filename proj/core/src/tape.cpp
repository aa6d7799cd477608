#include "volcast/tape.hpp"

#include <cmath>
#include <string>

#include "volcast/errors.hpp"

namespace volcast {

using kernel::ensure_finite;

const Array& Var::value() const {
    return tape_->node(index_).value;
}

const Array& Var::adjoint() const {
    return tape_->node(index_).adjoint;
}

Var Tape::leaf(Array value) {
    ensure_finite(value, "leaf");
    Node n;
    n.adjoint = Array(value.rows(), value.cols());
    n.value = std::move(value);
    n.op = Op::kLeaf;
    nodes_.push_back(std::move(n));
    return Var(this, static_cast<int32_t>(nodes_.size() - 1));
}

Var emit(Tape& t, Tape::Op op, Array value, std::span<const Var> parents, double aux = 0.0) {
    Tape::Node n;
    n.adjoint = Array(value.rows(), value.cols());
    n.value = std::move(value);
    n.op = op;
    n.aux = aux;
    n.n_parents = static_cast<uint8_t>(parents.size());
    for (size_t i = 0; i < parents.size(); ++i) {
        if (parents[i].tape() != &t) throw UsageError("op inputs live on different tapes");
        n.parents[i] = parents[i].index();
    }
    t.nodes_.push_back(std::move(n));
    return Var(&t, static_cast<int32_t>(t.nodes_.size() - 1));
}

namespace {

Tape& tape_of(Var a) {
    if (!a.valid()) throw UsageError("op on default-constructed Var");
    return *a.tape();
}

void require_scalar(Var a, const char* op) {
    if (!a.value().is_scalar())
        throw ShapeError(std::string(op) + ": expected scalar, got " + a.value().shape_str());
}

double scalar_of(Var a, const char* op) {
    require_scalar(a, op);
    return a.value()[0];
}

// dst += a * b^T
void add_matmul_nt(Array& dst, const Array& a, const Array& b) {
    for (int i = 0; i < dst.rows(); ++i)
        for (int j = 0; j < dst.cols(); ++j) {
            double s = 0.0;
            for (int k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
            dst(i, j) += s;
        }
}

// dst += a^T * b
void add_matmul_tn(Array& dst, const Array& a, const Array& b) {
    for (int i = 0; i < dst.rows(); ++i)
        for (int j = 0; j < dst.cols(); ++j) {
            double s = 0.0;
            for (int k = 0; k < a.rows(); ++k) s += a(k, i) * b(k, j);
            dst(i, j) += s;
        }
}

}  // namespace

Var matmul(Var a, Var b) {
    Var ps[] = {a, b};
    Array v = kernel::matmul(a.value(), b.value());
    ensure_finite(v, "matmul");
    return emit(tape_of(a), Tape::Op::kMatmul, std::move(v), ps);
}

Var add(Var a, Var b) {
    Var ps[] = {a, b};
    Array v = kernel::add(a.value(), b.value());
    ensure_finite(v, "add");
    return emit(tape_of(a), Tape::Op::kAdd, std::move(v), ps);
}

Var sub(Var a, Var b) {
    return add(a, neg(b));
}

Var mul(Var a, Var b) {
    Var ps[] = {a, b};
    Array v = kernel::mul(a.value(), b.value());
    ensure_finite(v, "mul");
    return emit(tape_of(a), Tape::Op::kMul, std::move(v), ps);
}

Var neg(Var a) {
    Var ps[] = {a};
    return emit(tape_of(a), Tape::Op::kNeg, kernel::neg(a.value()), ps);
}

Var scale(Var a, double c) {
    Var ps[] = {a};
    Array v = kernel::scale(a.value(), c);
    ensure_finite(v, "scale");
    return emit(tape_of(a), Tape::Op::kScale, std::move(v), ps, c);
}

Var shift(Var a, double c) {
    Var ps[] = {a};
    Array v = kernel::shift(a.value(), c);
    ensure_finite(v, "shift");
    return emit(tape_of(a), Tape::Op::kShift, std::move(v), ps, c);
}

Var concat(std::span<const Var> parts) {
    if (parts.empty() || parts.size() > 4)
        throw UsageError("concat: expects 1..4 inputs, got " + std::to_string(parts.size()));
    const Array* arrs[4];
    for (size_t i = 0; i < parts.size(); ++i) arrs[i] = &parts[i].value();
    Array v = kernel::concat(std::span<const Array* const>(arrs, parts.size()));
    ensure_finite(v, "concat");
    return emit(tape_of(parts[0]), Tape::Op::kConcat, std::move(v), parts);
}

Var concat(std::initializer_list<Var> parts) {
    return concat(std::span<const Var>(parts.begin(), parts.size()));
}

Var tanh(Var a) {
    Var ps[] = {a};
    return emit(tape_of(a), Tape::Op::kTanh, kernel::tanh(a.value()), ps);
}

Var sigmoid(Var a) {
    Var ps[] = {a};
    return emit(tape_of(a), Tape::Op::kSigmoid, kernel::sigmoid(a.value()), ps);
}

Var softplus(Var a) {
    Var ps[] = {a};
    return emit(tape_of(a), Tape::Op::kSoftplus, kernel::softplus(a.value()), ps);
}

Var exp(Var a) {
    Var ps[] = {a};
    Array v = kernel::exp(a.value());
    ensure_finite(v, "exp");
    return emit(tape_of(a), Tape::Op::kExp, std::move(v), ps);
}

Var log(Var a) {
    Var ps[] = {a};
    Array v = kernel::log(a.value());
    ensure_finite(v, "log");
    return emit(tape_of(a), Tape::Op::kLog, std::move(v), ps);
}

Var sum(Var a) {
    Var ps[] = {a};
    return emit(tape_of(a), Tape::Op::kSum, Array::scalar(kernel::sum(a.value())), ps);
}

Var index(Var a, int i) {
    if (!a.value().is_vector()) throw ShapeError("index: expected vector, got " + a.value().shape_str());
    if (i < 0 || i >= a.rows()) throw DomainError("index: out of range");
    Var ps[] = {a};
    return emit(tape_of(a), Tape::Op::kIndex, Array::scalar(a.value()[i]), ps,
                static_cast<double>(i));
}

Var gaussian_log_density(Var x, Var mean, Var std) {
    const double xv = scalar_of(x, "gaussian_log_density");
    const double mv = scalar_of(mean, "gaussian_log_density");
    const double sv = scalar_of(std, "gaussian_log_density");
    if (!(sv > 0.0)) throw DomainError("gaussian_log_density: std must be positive");
    Var ps[] = {x, mean, std};
    Array v = Array::scalar(kernel::gaussian_log_density_value(xv, mv, sv));
    ensure_finite(v, "gaussian_log_density");
    return emit(tape_of(x), Tape::Op::kGaussLogPdf, std::move(v), ps);
}

Var gaussian_kl(Var mq, Var vq, Var mp, Var vp) {
    const double mqv = scalar_of(mq, "gaussian_kl");
    const double vqv = scalar_of(vq, "gaussian_kl");
    const double mpv = scalar_of(mp, "gaussian_kl");
    const double vpv = scalar_of(vp, "gaussian_kl");
    if (!(vqv > 0.0) || !(vpv > 0.0)) throw DomainError("gaussian_kl: stds must be positive");
    Var ps[] = {mq, vq, mp, vp};
    Array v = Array::scalar(kernel::gaussian_kl_value(mqv, vqv, mpv, vpv));
    ensure_finite(v, "gaussian_kl");
    return emit(tape_of(mq), Tape::Op::kGaussKl, std::move(v), ps);
}

void Tape::backward(Var output) {
    if (output.tape() != this) throw UsageError("backward: output from another tape");
    if (!output.value().is_scalar())
        throw UsageError("backward: output must be scalar, got " + output.value().shape_str());
    if (backward_run_) throw UsageError("backward: already run on this tape; call reset() first");
    backward_run_ = true;

    nodes_[output.index()].adjoint[0] = 1.0;

    for (int32_t i = output.index(); i >= 0; --i) {
        Node& n = nodes_[i];
        if (n.n_parents == 0) continue;
        const Array& d = n.adjoint;
        switch (n.op) {
            case Tape::Op::kMatmul: {
                Node& a = nodes_[n.parents[0]];
                Node& b = nodes_[n.parents[1]];
                add_matmul_nt(a.adjoint, d, b.value);
                add_matmul_tn(b.adjoint, a.value, d);
                break;
            }
            case Tape::Op::kAdd: {
                Array& da = nodes_[n.parents[0]].adjoint;
                Array& db = nodes_[n.parents[1]].adjoint;
                for (int k = 0; k < d.size(); ++k) {
                    da[k] += d[k];
                    db[k] += d[k];
                }
                break;
            }
            case Tape::Op::kMul: {
                Node& a = nodes_[n.parents[0]];
                Node& b = nodes_[n.parents[1]];
                for (int k = 0; k < d.size(); ++k) {
                    a.adjoint[k] += d[k] * b.value[k];
                    b.adjoint[k] += d[k] * a.value[k];
                }
                break;
            }
            case Tape::Op::kNeg: {
                Array& da = nodes_[n.parents[0]].adjoint;
                for (int k = 0; k < d.size(); ++k) da[k] -= d[k];
                break;
            }
            case Tape::Op::kScale: {
                Array& da = nodes_[n.parents[0]].adjoint;
                for (int k = 0; k < d.size(); ++k) da[k] += n.aux * d[k];
                break;
            }
            case Tape::Op::kShift: {
                Array& da = nodes_[n.parents[0]].adjoint;
                for (int k = 0; k < d.size(); ++k) da[k] += d[k];
                break;
            }
            case Tape::Op::kConcat: {
                int at = 0;
                for (int p = 0; p < n.n_parents; ++p) {
                    Array& da = nodes_[n.parents[p]].adjoint;
                    for (int k = 0; k < da.size(); ++k) da[k] += d[at++];
                }
                break;
            }
            case Tape::Op::kTanh: {
                Array& da = nodes_[n.parents[0]].adjoint;
                for (int k = 0; k < d.size(); ++k) da[k] += d[k] * (1.0 - n.value[k] * n.value[k]);
                break;
            }
            case Tape::Op::kSigmoid: {
                Array& da = nodes_[n.parents[0]].adjoint;
                for (int k = 0; k < d.size(); ++k) da[k] += d[k] * n.value[k] * (1.0 - n.value[k]);
                break;
            }
            case Tape::Op::kSoftplus: {
                Node& a = nodes_[n.parents[0]];
                for (int k = 0; k < d.size(); ++k)
                    a.adjoint[k] += d[k] * kernel::sigmoid_scalar(a.value[k]);
                break;
            }
            case Tape::Op::kExp: {
                Array& da = nodes_[n.parents[0]].adjoint;
                for (int k = 0; k < d.size(); ++k) da[k] += d[k] * n.value[k];
                break;
            }
            case Tape::Op::kLog: {
                Node& a = nodes_[n.parents[0]];
                for (int k = 0; k < d.size(); ++k) a.adjoint[k] += d[k] / a.value[k];
                break;
            }
            case Tape::Op::kSum: {
                Array& da = nodes_[n.parents[0]].adjoint;
                for (int k = 0; k < da.size(); ++k) da[k] += d[0];
                break;
            }
            case Tape::Op::kIndex: {
                nodes_[n.parents[0]].adjoint[static_cast<int>(n.aux)] += d[0];
                break;
            }
            case Tape::Op::kGaussLogPdf: {
                const double x = nodes_[n.parents[0]].value[0];
                const double m = nodes_[n.parents[1]].value[0];
                const double s = nodes_[n.parents[2]].value[0];
                const double z = (x - m) / (s * s);
                nodes_[n.parents[0]].adjoint[0] += d[0] * -z;
                nodes_[n.parents[1]].adjoint[0] += d[0] * z;
                nodes_[n.parents[2]].adjoint[0] += d[0] * (-1.0 / s + (x - m) * (x - m) / (s * s * s));
                break;
            }
            case Tape::Op::kGaussKl: {
                const double mq = nodes_[n.parents[0]].value[0];
                const double vq = nodes_[n.parents[1]].value[0];
                const double mp = nodes_[n.parents[2]].value[0];
                const double vp = nodes_[n.parents[3]].value[0];
                const double dm = mq - mp;
                nodes_[n.parents[0]].adjoint[0] += d[0] * dm / (vp * vp);
                nodes_[n.parents[1]].adjoint[0] += d[0] * (-1.0 / vq + vq / (vp * vp));
                nodes_[n.parents[2]].adjoint[0] += d[0] * -dm / (vp * vp);
                nodes_[n.parents[3]].adjoint[0] +=
                    d[0] * (1.0 / vp - (vq * vq + dm * dm) / (vp * vp * vp));
                break;
            }
            case Tape::Op::kLeaf:
                break;
        }
    }
}

void Tape::reset() {
    for (Node& n : nodes_) n.adjoint.fill(0.0);
    backward_run_ = false;
}

}  // namespace volcast
