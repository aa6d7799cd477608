#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "volcast/array.hpp"

namespace volcast {

class Tape;

// Lightweight handle to a node on a tape.
class Var {
public:
    Var() : tape_(nullptr), index_(-1) {}
    Var(Tape* tape, int32_t index) : tape_(tape), index_(index) {}

    Tape* tape() const { return tape_; }
    int32_t index() const { return index_; }
    bool valid() const { return tape_ != nullptr; }

    const Array& value() const;
    const Array& adjoint() const;
    int rows() const { return value().rows(); }
    int cols() const { return value().cols(); }

private:
    Tape* tape_;
    int32_t index_;
};

// Reverse-mode differentiation tape. Nodes are appended in creation order,
// which is a topological order of the (acyclic) graph; backward() sweeps it
// once in reverse. Single-threaded by contract; run independent tapes in
// parallel instead.
class Tape {
public:
    enum class Op : uint8_t {
        kLeaf,
        kMatmul,
        kAdd,
        kMul,
        kNeg,
        kScale,
        kShift,
        kConcat,
        kTanh,
        kSigmoid,
        kSoftplus,
        kExp,
        kLog,
        kSum,
        kIndex,
        kGaussLogPdf,
        kGaussKl,
    };

    struct Node {
        Array value;
        Array adjoint;
        int32_t parents[4] = {-1, -1, -1, -1};
        double aux = 0.0;
        Op op = Op::kLeaf;
        uint8_t n_parents = 0;
    };

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var leaf(Array value);
    Var constant(double value) { return leaf(Array::scalar(value)); }

    // Propagates d(output)/d(node) into every node's adjoint. `output` must
    // be scalar. Calling backward twice without reset() is an error.
    void backward(Var output);

    // Zeroes all adjoints so backward can run again on the same graph.
    void reset();

    // Capacity hint; avoids node-vector growth in hot loops.
    void reserve(size_t nodes) { nodes_.reserve(nodes); }

    size_t size() const { return nodes_.size(); }
    const Node& node(int32_t i) const { return nodes_[i]; }

private:
    friend class Var;
    friend Var emit(Tape& t, Tape::Op op, Array value, std::span<const Var> parents, double aux);

    std::vector<Node> nodes_;
    bool backward_run_ = false;
};

// Forward ops. Each registers a node with its local gradient rule.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);  // add(a, neg(b)) fused for convenience
Var mul(Var a, Var b);  // elementwise
Var neg(Var a);
Var scale(Var a, double c);
Var shift(Var a, double c);
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
Var tanh(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var exp(Var a);
Var log(Var a);
Var sum(Var a);
Var index(Var a, int i);

// log N(x; mean, std^2) for scalar nodes; std must be positive.
Var gaussian_log_density(Var x, Var mean, Var std);
// KL( N(mq, vq^2) || N(mp, vp^2) ) for scalar nodes; vq, vp positive stds.
Var gaussian_kl(Var mq, Var vq, Var mp, Var vp);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator-(Var a) { return neg(a); }

}  // namespace volcast
