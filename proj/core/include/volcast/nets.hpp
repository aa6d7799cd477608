#pragma once

#include <string>
#include <vector>

#include "volcast/array.hpp"
#include "volcast/params.hpp"
#include "volcast/rng.hpp"
#include "volcast/tape.hpp"

namespace volcast {

// Floor added to every softplus-activated standard-deviation output so the
// Gaussians downstream never degenerate.
inline constexpr double kStdFloor = 1e-6;

enum class OutputAct { kLinear, kSoftplus };

// Two-hidden-layer perceptron, tanh hidden activations.
struct MlpParams {
    Array w1, b1;  // (hidden x in), (hidden)
    Array w2, b2;  // (hidden x hidden)
    Array w3, b3;  // (out x hidden)
    OutputAct output_act = OutputAct::kLinear;

    int input_size() const { return w1.cols(); }
    int hidden_size() const { return w1.rows(); }
    int output_size() const { return w3.rows(); }

    void collect(ParamSet& set, const std::string& prefix);
};

// Single GRU cell. Gate convention:
//   u = sigmoid(Wu x + Uu h + bu)
//   r = sigmoid(Wr x + Ur h + br)
//   c = tanh(Wc x + Uc (r .* h) + bc)
//   h' = u .* h + (1 - u) .* c
struct GruParams {
    Array wu, uu, bu;
    Array wr, ur, br;
    Array wc, uc, bc;

    int input_size() const { return wu.cols(); }
    int hidden_size() const { return wu.rows(); }

    void collect(ParamSet& set, const std::string& prefix);
};

// Glorot-uniform weights (|w| <= sqrt(6/(fan_in+fan_out))), zero biases.
MlpParams init_mlp(int in, int hidden, int out, OutputAct act, Rng& rng);
GruParams init_gru(int in, int hidden, Rng& rng);

// Plain (gradient-free) forward paths.
Array mlp_forward(const MlpParams& p, const Array& x);
Array gru_step(const GruParams& p, const Array& h_prev, const Array& x);

// Tape-bound parameter handles for the differentiable forward paths.
struct MlpVars {
    Var w1, b1, w2, b2, w3, b3;
    OutputAct output_act;
};
struct GruVars {
    Var wu, uu, bu, wr, ur, br, wc, uc, bc;
};

MlpVars bind(Tape& tape, const MlpParams& p);
GruVars bind(Tape& tape, const GruParams& p);

Var mlp_forward(const MlpVars& p, Var x);
Var gru_step(const GruVars& p, Var h_prev, Var x);

}  // namespace volcast
