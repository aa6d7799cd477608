#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "volcast/adam.hpp"
#include "volcast/dsvm.hpp"
#include "volcast/series.hpp"

namespace volcast::train {

struct TrainConfig {
    int batch_size = 128;
    int epochs = 300;
    AdamConfig adam;
    uint64_t seed = 0;
    int valid_every = 1;     // validation cadence in epochs
    double clip_norm = 0.0;  // 0 disables gradient clipping
    int threads = 1;
    // When nonempty, only parameters whose name starts with one of these
    // prefixes are updated; everything else is frozen.
    std::vector<std::string> trainable_only;
};

struct EpochStats {
    int epoch = 0;  // 1-based; selection may also pick 0 = initialization
    double train_elbo = 0.0;
    double valid_elbo = 0.0;  // NaN on epochs skipped by valid_every
    double seconds = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double init_valid_elbo = 0.0;
    int selected_epoch = 0;  // argmax validation ELBO; 0 means initialization
    bool diverged = false;
    int diverged_epoch = -1;
};

// Minibatch stochastic variational training of (theta, phi): uniformly
// sampled minibatches, one eta sample per sequence, reverse-mode gradients,
// ADAM updates, validation after each epoch. On return theta/phi hold the
// parameters of the best validation epoch. A nonfinite loss aborts the run;
// the best parameters seen so far are kept and the report is flagged.
TrainReport train(dsvm::GenerativeParams& theta, dsvm::InferenceParams& phi,
                  std::span<const data::ReturnSequence> train_set,
                  std::span<const data::ReturnSequence> valid_set, const TrainConfig& config);

// Mean per-sequence ELBO, averaging n_samples single-path estimates per
// sequence. Noise streams derive from (seed, sequence index, sample index),
// so the value is independent of threading.
double evaluate_elbo(const dsvm::GenerativeParams& theta, const dsvm::InferenceParams& phi,
                     std::span<const data::ReturnSequence> sequences, int n_samples,
                     uint64_t seed, int threads = 1);

}  // namespace volcast::train
