#include "volcast/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "volcast/errors.hpp"
#include "volcast/parallel.hpp"

namespace volcast::train {

namespace {

constexpr uint64_t kValidStream = 0x76616C6964ULL;  // independent of epoch streams

std::vector<Array> gather_all_adjoints(const dsvm::GenerativeVars& theta,
                                       const dsvm::InferenceVars& phi) {
    std::vector<Array> grads = dsvm::gather_adjoints(theta);
    std::vector<Array> phi_grads = dsvm::gather_adjoints(phi);
    grads.insert(grads.end(), std::make_move_iterator(phi_grads.begin()),
                 std::make_move_iterator(phi_grads.end()));
    return grads;
}

}  // namespace

double evaluate_elbo(const dsvm::GenerativeParams& theta, const dsvm::InferenceParams& phi,
                     std::span<const data::ReturnSequence> sequences, int n_samples,
                     uint64_t seed, int threads) {
    if (n_samples < 1) throw DomainError("evaluate_elbo: n_samples must be >= 1");
    if (sequences.empty()) throw DomainError("evaluate_elbo: no sequences");
    const int n = static_cast<int>(sequences.size());
    std::vector<double> per_seq(n);
    Rng base(seed);
    parallel_for(n, threads, [&](int i) {
        Rng seq_rng = base.derive(static_cast<uint64_t>(i));
        double acc = 0.0;
        for (int s = 0; s < n_samples; ++s) {
            Rng draw_rng = seq_rng.derive(static_cast<uint64_t>(s));
            std::vector<Array> eta = dsvm::draw_eta(
                static_cast<int>(sequences[i].values.size()), theta.cfg.d_z, draw_rng);
            acc += dsvm::elbo_value(theta, phi, sequences[i].values, eta);
        }
        per_seq[i] = acc / n_samples;
    });
    double total = 0.0;
    for (double v : per_seq) total += v;
    return total / n;
}

TrainReport train(dsvm::GenerativeParams& theta, dsvm::InferenceParams& phi,
                  std::span<const data::ReturnSequence> train_set,
                  std::span<const data::ReturnSequence> valid_set, const TrainConfig& config) {
    if (config.batch_size < 1 || config.epochs < 1)
        throw ConfigError("train: batch_size and epochs must be >= 1");
    if (train_set.empty() || valid_set.empty())
        throw ConfigError("train: train and validation sets must be nonempty");

    ParamSet params;
    theta.collect(params);
    phi.collect(params);
    AdamState adam(params, config.adam);

    const int n_train = static_cast<int>(train_set.size());
    const int batch = config.batch_size;
    const int batches_per_epoch = (n_train + batch - 1) / batch;

    std::vector<bool> trainable(params.size(), true);
    if (!config.trainable_only.empty()) {
        for (size_t i = 0; i < params.size(); ++i) {
            bool keep = false;
            for (const std::string& prefix : config.trainable_only)
                if (params[i].name.rfind(prefix, 0) == 0) keep = true;
            trainable[i] = keep;
        }
    }

    Rng root(config.seed);

    TrainReport report;
    report.init_valid_elbo =
        evaluate_elbo(theta, phi, valid_set, 1, root.derive(kValidStream).seed(), config.threads);
    double best_valid = report.init_valid_elbo;
    std::vector<Array> best_params = params.clone_values();
    report.selected_epoch = 0;

    // Per-sequence gradient and value slots; summed in batch order so the
    // result is independent of the thread count.
    std::vector<std::vector<Array>> seq_grads(batch);
    std::vector<double> seq_elbo(batch);
    std::vector<Array> grad(params.size());
    for (size_t i = 0; i < params.size(); ++i)
        grad[i] = Array(params[i].array->rows(), params[i].array->cols());

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        Rng epoch_rng = root.derive(static_cast<uint64_t>(epoch));
        double epoch_elbo_sum = 0.0;
        int64_t epoch_elbo_count = 0;
        bool diverged = false;

        for (int b = 0; b < batches_per_epoch && !diverged; ++b) {
            Rng batch_rng = epoch_rng.derive(static_cast<uint64_t>(b));
            std::vector<int> indices(batch);
            for (int k = 0; k < batch; ++k) indices[k] = batch_rng.uniform_int(n_train);

            try {
                parallel_for(batch, config.threads, [&](int k) {
                    const data::ReturnSequence& seq = train_set[indices[k]];
                    Rng noise_rng = batch_rng.derive(static_cast<uint64_t>(k));
                    std::vector<Array> eta = dsvm::draw_eta(
                        static_cast<int>(seq.values.size()), theta.cfg.d_z, noise_rng);
                    Tape tape;
                    dsvm::GenerativeVars theta_vars = dsvm::bind(tape, theta);
                    dsvm::InferenceVars phi_vars = dsvm::bind(tape, phi);
                    Var elbo = dsvm::elbo(tape, theta_vars, phi_vars, seq.values, eta);
                    seq_elbo[k] = elbo.value()[0];
                    tape.backward(elbo);
                    seq_grads[k] = gather_all_adjoints(theta_vars, phi_vars);
                });
            } catch (const DivergenceError&) {
                diverged = true;
                report.diverged = true;
                report.diverged_epoch = epoch;
                break;
            }

            // Mean gradient of the negative ELBO.
            for (auto& g : grad) g.fill(0.0);
            for (int k = 0; k < batch; ++k) {
                epoch_elbo_sum += seq_elbo[k];
                ++epoch_elbo_count;
                for (size_t i = 0; i < grad.size(); ++i)
                    for (int e = 0; e < grad[i].size(); ++e)
                        grad[i][e] -= seq_grads[k][i][e];
            }
            const double inv_batch = 1.0 / batch;
            bool grad_finite = true;
            double norm_sq = 0.0;
            for (size_t i = 0; i < grad.size(); ++i) {
                Array& g = grad[i];
                if (!trainable[i]) {
                    g.fill(0.0);
                    continue;
                }
                for (int e = 0; e < g.size(); ++e) {
                    g[e] *= inv_batch;
                    norm_sq += g[e] * g[e];
                    if (!std::isfinite(g[e])) grad_finite = false;
                }
            }
            if (!grad_finite) {
                report.diverged = true;
                report.diverged_epoch = epoch;
                diverged = true;
                break;
            }
            if (config.clip_norm > 0.0) {
                const double norm = std::sqrt(norm_sq);
                if (norm > config.clip_norm) {
                    const double k = config.clip_norm / norm;
                    for (auto& g : grad)
                        for (int e = 0; e < g.size(); ++e) g[e] *= k;
                }
            }
            adam.step(params, grad);
        }

        if (diverged) break;

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_elbo = epoch_elbo_sum / static_cast<double>(epoch_elbo_count);
        stats.valid_elbo = std::numeric_limits<double>::quiet_NaN();
        if (epoch % config.valid_every == 0 || epoch == config.epochs) {
            stats.valid_elbo = evaluate_elbo(theta, phi, valid_set, 1,
                                             root.derive(kValidStream).seed(), config.threads);
            if (stats.valid_elbo > best_valid) {
                best_valid = stats.valid_elbo;
                best_params = params.clone_values();
                report.selected_epoch = epoch;
            }
        }
        stats.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.epochs.push_back(stats);
    }

    params.assign_values(best_params);
    return report;
}

}  // namespace volcast::train
