#pragma once

#include <cstdint>
#include <string>

namespace volcast::cli {

// Fully resolved run configuration: defaults, then the --config JSON file,
// then command-line flags, strongest last.
struct RunConfig {
    std::string subcommand;
    std::string config_path;
    std::string data;
    std::string checkpoint;
    std::string out;
    std::string model = "dsvm";       // dsvm|garch|gjr|tgarch|egarch
    std::string kind = "return";      // return|price
    std::string span = "test";        // test|all
    std::string point = "sampled";    // sampled|analytic

    uint64_t seed = 0;

    int window = 0;        // 0 = per-model default (dsvm: 10, garch: 1000)
    int train_window = 10; // dataset protocol window T (split boundaries)
    int samples = 1000;    // forecast mixture size S
    int threads = 0;       // 0 = hardware concurrency
    int stride = 1;
    int epochs = 300;
    int batch = 128;
    double lr = 1e-3;
    double clip_norm = 0.0;
    int valid_every = 1;
    bool per_series = false;

    int d_z = 1;
    int d_h = 10;
    int d_a = 10;
    int mlp_hidden = 16;

    // simulate
    int series = 50;
    int length = 1500;
    double mu = -1.0;
    double phi = 0.95;
    double sigma_z = 0.2;
    double rho = -0.4;

    double ratio_train = 0.6;
    double ratio_valid = 0.2;
    double ratio_test = 0.2;

    int dsvm_window() const { return window > 0 ? window : 10; }
    int garch_window() const { return window > 0 ? window : 1000; }
    int resolved_threads() const;
};

// Applies a JSON config file onto cfg. Unknown keys are rejected by name.
void apply_config_file(RunConfig& cfg, const std::string& path);

// Serializes every user-settable field (provenance echo; reloads equal).
std::string config_to_json(const RunConfig& cfg);

}  // namespace volcast::cli
