#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "run_config.hpp"
#include "volcast/errors.hpp"

namespace {

using volcast::cli::RunConfig;

// Tracks which options the user actually passed, so flags override the
// config file, which overrides defaults.
struct Overrides {
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> entries;

    void apply(RunConfig& cfg) const {
        for (const auto& [opt, fn] : entries)
            if (opt->count() > 0) fn(cfg);
    }
};

void add_common_options(CLI::App* sub, RunConfig& flags, Overrides& ov, bool& seed_given) {
    auto track = [&](CLI::Option* opt, std::function<void(RunConfig&)> fn) {
        ov.entries.emplace_back(opt, std::move(fn));
    };
    track(sub->add_option("--config", flags.config_path, "JSON config file"),
          [&](RunConfig& c) { c.config_path = flags.config_path; });
    track(sub->add_option("--data", flags.data, "input data file or directory"),
          [&](RunConfig& c) { c.data = flags.data; });
    track(sub->add_option("--checkpoint", flags.checkpoint, "model checkpoint path"),
          [&](RunConfig& c) { c.checkpoint = flags.checkpoint; });
    track(sub->add_option("--out", flags.out, "output directory"),
          [&](RunConfig& c) { c.out = flags.out; });
    CLI::Option* seed_opt = sub->add_option("--seed", flags.seed, "rng seed (required)");
    ov.entries.emplace_back(seed_opt, [&](RunConfig& c) { c.seed = flags.seed; });
    sub->callback([&, seed_opt] { seed_given = seed_given || seed_opt->count() > 0; });
    track(sub->add_option("--model", flags.model, "dsvm|garch|gjr|tgarch|egarch"),
          [&](RunConfig& c) { c.model = flags.model; });
    track(sub->add_option("--kind", flags.kind, "input value kind: return|price"),
          [&](RunConfig& c) { c.kind = flags.kind; });
    track(sub->add_option("--window", flags.window, "conditioning/refit window length"),
          [&](RunConfig& c) { c.window = flags.window; });
    track(sub->add_option("--train-window", flags.train_window,
                          "dataset protocol window T for split boundaries"),
          [&](RunConfig& c) { c.train_window = flags.train_window; });
    track(sub->add_option("--samples", flags.samples, "forecast sample count S"),
          [&](RunConfig& c) { c.samples = flags.samples; });
    track(sub->add_option("--threads", flags.threads, "worker threads (0 = cores)"),
          [&](RunConfig& c) { c.threads = flags.threads; });
    track(sub->add_option("--stride", flags.stride, "window stride"),
          [&](RunConfig& c) { c.stride = flags.stride; });
    track(sub->add_option("--epochs", flags.epochs, "training epochs"),
          [&](RunConfig& c) { c.epochs = flags.epochs; });
    track(sub->add_option("--batch", flags.batch, "minibatch size"),
          [&](RunConfig& c) { c.batch = flags.batch; });
    track(sub->add_option("--lr", flags.lr, "ADAM learning rate"),
          [&](RunConfig& c) { c.lr = flags.lr; });
    track(sub->add_option("--clip-norm", flags.clip_norm, "gradient clip norm (0 = off)"),
          [&](RunConfig& c) { c.clip_norm = flags.clip_norm; });
    track(sub->add_option("--valid-every", flags.valid_every, "validation cadence"),
          [&](RunConfig& c) { c.valid_every = flags.valid_every; });
    track(sub->add_flag("--per-series", flags.per_series, "train one model per series"),
          [&](RunConfig& c) { c.per_series = flags.per_series; });
    track(sub->add_option("--span", flags.span, "forecast span: test|all"),
          [&](RunConfig& c) { c.span = flags.span; });
    track(sub->add_option("--point", flags.point, "point forecast: sampled|analytic"),
          [&](RunConfig& c) { c.point = flags.point; });
    track(sub->add_option("--d-z", flags.d_z, "latent dimension"),
          [&](RunConfig& c) { c.d_z = flags.d_z; });
    track(sub->add_option("--d-h", flags.d_h, "volatility GRU hidden size"),
          [&](RunConfig& c) { c.d_h = flags.d_h; });
    track(sub->add_option("--d-a", flags.d_a, "encoder GRU hidden size"),
          [&](RunConfig& c) { c.d_a = flags.d_a; });
    track(sub->add_option("--mlp-hidden", flags.mlp_hidden, "MLP hidden width"),
          [&](RunConfig& c) { c.mlp_hidden = flags.mlp_hidden; });
    track(sub->add_option("--series", flags.series, "simulated series count"),
          [&](RunConfig& c) { c.series = flags.series; });
    track(sub->add_option("--length", flags.length, "simulated series length"),
          [&](RunConfig& c) { c.length = flags.length; });
    track(sub->add_option("--mu", flags.mu, "simulator log-variance level"),
          [&](RunConfig& c) { c.mu = flags.mu; });
    track(sub->add_option("--phi", flags.phi, "simulator persistence"),
          [&](RunConfig& c) { c.phi = flags.phi; });
    track(sub->add_option("--sigma-z", flags.sigma_z, "simulator innovation std"),
          [&](RunConfig& c) { c.sigma_z = flags.sigma_z; });
    track(sub->add_option("--rho", flags.rho, "simulator leverage correlation"),
          [&](RunConfig& c) { c.rho = flags.rho; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"volatility modeling toolkit: deep stochastic volatility model and "
                 "GARCH-family baselines"};
    app.require_subcommand(1);

    RunConfig flags;
    Overrides overrides;
    bool seed_given = false;
    const char* names[] = {"simulate", "train", "forecast", "evaluate", "report"};
    const char* descs[] = {
        "generate a synthetic stochastic-volatility corpus",
        "train the deep stochastic volatility model",
        "rolling one-step-ahead volatility forecasts",
        "per-series NLL table and Friedman rank sum test",
        "volatility time-series CSVs and SVG charts",
    };
    for (int i = 0; i < 5; ++i)
        add_common_options(app.add_subcommand(names[i], descs[i]), flags, overrides,
                           seed_given);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        RunConfig cfg;
        cfg.subcommand = app.get_subcommands().front()->get_name();
        bool seed_in_file = false;
        if (!flags.config_path.empty()) {
            cfg.config_path = flags.config_path;
            RunConfig probe = cfg;
            probe.seed = 0xA5A5A5A5A5A5A5A5ULL;
            volcast::cli::apply_config_file(probe, flags.config_path);
            seed_in_file = probe.seed != 0xA5A5A5A5A5A5A5A5ULL;
            volcast::cli::apply_config_file(cfg, flags.config_path);
        }
        overrides.apply(cfg);
        if (!seed_given && !seed_in_file)
            throw volcast::ConfigError("--seed is required (no wall-clock default)");

        using volcast::cli::cmd_evaluate;
        using volcast::cli::cmd_forecast;
        using volcast::cli::cmd_report;
        using volcast::cli::cmd_simulate;
        using volcast::cli::cmd_train;
        if (cfg.subcommand == "simulate") return cmd_simulate(cfg);
        if (cfg.subcommand == "train") return cmd_train(cfg);
        if (cfg.subcommand == "forecast") return cmd_forecast(cfg);
        if (cfg.subcommand == "evaluate") return cmd_evaluate(cfg);
        if (cfg.subcommand == "report") return cmd_report(cfg);
        throw volcast::ConfigError("unknown subcommand " + cfg.subcommand);
    } catch (const volcast::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const volcast::DivergenceError& e) {
        std::fprintf(stderr, "numerical divergence: %s\n", e.what());
        return 3;
    } catch (const volcast::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
