#include "run_config.hpp"

#include <fstream>
#include <thread>

#include <json.hpp>

#include "volcast/errors.hpp"

namespace volcast::cli {

using nlohmann::json;

int RunConfig::resolved_threads() const {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

template <typename T>
void read_key(const json& j, const std::string& key, T& out) {
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config: bad value for key '" + key + "': " + e.what());
    }
}

}  // namespace

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) return;  // defaults apply
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError("config: " + path + " is not valid JSON: " + e.what());
    }
    if (j.is_null()) return;
    if (!j.is_object()) throw ConfigError("config: " + path + " must hold a JSON object");

    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (key == "data") read_key(j, key, cfg.data);
        else if (key == "checkpoint") read_key(j, key, cfg.checkpoint);
        else if (key == "out") read_key(j, key, cfg.out);
        else if (key == "model") read_key(j, key, cfg.model);
        else if (key == "kind") read_key(j, key, cfg.kind);
        else if (key == "span") read_key(j, key, cfg.span);
        else if (key == "point") read_key(j, key, cfg.point);
        else if (key == "seed") read_key(j, key, cfg.seed);
        else if (key == "window") read_key(j, key, cfg.window);
        else if (key == "train_window") read_key(j, key, cfg.train_window);
        else if (key == "samples") read_key(j, key, cfg.samples);
        else if (key == "threads") read_key(j, key, cfg.threads);
        else if (key == "stride") read_key(j, key, cfg.stride);
        else if (key == "epochs") read_key(j, key, cfg.epochs);
        else if (key == "batch") read_key(j, key, cfg.batch);
        else if (key == "lr") read_key(j, key, cfg.lr);
        else if (key == "clip_norm") read_key(j, key, cfg.clip_norm);
        else if (key == "valid_every") read_key(j, key, cfg.valid_every);
        else if (key == "per_series") read_key(j, key, cfg.per_series);
        else if (key == "d_z") read_key(j, key, cfg.d_z);
        else if (key == "d_h") read_key(j, key, cfg.d_h);
        else if (key == "d_a") read_key(j, key, cfg.d_a);
        else if (key == "mlp_hidden") read_key(j, key, cfg.mlp_hidden);
        else if (key == "series") read_key(j, key, cfg.series);
        else if (key == "length") read_key(j, key, cfg.length);
        else if (key == "mu") read_key(j, key, cfg.mu);
        else if (key == "phi") read_key(j, key, cfg.phi);
        else if (key == "sigma_z") read_key(j, key, cfg.sigma_z);
        else if (key == "rho") read_key(j, key, cfg.rho);
        else if (key == "ratio_train") read_key(j, key, cfg.ratio_train);
        else if (key == "ratio_valid") read_key(j, key, cfg.ratio_valid);
        else if (key == "ratio_test") read_key(j, key, cfg.ratio_test);
        else throw ConfigError("config: unknown key '" + key + "'");
    }
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["data"] = cfg.data;
    j["checkpoint"] = cfg.checkpoint;
    j["out"] = cfg.out;
    j["model"] = cfg.model;
    j["kind"] = cfg.kind;
    j["span"] = cfg.span;
    j["point"] = cfg.point;
    j["seed"] = cfg.seed;
    j["window"] = cfg.window;
    j["train_window"] = cfg.train_window;
    j["samples"] = cfg.samples;
    j["threads"] = cfg.threads;
    j["stride"] = cfg.stride;
    j["epochs"] = cfg.epochs;
    j["batch"] = cfg.batch;
    j["lr"] = cfg.lr;
    j["clip_norm"] = cfg.clip_norm;
    j["valid_every"] = cfg.valid_every;
    j["per_series"] = cfg.per_series;
    j["d_z"] = cfg.d_z;
    j["d_h"] = cfg.d_h;
    j["d_a"] = cfg.d_a;
    j["mlp_hidden"] = cfg.mlp_hidden;
    j["series"] = cfg.series;
    j["length"] = cfg.length;
    j["mu"] = cfg.mu;
    j["phi"] = cfg.phi;
    j["sigma_z"] = cfg.sigma_z;
    j["rho"] = cfg.rho;
    j["ratio_train"] = cfg.ratio_train;
    j["ratio_valid"] = cfg.ratio_valid;
    j["ratio_test"] = cfg.ratio_test;
    return j.dump(2) + "\n";
}

}  // namespace volcast::cli
