#include "commands.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "volcast/checkpoint.hpp"
#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/forecast.hpp"
#include "volcast/friedman.hpp"
#include "volcast/garch.hpp"
#include "volcast/series.hpp"
#include "volcast/sv_sim.hpp"
#include "volcast/svg.hpp"
#include "volcast/train.hpp"

namespace volcast::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open input " + path);
    uint64_t h = 1469598103934665603ULL;
    char buf[65536];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        const std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ULL;
        }
        if (!is) break;
    }
    return h;
}

void prepare_out_dir(const RunConfig& cfg) {
    if (cfg.out.empty()) throw ConfigError("--out directory is required");
    fs::create_directories(cfg.out);
}

// Config echo plus input digests; enough to reproduce the run bit-for-bit.
void write_manifest(const RunConfig& cfg, const std::vector<std::string>& inputs) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["subcommand"] = cfg.subcommand;
    j["seed"] = cfg.seed;
    j["config"] = nlohmann::json::parse(config_to_json(cfg));
    nlohmann::json digests = nlohmann::json::object();
    for (const std::string& path : inputs) {
        char hex[32];
        std::snprintf(hex, sizeof(hex), "fnv1a64:%016" PRIx64, fnv1a64_file(path));
        digests[path] = hex;
    }
    j["inputs"] = digests;
    std::ofstream os(fs::path(cfg.out) / "manifest.json");
    os << j.dump(2) << "\n";
    std::ofstream cfg_os(fs::path(cfg.out) / "config.json");
    cfg_os << config_to_json(cfg);
}

// Proleptic Gregorian day arithmetic for the synthetic corpus dates.
std::string date_from_day_index(int64_t days_since_epoch) {
    int64_t z = days_since_epoch + 719468;
    const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const uint64_t doe = static_cast<uint64_t>(z - era * 146097);
    const uint64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int64_t y = static_cast<int64_t>(yoe) + era * 400;
    const uint64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const uint64_t mp = (5 * doy + 2) / 153;
    const uint64_t d = doy - (153 * mp + 2) / 5 + 1;
    const uint64_t m = mp < 10 ? mp + 3 : mp - 9;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(y + (m <= 2)),
                  static_cast<unsigned>(m), static_cast<unsigned>(d));
    return buf;
}

constexpr int64_t kCorpusEpochDay = 10959;  // 2000-01-03

dsvm::ModelConfig model_config(const RunConfig& cfg) {
    dsvm::ModelConfig mc;
    mc.d_z = cfg.d_z;
    mc.d_h = cfg.d_h;
    mc.d_a = cfg.d_a;
    mc.mlp_hidden = cfg.mlp_hidden;
    return mc;
}

data::SplitRatios ratios_of(const RunConfig& cfg) {
    return {cfg.ratio_train, cfg.ratio_valid, cfg.ratio_test};
}

struct DsvmModel {
    dsvm::GenerativeParams theta;
    dsvm::InferenceParams phi;
};

DsvmModel init_model(const dsvm::ModelConfig& mc, uint64_t seed) {
    Rng rng(Rng(seed).derive(0x696E6974ULL).seed());
    DsvmModel m;
    m.theta = dsvm::init_generative(mc, rng);
    m.phi = dsvm::init_inference(mc, rng);
    return m;
}

std::map<std::string, std::string> checkpoint_meta(const dsvm::ModelConfig& mc,
                                                   const train::TrainReport& report) {
    return {
        {"d_z", std::to_string(mc.d_z)},
        {"d_h", std::to_string(mc.d_h)},
        {"d_a", std::to_string(mc.d_a)},
        {"mlp_hidden", std::to_string(mc.mlp_hidden)},
        {"selected_epoch", std::to_string(report.selected_epoch)},
    };
}

DsvmModel load_model(const std::string& path) {
    Checkpoint ckpt = load_checkpoint(path);
    dsvm::ModelConfig mc;
    mc.d_z = std::stoi(ckpt.meta_or("d_z", "1"));
    mc.d_h = std::stoi(ckpt.meta_or("d_h", "10"));
    mc.d_a = std::stoi(ckpt.meta_or("d_a", "10"));
    mc.mlp_hidden = std::stoi(ckpt.meta_or("mlp_hidden", "16"));
    DsvmModel m = init_model(mc, 0);
    ParamSet set;
    m.theta.collect(set);
    m.phi.collect(set);
    restore_params(ckpt, set);
    return m;
}

void write_train_report_csv(const std::string& path, const train::TrainReport& report) {
    csv::Table t;
    t.header = {"epoch", "train_elbo", "valid_elbo"};
    for (const auto& e : report.epochs) {
        t.rows.push_back({std::to_string(e.epoch), csv::format_double(e.train_elbo),
                          std::isnan(e.valid_elbo) ? "" : csv::format_double(e.valid_elbo)});
    }
    csv::write_file(path, t);
}

void write_train_summary(const std::string& path, const std::string& label,
                         const train::TrainReport& report) {
    std::ofstream os(path, std::ios::app);
    os << "model " << label << "\n";
    os << "epochs_run " << report.epochs.size() << "\n";
    os << "init_valid_elbo " << csv::format_double(report.init_valid_elbo) << "\n";
    double best = report.init_valid_elbo;
    for (const auto& e : report.epochs)
        if (!std::isnan(e.valid_elbo)) best = std::max(best, e.valid_elbo);
    os << "best_valid_elbo " << csv::format_double(best) << "\n";
    os << "selected_epoch " << report.selected_epoch << "\n";
    os << "diverged " << (report.diverged ? "yes" : "no") << "\n\n";
}

// First forecast target index for the chronological test span: the windows
// are split 6:2:2 by start, and the test targets are the observations the
// test windows predict.
int first_test_target(int series_len, const RunConfig& cfg) {
    // The span boundary follows the dataset windowing protocol; a garch
    // refit window must not move the target set, or models would be scored
    // on different observations.
    const int T = cfg.model == "dsvm" ? cfg.dsvm_window() : cfg.train_window;
    const int n_seq = series_len - T + 1;
    if (n_seq < 3) throw DataError("series too short to split");
    auto [train_end, valid_end] = data::split_boundaries(n_seq, ratios_of(cfg));
    (void)train_end;
    return valid_end + T;
}

struct ForecastRow {
    std::string series, timestamp;
    double realized, pred_vol, pred_nll;
    bool flagged;
    std::string model;
};

void write_forecast_csv(const std::string& path, const std::vector<ForecastRow>& rows) {
    csv::Table t;
    t.header = {"series", "timestamp", "realized_return", "pred_vol", "pred_nll",
                "model_tag", "flagged"};
    for (const auto& r : rows)
        t.rows.push_back({r.series, r.timestamp, csv::format_double(r.realized),
                          csv::format_double(r.pred_vol), csv::format_double(r.pred_nll),
                          r.model, r.flagged ? "1" : "0"});
    csv::write_file(path, t);
}

std::vector<std::string> gather_forecast_files(const std::string& data) {
    std::vector<std::string> files;
    if (fs::is_directory(data)) {
        for (const auto& entry : fs::directory_iterator(data)) {
            const std::string name = entry.path().filename().string();
            if (name.rfind("forecast_", 0) == 0 && entry.path().extension() == ".csv")
                files.push_back(entry.path().string());
        }
        std::sort(files.begin(), files.end());
    } else {
        std::string rest = data;
        while (!rest.empty()) {
            const size_t comma = rest.find(',');
            files.push_back(rest.substr(0, comma));
            if (comma == std::string::npos) break;
            rest.erase(0, comma + 1);
        }
    }
    if (files.empty()) throw DataError("no forecast CSV files found under " + data);
    return files;
}

std::vector<ForecastRow> read_forecast_files(const std::vector<std::string>& files) {
    std::vector<ForecastRow> rows;
    for (const std::string& path : files) {
        csv::Table t = csv::read_file(path);
        const int c_series = t.column("series");
        const int c_ts = t.column("timestamp");
        const int c_r = t.column("realized_return");
        const int c_vol = t.column("pred_vol");
        const int c_nll = t.column("pred_nll");
        const int c_model = t.column("model_tag");
        const int c_flag = t.column("flagged");
        if (c_series < 0 || c_ts < 0 || c_r < 0 || c_vol < 0 || c_nll < 0 || c_model < 0)
            throw DataError(path + ": not a forecast CSV");
        for (const auto& row : t.rows) {
            ForecastRow fr;
            fr.series = row[c_series];
            fr.timestamp = row[c_ts];
            fr.realized = std::stod(row[c_r]);
            fr.pred_vol = std::stod(row[c_vol]);
            fr.pred_nll = std::stod(row[c_nll]);
            fr.model = row[c_model];
            fr.flagged = c_flag >= 0 && row[c_flag] == "1";
            rows.push_back(std::move(fr));
        }
    }
    return rows;
}

}  // namespace

int cmd_simulate(const RunConfig& cfg) {
    prepare_out_dir(cfg);
    data::SvSimParams params;
    params.mu = cfg.mu;
    params.ar_phi = cfg.phi;
    params.sigma_z = cfg.sigma_z;
    params.rho = cfg.rho;

    Rng root(cfg.seed);
    csv::Table t;
    t.header = {"date", "id", "value", "sigma"};
    for (int s = 0; s < cfg.series; ++s) {
        Rng rng = root.derive(static_cast<uint64_t>(s));
        data::SvPath path = data::simulate_sv(params, cfg.length, rng);
        char id[16];
        std::snprintf(id, sizeof(id), "s%03d", s);
        for (int i = 0; i < cfg.length; ++i)
            t.rows.push_back({date_from_day_index(kCorpusEpochDay + i), id,
                              csv::format_double(path.returns[i]),
                              csv::format_double(path.sigma[i])});
    }
    csv::write_file((fs::path(cfg.out) / "corpus.csv").string(), t);
    write_manifest(cfg, {});
    return 0;
}

int cmd_train(const RunConfig& cfg) {
    prepare_out_dir(cfg);
    if (cfg.data.empty()) throw ConfigError("train: --data is required");
    const data::ValueKind kind =
        cfg.kind == "price" ? data::ValueKind::kPrice : data::ValueKind::kReturn;
    data::SeriesTable table = data::ingest(cfg.data, kind);
    if (table.dropped_rows > 0)
        std::fprintf(stderr, "ingest: dropped %d rows with missing values\n",
                     table.dropped_rows);

    const dsvm::ModelConfig mc = model_config(cfg);
    train::TrainConfig tc;
    tc.batch_size = cfg.batch;
    tc.epochs = cfg.epochs;
    tc.adam.lr = cfg.lr;
    tc.seed = cfg.seed;
    tc.valid_every = cfg.valid_every;
    tc.clip_norm = cfg.clip_norm;
    tc.threads = cfg.resolved_threads();

    const std::string summary_path = (fs::path(cfg.out) / "train_summary.txt").string();
    std::ofstream(summary_path).close();  // truncate

    bool any_diverged = false;
    if (cfg.per_series) {
        fs::create_directories(fs::path(cfg.out) / "checkpoints");
        for (const data::Series& s : table.series) {
            auto seqs = data::window(s, cfg.dsvm_window(), cfg.stride);
            data::Split split = data::split(seqs, ratios_of(cfg));
            DsvmModel m = init_model(mc, cfg.seed);
            train::TrainReport report =
                train::train(m.theta, m.phi, split.train, split.valid, tc);
            any_diverged = any_diverged || report.diverged;
            ParamSet set;
            m.theta.collect(set);
            m.phi.collect(set);
            save_checkpoint(
                (fs::path(cfg.out) / "checkpoints" / (s.id + ".bin")).string(), set,
                checkpoint_meta(mc, report));
            write_train_report_csv(
                (fs::path(cfg.out) / ("train_report_" + s.id + ".csv")).string(), report);
            write_train_summary(summary_path, s.id, report);
            double total_seconds = 0.0;
            for (const auto& e : report.epochs) total_seconds += e.seconds;
            std::fprintf(stderr, "train[%s]: %zu epochs in %.1fs\n", s.id.c_str(),
                         report.epochs.size(), total_seconds);
        }
    } else {
        // One model trained jointly over every series.
        std::vector<data::ReturnSequence> all;
        for (const data::Series& s : table.series) {
            auto seqs = data::window(s, cfg.dsvm_window(), cfg.stride);
            all.insert(all.end(), std::make_move_iterator(seqs.begin()),
                       std::make_move_iterator(seqs.end()));
        }
        data::Split split = data::split(all, ratios_of(cfg));
        DsvmModel m = init_model(mc, cfg.seed);
        train::TrainReport report = train::train(m.theta, m.phi, split.train, split.valid, tc);
        any_diverged = report.diverged;
        ParamSet set;
        m.theta.collect(set);
        m.phi.collect(set);
        save_checkpoint((fs::path(cfg.out) / "checkpoint.bin").string(), set,
                        checkpoint_meta(mc, report));
        write_train_report_csv((fs::path(cfg.out) / "train_report.csv").string(), report);
        write_train_summary(summary_path, "joint", report);
        double total_seconds = 0.0;
        for (const auto& e : report.epochs) total_seconds += e.seconds;
        std::fprintf(stderr, "train: %zu epochs in %.1fs, selected epoch %d\n",
                     report.epochs.size(), total_seconds, report.selected_epoch);
    }

    write_manifest(cfg, {cfg.data});
    if (any_diverged) {
        std::fprintf(stderr, "train: aborted on nonfinite loss; kept best checkpoint\n");
        return 3;
    }
    return 0;
}

int cmd_forecast(const RunConfig& cfg) {
    prepare_out_dir(cfg);
    if (cfg.data.empty()) throw ConfigError("forecast: --data is required");
    const data::ValueKind kind =
        cfg.kind == "price" ? data::ValueKind::kPrice : data::ValueKind::kReturn;
    data::SeriesTable table = data::ingest(cfg.data, kind);
    const int threads = cfg.resolved_threads();

    // --model accepts a comma-separated list (e.g. "dsvm,garch,egarch");
    // one forecast CSV per model, all scored on the same targets.
    std::vector<std::string> models;
    {
        std::string rest = cfg.model;
        while (!rest.empty()) {
            const size_t comma = rest.find(',');
            models.push_back(rest.substr(0, comma));
            if (comma == std::string::npos) break;
            rest.erase(0, comma + 1);
        }
    }
    if (models.empty()) throw ConfigError("forecast: --model is required");

    std::vector<std::string> inputs = {cfg.data};
    for (const std::string& model : models) {
        const bool is_dsvm = model == "dsvm";
        if (!is_dsvm) (void)garch::variant_from_name(model);  // validate early
        RunConfig model_cfg = cfg;
        model_cfg.model = model;
        std::vector<ForecastRow> rows;

        for (const data::Series& s : table.series) {
            const int n = static_cast<int>(s.values.size());
            int first_target;
            if (cfg.span == "test") {
                first_target = first_test_target(n, model_cfg);
            } else if (cfg.span == "all") {
                first_target = is_dsvm ? cfg.dsvm_window() : cfg.garch_window();
            } else {
                throw ConfigError("forecast: --span must be 'test' or 'all'");
            }

            std::vector<forecast::ForecastRecord> records;
            if (is_dsvm) {
                std::string ckpt_path = cfg.checkpoint;
                if (ckpt_path.empty()) throw ConfigError("forecast: --checkpoint is required");
                if (fs::is_directory(ckpt_path))
                    ckpt_path = (fs::path(ckpt_path) / (s.id + ".bin")).string();
                DsvmModel m = load_model(ckpt_path);
                const auto method = cfg.point == "analytic"
                                        ? forecast::PointMethod::kAnalytic
                                        : forecast::PointMethod::kSampled;
                records = forecast::rolling_forecast(
                    m.theta, m.phi, s.values, s.dates, cfg.dsvm_window(), cfg.samples,
                    Rng(cfg.seed).derive(std::hash<std::string>{}(s.id)).seed(), method,
                    first_target, threads);
            } else {
                garch::Spec spec{garch::variant_from_name(model), 1, 1};
                const int window = cfg.garch_window();
                if (first_target < window)
                    throw DataError("forecast: series '" + s.id +
                                    "' has insufficient history before the test span for a " +
                                    std::to_string(window) +
                                    "-observation rolling window");
                records = garch::rolling_eval(
                    spec, s.values, s.dates, window,
                    Rng(cfg.seed).derive(std::hash<std::string>{}(s.id)).seed(), threads,
                    first_target);
            }
            for (const auto& rec : records)
                rows.push_back({s.id, rec.timestamp, rec.realized, rec.pred_vol,
                                rec.pred_nll, rec.flagged, model});
        }
        write_forecast_csv((fs::path(cfg.out) / ("forecast_" + model + ".csv")).string(),
                           rows);
    }
    if (!cfg.checkpoint.empty() && !fs::is_directory(cfg.checkpoint))
        inputs.push_back(cfg.checkpoint);
    write_manifest(cfg, inputs);
    return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
    prepare_out_dir(cfg);
    if (cfg.data.empty()) throw ConfigError("evaluate: --data is required");
    const std::vector<std::string> files = gather_forecast_files(cfg.data);
    const std::vector<ForecastRow> rows = read_forecast_files(files);

    struct Cell {
        double sum = 0.0;
        int count = 0;
        int flagged = 0;
    };
    std::set<std::string> series_set, model_set;
    std::map<std::pair<std::string, std::string>, Cell> cells;
    for (const auto& r : rows) {
        series_set.insert(r.series);
        model_set.insert(r.model);
        Cell& c = cells[{r.series, r.model}];
        c.sum += r.pred_nll;
        ++c.count;
        if (r.flagged) ++c.flagged;
    }

    data::NllTable table;
    table.series.assign(series_set.begin(), series_set.end());
    table.models.assign(model_set.begin(), model_set.end());
    csv::Table out;
    out.header = {"series"};
    for (const auto& m : table.models) out.header.push_back(m);
    for (const auto& s : table.series) {
        std::vector<std::optional<double>> row;
        std::vector<std::string> csv_row = {s};
        for (const auto& m : table.models) {
            auto it = cells.find({s, m});
            // A cell is NA when the model has no records for the series or
            // every refit failed to converge.
            if (it == cells.end() || it->second.flagged == it->second.count) {
                row.emplace_back(std::nullopt);
                csv_row.push_back("NA");
            } else {
                row.emplace_back(it->second.sum / it->second.count);
                csv_row.push_back(csv::format_double(*row.back()));
            }
        }
        table.rows.push_back(std::move(row));
        out.rows.push_back(std::move(csv_row));
    }
    csv::write_file((fs::path(cfg.out) / "nll_table.csv").string(), out);

    csv::Table fr;
    fr.header = {"statistic", "p_value", "blocks_used", "blocks_dropped"};
    if (table.models.size() >= 2 && table.series.size() >= 2) {
        data::FriedmanResult result = data::friedman_test(table);
        fr.rows.push_back({csv::format_double(result.statistic),
                           csv::format_double(result.p_value),
                           std::to_string(result.blocks_used),
                           std::to_string(result.blocks_dropped)});
    } else {
        std::fprintf(stderr, "evaluate: need >= 2 models and >= 2 series for the "
                             "Friedman test; writing the NLL table only\n");
    }
    csv::write_file((fs::path(cfg.out) / "friedman.csv").string(), fr);

    write_manifest(cfg, files);
    return 0;
}

int cmd_report(const RunConfig& cfg) {
    prepare_out_dir(cfg);
    if (cfg.data.empty()) throw ConfigError("report: --data is required");
    const std::vector<std::string> files = gather_forecast_files(cfg.data);
    const std::vector<ForecastRow> rows = read_forecast_files(files);

    std::set<std::string> series_set, model_set;
    for (const auto& r : rows) {
        series_set.insert(r.series);
        model_set.insert(r.model);
    }
    const std::vector<std::string> palette = {"#d62728", "#1f77b4", "#2ca02c",
                                              "#9467bd", "#ff7f0e", "#8c564b"};

    for (const std::string& sid : series_set) {
        // Realized |returns| on the timestamp grid of the first model seen.
        std::string grid_model;
        std::vector<std::string> timestamps;
        std::vector<double> abs_returns;
        std::map<std::string, std::map<std::string, double>> vol_by_model;
        for (const auto& r : rows) {
            if (r.series != sid) continue;
            if (grid_model.empty()) grid_model = r.model;
            if (r.model == grid_model) {
                timestamps.push_back(r.timestamp);
                abs_returns.push_back(std::fabs(r.realized));
            }
            vol_by_model[r.model][r.timestamp] = r.pred_vol;
        }

        csv::Table t;
        t.header = {"timestamp", "abs_return"};
        for (const auto& m : model_set) t.header.push_back(m + "_pred_vol");
        std::vector<svg::LineSeries> lines;
        lines.push_back({"abs_return", "#bbbbbb", abs_returns});
        size_t color = 0;
        for (const auto& m : model_set) {
            svg::LineSeries line;
            line.label = m;
            line.color = palette[color++ % palette.size()];
            for (const auto& ts : timestamps) {
                auto it = vol_by_model[m].find(ts);
                line.y.push_back(it == vol_by_model[m].end()
                                     ? std::numeric_limits<double>::quiet_NaN()
                                     : it->second);
            }
            lines.push_back(std::move(line));
        }
        for (size_t i = 0; i < timestamps.size(); ++i) {
            std::vector<std::string> row = {timestamps[i], csv::format_double(abs_returns[i])};
            for (auto it = model_set.begin(); it != model_set.end(); ++it) {
                const double v = lines[1 + std::distance(model_set.begin(), it)].y[i];
                row.push_back(std::isnan(v) ? "" : csv::format_double(v));
            }
            t.rows.push_back(std::move(row));
        }
        csv::write_file((fs::path(cfg.out) / ("report_" + sid + ".csv")).string(), t);
        svg::write_file((fs::path(cfg.out) / ("vol_" + sid + ".svg")).string(),
                        svg::line_chart("predicted volatility vs |returns|: " + sid, lines));
    }
    write_manifest(cfg, files);
    return 0;
}

}  // namespace volcast::cli
