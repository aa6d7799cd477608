#pragma once

#include <span>
#include <string>
#include <vector>

namespace volcast::data {

enum class ValueKind { kPrice, kReturn };

struct Series {
    std::string id;
    std::vector<std::string> dates;  // ISO-8601, strictly increasing
    std::vector<double> values;
};

struct SeriesTable {
    std::vector<Series> series;
    ValueKind kind = ValueKind::kReturn;
    int dropped_rows = 0;  // rows removed because of missing values

    const Series* find(const std::string& id) const;
};

// Reads a CSV in either wide format (date,<id>,<id>,...) or long format
// (date,id,value). Extra columns in long format are ignored. Prices are
// converted to log returns r_t = log(P_t / P_{t-1}); rows with missing
// values are dropped and counted. Parse failures carry the line number.
SeriesTable ingest(const std::string& path, ValueKind kind);

// Fixed-length extraction window over one series.
struct ReturnSequence {
    std::string series_id;
    int start = 0;                        // index of r_1 in the parent series
    std::vector<std::string> timestamps;  // dates of the T observations
    std::vector<double> values;           // r_1..r_T
};

std::vector<ReturnSequence> window(const Series& s, int T = 10, int stride = 1);

struct SplitRatios {
    double train = 0.6, valid = 0.2, test = 0.2;
};

struct Split {
    std::vector<ReturnSequence> train, valid, test;
};

// Chronological per-series split by sequence start; sizes per series are
// within one of the exact ratios. Sequences must arrive grouped by series in
// chronological order (as produced by window()).
Split split(std::span<const ReturnSequence> sequences, SplitRatios ratios = {});

// Raw-index boundaries (train_end, valid_end) a split at the given ratios
// induces on one series of `n_sequences` windows: sequence k belongs to
// train if k < train_end, valid if k < valid_end, else test.
std::pair<int, int> split_boundaries(int n_sequences, SplitRatios ratios = {});

}  // namespace volcast::data
