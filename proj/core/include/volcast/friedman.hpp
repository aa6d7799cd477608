#pragma once

#include <optional>
#include <string>
#include <vector>

namespace volcast::data {

// Rectangular score table: one row per series (block), one column per model
// (treatment). Entries are mean test NLLs; absent entries model
// non-convergence.
struct NllTable {
    std::vector<std::string> series;                       // row labels
    std::vector<std::string> models;                       // column labels
    std::vector<std::vector<std::optional<double>>> rows;  // series x models
};

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int blocks_used = 0;    // rows after dropping incomplete ones
    int blocks_dropped = 0;
};

// Friedman rank sum test across the table's columns. Ties get average
// ranks; rows with any missing entry are dropped (and counted). Requires at
// least 2 models and 2 usable rows.
FriedmanResult friedman_test(const NllTable& table);

}  // namespace volcast::data
