#include "volcast/series.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"

namespace volcast::data {

namespace {

bool parse_value(const std::string& field, double* out) {
    if (field.empty() || field == "NA" || field == "nan" || field == "NaN") return false;
    size_t pos = 0;
    try {
        *out = std::stod(field, &pos);
    } catch (const std::exception&) {
        throw;
    }
    if (pos != field.size()) throw std::invalid_argument("trailing characters");
    return true;
}

void to_log_returns(Series& s) {
    if (s.values.size() < 2)
        throw DataError("ingest: series '" + s.id + "' has fewer than 2 prices");
    std::vector<double> returns(s.values.size() - 1);
    for (size_t i = 1; i < s.values.size(); ++i) {
        if (!(s.values[i] > 0.0) || !(s.values[i - 1] > 0.0))
            throw DataError("ingest: nonpositive price in series '" + s.id + "'");
        returns[i - 1] = std::log(s.values[i] / s.values[i - 1]);
    }
    s.values = std::move(returns);
    s.dates.erase(s.dates.begin());
}

void check_dates(const Series& s) {
    for (size_t i = 1; i < s.dates.size(); ++i)
        if (!(s.dates[i - 1] < s.dates[i]))
            throw DataError("ingest: dates not strictly increasing in series '" + s.id +
                            "' at '" + s.dates[i] + "'");
}

}  // namespace

const Series* SeriesTable::find(const std::string& id) const {
    for (const Series& s : series)
        if (s.id == id) return &s;
    return nullptr;
}

SeriesTable ingest(const std::string& path, ValueKind kind) {
    csv::Table t = csv::read_file(path);
    if (t.header.empty() || t.header[0] != "date")
        throw DataError("ingest: " + path + ": first column must be 'date'");

    SeriesTable out;
    out.kind = ValueKind::kReturn;

    const bool long_format = t.header.size() >= 3 && t.header[1] == "id" &&
                             (t.header[2] == "value" || t.header[2] == "return");
    if (long_format) {
        std::map<std::string, Series> by_id;
        std::vector<std::string> id_order;
        int lineno = 1;
        for (const auto& row : t.rows) {
            ++lineno;
            double v = 0.0;
            bool present;
            try {
                present = parse_value(row[2], &v);
            } catch (const std::exception&) {
                throw DataError("ingest: " + path + ":" + std::to_string(lineno) +
                                ": bad value '" + row[2] + "'");
            }
            if (!present) {
                ++out.dropped_rows;
                continue;
            }
            auto [it, inserted] = by_id.try_emplace(row[1]);
            if (inserted) {
                it->second.id = row[1];
                id_order.push_back(row[1]);
            }
            it->second.dates.push_back(row[0]);
            it->second.values.push_back(v);
        }
        for (const auto& id : id_order) out.series.push_back(std::move(by_id[id]));
    } else {
        const int n_ids = static_cast<int>(t.header.size()) - 1;
        if (n_ids < 1) throw DataError("ingest: " + path + ": no series columns");
        out.series.resize(n_ids);
        for (int c = 0; c < n_ids; ++c) out.series[c].id = t.header[c + 1];
        int lineno = 1;
        for (const auto& row : t.rows) {
            ++lineno;
            std::vector<double> vals(n_ids);
            bool complete = true;
            for (int c = 0; c < n_ids; ++c) {
                try {
                    if (!parse_value(row[c + 1], &vals[c])) complete = false;
                } catch (const std::exception&) {
                    throw DataError("ingest: " + path + ":" + std::to_string(lineno) +
                                    ": bad value '" + row[c + 1] + "'");
                }
            }
            if (!complete) {
                ++out.dropped_rows;
                continue;
            }
            for (int c = 0; c < n_ids; ++c) {
                out.series[c].dates.push_back(row[0]);
                out.series[c].values.push_back(vals[c]);
            }
        }
    }

    for (Series& s : out.series) {
        check_dates(s);
        if (kind == ValueKind::kPrice) to_log_returns(s);
        for (double v : s.values)
            if (!std::isfinite(v))
                throw DataError("ingest: nonfinite value in series '" + s.id + "'");
    }
    return out;
}

std::vector<ReturnSequence> window(const Series& s, int T, int stride) {
    if (T < 1 || stride < 1) throw DomainError("window: T and stride must be >= 1");
    const int n = static_cast<int>(s.values.size());
    if (n < T)
        throw DataError("window: series '" + s.id + "' shorter than window length " +
                        std::to_string(T));
    const int count = (n - T) / stride + 1;
    std::vector<ReturnSequence> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        const int start = k * stride;
        ReturnSequence seq;
        seq.series_id = s.id;
        seq.start = start;
        seq.values.assign(s.values.begin() + start, s.values.begin() + start + T);
        seq.timestamps.assign(s.dates.begin() + start, s.dates.begin() + start + T);
        out.push_back(std::move(seq));
    }
    return out;
}

std::pair<int, int> split_boundaries(int n_sequences, SplitRatios ratios) {
    const double total = ratios.train + ratios.valid + ratios.test;
    if (std::fabs(total - 1.0) > 1e-9) throw DomainError("split: ratios must sum to 1");
    const int train_end = static_cast<int>(std::lround(n_sequences * ratios.train));
    const int valid_end =
        static_cast<int>(std::lround(n_sequences * (ratios.train + ratios.valid)));
    return {train_end, valid_end};
}

Split split(std::span<const ReturnSequence> sequences, SplitRatios ratios) {
    Split out;
    size_t i = 0;
    while (i < sequences.size()) {
        size_t j = i;
        while (j < sequences.size() && sequences[j].series_id == sequences[i].series_id) ++j;
        const int n = static_cast<int>(j - i);
        auto [train_end, valid_end] = split_boundaries(n, ratios);
        if (train_end == 0 || valid_end == train_end || valid_end == n)
            throw DataError("split: series '" + sequences[i].series_id +
                            "' yields an empty partition (" + std::to_string(n) +
                            " sequences)");
        for (int k = 0; k < n; ++k) {
            const ReturnSequence& seq = sequences[i + k];
            if (k < train_end)
                out.train.push_back(seq);
            else if (k < valid_end)
                out.valid.push_back(seq);
            else
                out.test.push_back(seq);
        }
        i = j;
    }
    return out;
}

}  // namespace volcast::data
