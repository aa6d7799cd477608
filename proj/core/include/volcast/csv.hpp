#pragma once

#include <string>
#include <vector>

namespace volcast::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 if absent
};

// Parses a comma-separated file with a header row. No quoting support; the
// formats this toolkit reads and writes never embed commas. Throws DataError
// with a line number on ragged rows.
Table read_file(const std::string& path);

// Round-trippable float formatting (17 significant digits), used everywhere
// a number is written to an artifact so outputs are byte-stable.
std::string format_double(double x);

void write_file(const std::string& path, const Table& table);

}  // namespace volcast::csv
