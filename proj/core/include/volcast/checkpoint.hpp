#pragma once

#include <map>
#include <string>
#include <vector>

#include "volcast/array.hpp"
#include "volcast/params.hpp"

namespace volcast {

// Versioned parameter snapshot.
//
// Layout:
//   "VOLCAST1\n"
//   "meta <key> <value>\n"            zero or more
//   "array <name> <rows> <cols>\n"    one per array, manifest order
//   "data\n"
//   raw little-endian f64 payload, arrays back to back in manifest order
struct Checkpoint {
    std::map<std::string, std::string> meta;
    std::vector<std::pair<std::string, Array>> arrays;

    const Array* find(const std::string& name) const;
    std::string meta_or(const std::string& key, const std::string& fallback) const;
};

void save_checkpoint(const std::string& path, const ParamSet& params,
                     const std::map<std::string, std::string>& meta);
Checkpoint load_checkpoint(const std::string& path);

// Copies checkpoint arrays into an existing ParamSet, matching by name and
// shape. Throws DataError on any missing or mismatched entry.
void restore_params(const Checkpoint& ckpt, const ParamSet& params);

}  // namespace volcast
