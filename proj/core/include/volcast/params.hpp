#pragma once

#include <string>
#include <vector>

#include "volcast/array.hpp"

namespace volcast {

// Ordered, named view over the parameter arrays of a model. The order is the
// collect() order of the owning structs and is the contract shared by the
// optimizer state, gradient vectors, tape bindings and checkpoints.
class ParamSet {
public:
    struct Entry {
        std::string name;
        Array* array;
    };

    void add(std::string name, Array* array) { entries_.push_back({std::move(name), array}); }

    size_t size() const { return entries_.size(); }
    const Entry& operator[](size_t i) const { return entries_[i]; }
    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    // Total number of scalar parameters.
    int64_t scalar_count() const {
        int64_t n = 0;
        for (const Entry& e : entries_) n += e.array->size();
        return n;
    }

    std::vector<Array> clone_values() const {
        std::vector<Array> out;
        out.reserve(entries_.size());
        for (const Entry& e : entries_) out.push_back(*e.array);
        return out;
    }

    void assign_values(const std::vector<Array>& values);

private:
    std::vector<Entry> entries_;
};

}  // namespace volcast
