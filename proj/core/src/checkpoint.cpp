#include "volcast/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "volcast/errors.hpp"

namespace volcast {

namespace {

constexpr char kMagic[] = "VOLCAST1";

void write_f64_le(std::ostream& os, double x) {
    uint64_t bits = std::bit_cast<uint64_t>(x);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
    os.write(buf, 8);
}

double read_f64_le(std::istream& is) {
    char buf[8];
    is.read(buf, 8);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i)
        bits |= static_cast<uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    return std::bit_cast<double>(bits);
}

}  // namespace

const Array* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, a] : arrays)
        if (n == name) return &a;
    return nullptr;
}

std::string Checkpoint::meta_or(const std::string& key, const std::string& fallback) const {
    auto it = meta.find(key);
    return it == meta.end() ? fallback : it->second;
}

void save_checkpoint(const std::string& path, const ParamSet& params,
                     const std::map<std::string, std::string>& meta) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("checkpoint: cannot open " + path + " for writing");
    os << kMagic << "\n";
    for (const auto& [k, v] : meta) os << "meta " << k << " " << v << "\n";
    for (const auto& e : params)
        os << "array " << e.name << " " << e.array->rows() << " " << e.array->cols() << "\n";
    os << "data\n";
    for (const auto& e : params)
        for (int i = 0; i < e.array->size(); ++i) write_f64_le(os, (*e.array)[i]);
    if (!os) throw DataError("checkpoint: write failed for " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != kMagic)
        throw DataError("checkpoint: bad magic in " + path);

    Checkpoint ckpt;
    std::vector<std::pair<std::string, std::pair<int, int>>> manifest;
    while (std::getline(is, line)) {
        if (line == "data") break;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "meta") {
            std::string k, v;
            ls >> k;
            std::getline(ls, v);
            if (!v.empty() && v.front() == ' ') v.erase(0, 1);
            ckpt.meta[k] = v;
        } else if (tag == "array") {
            std::string name;
            int rows = 0, cols = 0;
            ls >> name >> rows >> cols;
            if (!ls || rows <= 0 || cols <= 0)
                throw DataError("checkpoint: bad manifest line '" + line + "'");
            manifest.emplace_back(name, std::make_pair(rows, cols));
        } else {
            throw DataError("checkpoint: unexpected header line '" + line + "'");
        }
    }
    for (const auto& [name, shape] : manifest) {
        Array a(shape.first, shape.second);
        for (int i = 0; i < a.size(); ++i) a[i] = read_f64_le(is);
        if (!is) throw DataError("checkpoint: truncated payload in " + path);
        ckpt.arrays.emplace_back(name, std::move(a));
    }
    return ckpt;
}

void restore_params(const Checkpoint& ckpt, const ParamSet& params) {
    for (const auto& e : params) {
        const Array* src = ckpt.find(e.name);
        if (!src) throw DataError("checkpoint: missing array " + e.name);
        if (!src->same_shape(*e.array))
            throw DataError("checkpoint: shape mismatch for " + e.name + ": file " +
                            src->shape_str() + " vs model " + e.array->shape_str());
        *e.array = *src;
    }
}

}  // namespace volcast
