#include "volcast/array.hpp"

#include <cmath>
#include <string>

#include "volcast/errors.hpp"

namespace volcast {

Array::Array(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw DomainError("Array: negative shape");
    const int n = rows * cols;
    if (n <= kInlineCapacity) {
        ptr_ = sbo_;
    } else {
        spill_.resize(n);
        ptr_ = spill_.data();
    }
    for (int i = 0; i < n; ++i) ptr_[i] = fill;
}

void Array::copy_from(const Array& o) {
    rows_ = o.rows_;
    cols_ = o.cols_;
    const int n = size();
    if (n <= kInlineCapacity) {
        spill_.clear();
        ptr_ = sbo_;
        std::memcpy(sbo_, o.ptr_, sizeof(double) * n);
    } else {
        spill_.assign(o.ptr_, o.ptr_ + n);
        ptr_ = spill_.data();
    }
}

void Array::move_from(Array&& o) noexcept {
    rows_ = o.rows_;
    cols_ = o.cols_;
    const int n = size();
    if (n <= kInlineCapacity) {
        spill_.clear();
        ptr_ = sbo_;
        std::memcpy(sbo_, o.ptr_, sizeof(double) * n);
    } else {
        spill_ = std::move(o.spill_);
        ptr_ = spill_.data();
    }
    o.rows_ = 0;
    o.cols_ = 0;
    o.spill_.clear();
    o.ptr_ = o.sbo_;
}

Array Array::scalar(double v) {
    Array a(1, 1);
    a[0] = v;
    return a;
}

Array Array::from_vector(std::span<const double> v) {
    Array a(static_cast<int>(v.size()), 1);
    for (size_t i = 0; i < v.size(); ++i) a[static_cast<int>(i)] = v[i];
    return a;
}

Array Array::from_vector(std::initializer_list<double> v) {
    return from_vector(std::span<const double>(v.begin(), v.size()));
}

bool Array::all_finite() const {
    for (int i = 0; i < size(); ++i)
        if (!std::isfinite(ptr_[i])) return false;
    return true;
}

void Array::fill(double v) {
    for (int i = 0; i < size(); ++i) ptr_[i] = v;
}

std::string Array::shape_str() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

namespace kernel {

namespace {
Array map(const Array& a, double (*f)(double)) {
    Array out(a.rows(), a.cols());
    for (int i = 0; i < a.size(); ++i) out[i] = f(a[i]);
    return out;
}

void require_same(const Array& a, const Array& b, const char* op) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " +
                         b.shape_str());
}
}  // namespace

Array matmul(const Array& a, const Array& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: inner dimensions differ, " + a.shape_str() + " * " +
                         b.shape_str());
    Array out(a.rows(), b.cols());
    const int k_len = a.cols();
    if (b.cols() == 1) {
        // Matrix-vector product; the dominant case in every network here.
        const double* ap = a.data().data();
        const double* bp = b.data().data();
        double* op = out.data().data();
        for (int i = 0; i < a.rows(); ++i) {
            const double* row = ap + static_cast<size_t>(i) * k_len;
            double s = 0.0;
            for (int k = 0; k < k_len; ++k) s += row[k] * bp[k];
            op[i] = s;
        }
        return out;
    }
    for (int i = 0; i < a.rows(); ++i) {
        for (int k = 0; k < k_len; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

Array add(const Array& a, const Array& b) {
    require_same(a, b, "add");
    Array out(a.rows(), a.cols());
    for (int i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

Array sub(const Array& a, const Array& b) {
    require_same(a, b, "sub");
    Array out(a.rows(), a.cols());
    for (int i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

Array mul(const Array& a, const Array& b) {
    require_same(a, b, "mul");
    Array out(a.rows(), a.cols());
    for (int i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
    return out;
}

Array scale(const Array& a, double c) {
    Array out(a.rows(), a.cols());
    for (int i = 0; i < a.size(); ++i) out[i] = c * a[i];
    return out;
}

Array shift(const Array& a, double c) {
    Array out(a.rows(), a.cols());
    for (int i = 0; i < a.size(); ++i) out[i] = a[i] + c;
    return out;
}

Array neg(const Array& a) {
    return scale(a, -1.0);
}

double sigmoid_scalar(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Overflow-safe softplus: max(x,0) + log1p(exp(-|x|)).
double softplus_scalar(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

Array tanh(const Array& a) {
    return map(a, [](double x) { return std::tanh(x); });
}

Array sigmoid(const Array& a) {
    return map(a, sigmoid_scalar);
}

Array softplus(const Array& a) {
    return map(a, softplus_scalar);
}

Array exp(const Array& a) {
    return map(a, [](double x) { return std::exp(x); });
}

Array log(const Array& a) {
    return map(a, [](double x) { return std::log(x); });
}

Array concat(std::span<const Array* const> parts) {
    int n = 0;
    for (const Array* p : parts) {
        if (!p->is_vector()) throw ShapeError("concat: all inputs must be vectors");
        n += p->rows();
    }
    Array out(n, 1);
    int at = 0;
    for (const Array* p : parts)
        for (int i = 0; i < p->rows(); ++i) out[at++] = (*p)[i];
    return out;
}

double sum(const Array& a) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i];
    return s;
}

double gaussian_log_density_value(double x, double mean, double std) {
    static constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5*log(2*pi)
    const double z = (x - mean) / std;
    return -kHalfLog2Pi - std::log(std) - 0.5 * z * z;
}

double gaussian_kl_value(double mq, double vq, double mp, double vp) {
    const double dm = mq - mp;
    return std::log(vp / vq) + (vq * vq + dm * dm) / (2.0 * vp * vp) - 0.5;
}

void ensure_finite(const Array& a, const char* op) {
    if (!a.all_finite())
        throw NonFiniteError(std::string(op) + ": nonfinite result " + a.shape_str());
}

}  // namespace kernel

}  // namespace volcast
