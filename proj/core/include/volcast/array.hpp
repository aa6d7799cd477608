#pragma once

#include <cstddef>
#include <cstring>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace volcast {

// Dense 2-D array of doubles, row-major. A vector is shape (n, 1).
// Small arrays (the per-step intermediates of every network here) live in
// an inline buffer; only large blocks (weight matrices) touch the heap.
class Array {
public:
    static constexpr int kInlineCapacity = 16;

    Array() : rows_(0), cols_(0), ptr_(sbo_) {}
    Array(int rows, int cols, double fill = 0.0);

    Array(const Array& o) { copy_from(o); }
    Array(Array&& o) noexcept { move_from(std::move(o)); }
    Array& operator=(const Array& o) {
        if (this != &o) copy_from(o);
        return *this;
    }
    Array& operator=(Array&& o) noexcept {
        if (this != &o) move_from(std::move(o));
        return *this;
    }

    static Array scalar(double v);
    static Array from_vector(std::span<const double> v);
    static Array from_vector(std::initializer_list<double> v);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int size() const { return rows_ * cols_; }
    bool is_scalar() const { return rows_ == 1 && cols_ == 1; }
    bool is_vector() const { return cols_ == 1; }
    bool same_shape(const Array& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    double& operator()(int r, int c) { return ptr_[static_cast<size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return ptr_[static_cast<size_t>(r) * cols_ + c]; }
    double& operator[](int i) { return ptr_[i]; }
    double operator[](int i) const { return ptr_[i]; }

    std::span<double> data() { return {ptr_, static_cast<size_t>(size())}; }
    std::span<const double> data() const { return {ptr_, static_cast<size_t>(size())}; }

    bool all_finite() const;
    void fill(double v);
    std::string shape_str() const;

private:
    void copy_from(const Array& o);
    void move_from(Array&& o) noexcept;

    int rows_ = 0, cols_ = 0;
    double sbo_[kInlineCapacity];
    std::vector<double> spill_;
    double* ptr_ = sbo_;
};

// Elementwise / linear-algebra kernels shared by the tape ops and the plain
// (gradient-free) forward paths, so both produce bit-identical values.
namespace kernel {

Array matmul(const Array& a, const Array& b);
Array add(const Array& a, const Array& b);
Array sub(const Array& a, const Array& b);
Array mul(const Array& a, const Array& b);
Array scale(const Array& a, double c);
Array shift(const Array& a, double c);
Array neg(const Array& a);
Array tanh(const Array& a);
Array sigmoid(const Array& a);
Array softplus(const Array& a);
Array exp(const Array& a);
Array log(const Array& a);
Array concat(std::span<const Array* const> parts);
double sum(const Array& a);

double sigmoid_scalar(double x);
double softplus_scalar(double x);

// log N(x; mean, std^2)
double gaussian_log_density_value(double x, double mean, double std);
// KL( N(mq, vq^2) || N(mp, vp^2) ), vq/vp are standard deviations
double gaussian_kl_value(double mq, double vq, double mp, double vp);

// Throws NonFiniteError naming `op` if any entry of a is NaN/Inf.
void ensure_finite(const Array& a, const char* op);

}  // namespace kernel

}  // namespace volcast
