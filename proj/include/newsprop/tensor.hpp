#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "newsprop/errors.hpp"

namespace newsprop {

// Dense row-major matrix of doubles. The whole numeric stack runs in 64-bit
// precision so gradient checks and bit-reproducibility hold.
class Tensor2D {
public:
    Tensor2D() = default;

    Tensor2D(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Tensor2D from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool same_shape(const Tensor2D& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    void fill(double value);
    std::vector<std::vector<double>> to_rows() const;

    bool all_finite() const noexcept;
    // Throws NumericError naming `what` if any entry is NaN/Inf.
    void check_finite(const std::string& what) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Bit-level equality (distinguishes -0.0/0.0, treats equal NaNs as equal).
bool bits_equal(const Tensor2D& a, const Tensor2D& b);

// C = A * B
Tensor2D matmul(const Tensor2D& a, const Tensor2D& b);
// C = A^T * B
Tensor2D matmul_at_b(const Tensor2D& a, const Tensor2D& b);
// C = A * B^T
Tensor2D matmul_a_bt(const Tensor2D& a, const Tensor2D& b);

Tensor2D transpose(const Tensor2D& a);

void add_inplace(Tensor2D& a, const Tensor2D& b);
void sub_inplace(Tensor2D& a, const Tensor2D& b);
void scale_inplace(Tensor2D& a, double s);
void hadamard_inplace(Tensor2D& a, const Tensor2D& b);
// y += alpha * x
void axpy(double alpha, const Tensor2D& x, Tensor2D& y);

// Adds a 1 x cols bias to every row.
void add_bias_rows(Tensor2D& x, const Tensor2D& bias);
// 1 x cols tensor of per-column sums.
Tensor2D column_sums(const Tensor2D& x);

} // namespace newsprop
