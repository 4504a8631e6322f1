#include "newsprop/tensor.hpp"

#include <cmath>
#include <cstring>

namespace newsprop {

namespace {

void require_shape(bool ok, const std::string& detail) {
    if (!ok) throw DataError("ShapeMismatch", detail);
}

std::string shape_str(const Tensor2D& t) {
    return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

} // namespace

Tensor2D Tensor2D::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Tensor2D();
    Tensor2D out(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        require_shape(rows[r].size() == out.cols_,
                      "ragged row " + std::to_string(r) + " in from_rows");
        std::copy(rows[r].begin(), rows[r].end(), out.row(r));
    }
    return out;
}

void Tensor2D::fill(double value) {
    std::fill(data_.begin(), data_.end(), value);
}

std::vector<std::vector<double>> Tensor2D::to_rows() const {
    std::vector<std::vector<double>> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        out[r].assign(row(r), row(r) + cols_);
    return out;
}

bool Tensor2D::all_finite() const noexcept {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

void Tensor2D::check_finite(const std::string& what) const {
    if (!all_finite())
        throw NumericError("NonFinite", what + " contains NaN or Inf");
}

bool bits_equal(const Tensor2D& a, const Tensor2D& b) {
    if (!a.same_shape(b)) return false;
    return a.data().empty() ||
           std::memcmp(a.data().data(), b.data().data(),
                       a.data().size() * sizeof(double)) == 0;
}

Tensor2D matmul(const Tensor2D& a, const Tensor2D& b) {
    require_shape(a.cols() == b.rows(),
                  "matmul " + shape_str(a) + " * " + shape_str(b));
    Tensor2D out(a.rows(), b.cols(), 0.0);
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* dst = out.row(i);
        const double* arow = a.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < n; ++j) dst[j] += aik * brow[j];
        }
    }
    return out;
}

Tensor2D matmul_at_b(const Tensor2D& a, const Tensor2D& b) {
    require_shape(a.rows() == b.rows(),
                  "matmul_at_b " + shape_str(a) + "^T * " + shape_str(b));
    Tensor2D out(a.cols(), b.cols(), 0.0);
    const std::size_t n = b.cols();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        const double* brow = b.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            double* dst = out.row(k);
            for (std::size_t j = 0; j < n; ++j) dst[j] += aik * brow[j];
        }
    }
    return out;
}

Tensor2D matmul_a_bt(const Tensor2D& a, const Tensor2D& b) {
    require_shape(a.cols() == b.cols(),
                  "matmul_a_bt " + shape_str(a) + " * " + shape_str(b) + "^T");
    Tensor2D out(a.rows(), b.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
            dst[j] = acc;
        }
    }
    return out;
}

Tensor2D transpose(const Tensor2D& a) {
    Tensor2D out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

void add_inplace(Tensor2D& a, const Tensor2D& b) {
    require_shape(a.same_shape(b), "add " + shape_str(a) + " + " + shape_str(b));
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

void sub_inplace(Tensor2D& a, const Tensor2D& b) {
    require_shape(a.same_shape(b), "sub " + shape_str(a) + " - " + shape_str(b));
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] -= b.data()[i];
}

void scale_inplace(Tensor2D& a, double s) {
    for (double& v : a.data()) v *= s;
}

void hadamard_inplace(Tensor2D& a, const Tensor2D& b) {
    require_shape(a.same_shape(b), "hadamard " + shape_str(a) + " * " + shape_str(b));
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] *= b.data()[i];
}

void axpy(double alpha, const Tensor2D& x, Tensor2D& y) {
    require_shape(x.same_shape(y), "axpy " + shape_str(x) + " -> " + shape_str(y));
    for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] += alpha * x.data()[i];
}

void add_bias_rows(Tensor2D& x, const Tensor2D& bias) {
    require_shape(bias.rows() == 1 && bias.cols() == x.cols(),
                  "bias " + shape_str(bias) + " onto " + shape_str(x));
    const double* b = bias.row(0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double* r = x.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) r[j] += b[j];
    }
}

Tensor2D column_sums(const Tensor2D& x) {
    Tensor2D out(1, x.cols(), 0.0);
    double* dst = out.row(0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* r = x.row(i);
        for (std::size_t j = 0; j < x.cols(); ++j) dst[j] += r[j];
    }
    return out;
}

} // namespace newsprop
