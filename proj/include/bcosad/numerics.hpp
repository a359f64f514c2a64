#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bcosad {

using Vec = std::vector<double>;
using ConstSpan = std::span<const double>;

/// Norms below this are treated as zero by cosine and the B-cos unit.
inline constexpr double kNormFloor = 1e-12;

/// Dense row-major matrix of finite doubles.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Throws DimensionError if data.size() != rows*cols and ConfigError on
    /// non-finite entries.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    /// Builds from a list of equal-length rows.
    static Matrix from_rows(const std::vector<Vec>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    ConstSpan row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    Matrix transposed() const;
    void append_row(ConstSpan values);

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Throws ConfigError naming `what` if any value is NaN or infinite.
void require_finite(ConstSpan values, const char* what);

double dot(ConstSpan a, ConstSpan b);
double norm(ConstSpan a);
double squared_distance(ConstSpan a, ConstSpan b);
double distance(ConstSpan a, ConstSpan b);

/// dot(a,b)/(|a||b|), or exactly 0 when either norm is below kNormFloor.
double cosine(ConstSpan a, ConstSpan b);

Vec matvec(const Matrix& m, ConstSpan v);
/// Row vector times matrix: v^T m.
Vec vecmat(ConstSpan v, const Matrix& m);
Matrix matmul(const Matrix& a, const Matrix& b);

struct CholeskyResult {
    Matrix lower;
    double jitter = 0.0;  ///< diagonal regularization that made the factorization succeed
};

/// Lower-triangular factor of a symmetric positive semi-definite matrix.
///
/// The plain factorization is attempted first. If a pivot is not strictly
/// positive the diagonal is regularized with jitter 1e-8, escalating by x10
/// up to 1e-2. Throws DecompositionError if every rung fails.
CholeskyResult cholesky(const Matrix& cov);

struct PcaResult {
    Matrix components;  ///< k x cols, orthonormal rows
    Matrix projected;   ///< rows x k
    Vec mean;           ///< column means used for centering
};

/// Top-k principal directions by power iteration with deflation
/// (100 iterations or 1e-10 convergence per component).
PcaResult pca_project(const Matrix& data, std::size_t k);

/// Projects rows onto the components of a fitted PCA.
Matrix pca_transform(const PcaResult& pca, const Matrix& data);

}  // namespace bcosad
