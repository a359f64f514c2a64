#include "bcosad/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bcosad/errors.hpp"

namespace bcosad {

namespace {

void require_same_length(ConstSpan a, ConstSpan b, const char* op) {
    if (a.size() != b.size()) {
        throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) +
                             " vs " + std::to_string(b.size()) + ")");
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    require_finite(data_, "Matrix fill");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw DimensionError("Matrix: " + std::to_string(data_.size()) + " elements for " +
                             std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    require_finite(data_, "Matrix");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::from_rows(const std::vector<Vec>& rows) {
    if (rows.empty()) return {};
    const std::size_t cols = rows.front().size();
    std::vector<double> data;
    data.reserve(rows.size() * cols);
    for (const auto& r : rows) {
        if (r.size() != cols) throw DimensionError("Matrix::from_rows: ragged rows");
        data.insert(data.end(), r.begin(), r.end());
    }
    return Matrix(rows.size(), cols, std::move(data));
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

void Matrix::append_row(ConstSpan values) {
    if (rows_ == 0 && cols_ == 0) cols_ = values.size();
    if (values.size() != cols_) throw DimensionError("Matrix::append_row: width mismatch");
    require_finite(values, "Matrix::append_row");
    data_.insert(data_.end(), values.begin(), values.end());
    ++rows_;
}

void require_finite(ConstSpan values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw ConfigError(std::string(what) + ": non-finite value at element " +
                              std::to_string(i));
        }
    }
}

double dot(ConstSpan a, ConstSpan b) {
    require_same_length(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(ConstSpan a) {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
}

double squared_distance(ConstSpan a, ConstSpan b) {
    require_same_length(a, b, "distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double distance(ConstSpan a, ConstSpan b) { return std::sqrt(squared_distance(a, b)); }

double cosine(ConstSpan a, ConstSpan b) {
    require_same_length(a, b, "cosine");
    const double na = norm(a);
    const double nb = norm(b);
    if (na < kNormFloor || nb < kNormFloor) return 0.0;
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

Vec matvec(const Matrix& m, ConstSpan v) {
    if (m.cols() != v.size()) throw DimensionError("matvec: cols != len(v)");
    Vec out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] = dot(m.row(r), v);
    return out;
}

Vec vecmat(ConstSpan v, const Matrix& m) {
    if (m.rows() != v.size()) throw DimensionError("vecmat: rows != len(v)");
    Vec out(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double s = v[r];
        if (s == 0.0) continue;
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) out[c] += s * row[c];
    }
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: a.cols != b.rows");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

namespace {

bool try_cholesky(const Matrix& cov, double jitter, Matrix& lower) {
    const std::size_t n = cov.rows();
    lower = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double pivot = cov(j, j) + jitter;
        for (std::size_t k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
        if (!(pivot > 0.0)) return false;
        const double ljj = std::sqrt(pivot);
        lower(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = cov(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
            lower(i, j) = s / ljj;
        }
    }
    return true;
}

}  // namespace

CholeskyResult cholesky(const Matrix& cov) {
    if (cov.rows() != cov.cols()) throw DimensionError("cholesky: matrix is not square");
    CholeskyResult result;
    if (try_cholesky(cov, 0.0, result.lower)) return result;
    for (double jitter = 1e-8; jitter <= 1e-2 * (1.0 + 1e-9); jitter *= 10.0) {
        if (try_cholesky(cov, jitter, result.lower)) {
            result.jitter = jitter;
            return result;
        }
    }
    throw DecompositionError("cholesky: matrix is not positive semi-definite (jitter up to 1e-2)");
}

namespace {

constexpr int kPowerIterations = 100;
constexpr double kPowerTolerance = 1e-10;

void orthogonalize(Vec& v, const Matrix& basis, std::size_t count) {
    for (std::size_t p = 0; p < count; ++p) {
        const auto b = basis.row(p);
        const double proj = dot(v, b);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
    }
}

bool normalize(Vec& v) {
    const double n = norm(v);
    if (n < kNormFloor) return false;
    for (double& x : v) x /= n;
    return true;
}

// Sign convention: the largest-magnitude coordinate is positive.
void canonical_sign(Vec& v) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    if (v[arg] < 0.0)
        for (double& x : v) x = -x;
}

}  // namespace

PcaResult pca_project(const Matrix& data, std::size_t k) {
    const std::size_t n = data.rows();
    const std::size_t d = data.cols();
    if (k > d) throw DimensionError("pca_project: k exceeds column count");
    if (n < 2) throw ConfigError("pca_project: at least 2 rows required");

    PcaResult out;
    out.mean.assign(d, 0.0);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) out.mean[c] += data(r, c);
    for (double& m : out.mean) m /= static_cast<double>(n);

    Matrix centered(n, d);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) centered(r, c) = data(r, c) - out.mean[c];

    Matrix cov(d, d);
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = centered.row(r);
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) cov(i, j) += row[i] * row[j];
    }
    for (double& v : cov.data()) v /= static_cast<double>(n - 1);

    out.components = Matrix(k, d);
    for (std::size_t p = 0; p < k; ++p) {
        Vec v(d);
        for (std::size_t i = 0; i < d; ++i) v[i] = 1.0 + 0.1 * static_cast<double>(i);
        orthogonalize(v, out.components, p);
        if (!normalize(v)) {
            v.assign(d, 0.0);
            v[p] = 1.0;
            orthogonalize(v, out.components, p);
            normalize(v);
        }
        for (int it = 0; it < kPowerIterations; ++it) {
            Vec next = matvec(cov, v);
            orthogonalize(next, out.components, p);
            if (!normalize(next)) break;  // remaining variance is zero
            double delta = 0.0;
            for (std::size_t i = 0; i < d; ++i) delta = std::max(delta, std::abs(next[i] - v[i]));
            v = std::move(next);
            if (delta < kPowerTolerance) break;
        }
        canonical_sign(v);
        std::copy(v.begin(), v.end(), out.components.row(p).begin());
    }

    out.projected = matmul(centered, out.components.transposed());
    return out;
}

Matrix pca_transform(const PcaResult& pca, const Matrix& data) {
    if (data.cols() != pca.mean.size()) throw DimensionError("pca_transform: column mismatch");
    Matrix centered(data.rows(), data.cols());
    for (std::size_t r = 0; r < data.rows(); ++r)
        for (std::size_t c = 0; c < data.cols(); ++c) centered(r, c) = data(r, c) - pca.mean[c];
    return matmul(centered, pca.components.transposed());
}

}  // namespace bcosad
