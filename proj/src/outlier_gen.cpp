#include "bcosad/outlier_gen.hpp"

#include <algorithm>

#include "bcosad/errors.hpp"

namespace bcosad {

GaussianModel fit_gaussian(const DatasetTable& normals) {
    const std::size_t n = normals.size();
    const std::size_t d = normals.dim();
    if (n < 2) throw ConfigError("fit_gaussian: at least two samples required");
    if (d < 1) throw ConfigError("fit_gaussian: at least one dimension required");

    GaussianModel m;
    m.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = normals.row(i);
        for (std::size_t c = 0; c < d; ++c) m.mean[c] += r[c];
    }
    for (double& v : m.mean) v /= static_cast<double>(n);

    m.cov = Matrix(d, d);
    Vec centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = normals.row(i);
        for (std::size_t c = 0; c < d; ++c) centered[c] = r[c] - m.mean[c];
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = a; b < d; ++b) m.cov(a, b) += centered[a] * centered[b];
    }
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            m.cov(a, b) /= static_cast<double>(n - 1);
            m.cov(b, a) = m.cov(a, b);
        }
    }

    auto factor = cholesky(m.cov);
    m.chol = std::move(factor.lower);
    m.jitter = factor.jitter;
    return m;
}

DatasetTable sample_outliers(const GaussianModel& model, std::size_t n, Rng& rng,
                             std::optional<ClampRange> clamp) {
    if (n < 1) throw ConfigError("sample_outliers: n must be at least 1");
    if (clamp && !(clamp->lo <= clamp->hi)) throw ConfigError("sample_outliers: empty clamp range");
    const std::size_t d = model.dim();
    std::vector<double> data(n * d);
    Vec z(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : z) v = rng.normal();
        double* row = data.data() + i * d;
        for (std::size_t r = 0; r < d; ++r) {
            double s = model.mean[r];
            for (std::size_t c = 0; c <= r; ++c) s += model.chol(r, c) * z[c];
            row[r] = clamp ? std::clamp(s, clamp->lo, clamp->hi) : s;
        }
    }
    DatasetTable out;
    out.samples = Matrix(n, d, std::move(data));
    out.labels = std::vector<int>(n, 1);
    out.split = Split::Outlier;
    return out;
}

}  // namespace bcosad
