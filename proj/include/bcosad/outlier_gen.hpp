#pragma once

#include <cstddef>
#include <optional>

#include "bcosad/dataset.hpp"
#include "bcosad/numerics.hpp"
#include "bcosad/rng.hpp"

namespace bcosad {

/// Full-covariance Gaussian fitted to normal training data, in input space.
struct GaussianModel {
    Vec mean;
    Matrix cov;
    Matrix chol;  ///< lower factor of cov + jitter*I
    double jitter = 0.0;

    std::size_t dim() const noexcept { return mean.size(); }
};

/// Sample mean and N-1 covariance; the Cholesky factor is cached using the
/// jitter ladder. Throws ConfigError for fewer than two samples.
GaussianModel fit_gaussian(const DatasetTable& normals);

struct ClampRange {
    double lo = 0.0;
    double hi = 1.0;
};

/// n draws of mean + chol*z, z from rng.normal() in coordinate order.
/// Rows carry split tag Outlier and label 1.
DatasetTable sample_outliers(const GaussianModel& model, std::size_t n, Rng& rng,
                             std::optional<ClampRange> clamp = std::nullopt);

}  // namespace bcosad
