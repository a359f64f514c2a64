#include "bcosad/synthetic.hpp"

#include "bcosad/errors.hpp"
#include "bcosad/rng.hpp"

namespace bcosad {

namespace {

// Orthonormal columns from Gram-Schmidt on a Gaussian matrix.
Matrix random_orthonormal(std::size_t d, Rng& rng) {
    Matrix q(d, d);
    for (std::size_t c = 0; c < d; ++c) {
        Vec v(d);
        for (double& x : v) x = rng.normal();
        for (std::size_t p = 0; p < c; ++p) {
            double proj = 0.0;
            for (std::size_t r = 0; r < d; ++r) proj += v[r] * q(r, p);
            for (std::size_t r = 0; r < d; ++r) v[r] -= proj * q(r, p);
        }
        const double n = norm(v);
        for (std::size_t r = 0; r < d; ++r) q(r, c) = v[r] / n;
    }
    return q;
}

Vec random_direction(std::size_t d, Rng& rng) {
    Vec v(d);
    for (double& x : v) x = rng.normal();
    const double n = norm(v);
    for (double& x : v) x /= n;
    return v;
}

}  // namespace

SyntheticBenchmark make_synthetic_benchmark(const SyntheticConfig& cfg) {
    if (cfg.subspace_dim == 0 || cfg.subspace_dim >= cfg.dim)
        throw ConfigError("synthetic: subspace_dim must be in [1, dim)");
    if (!(cfg.min_scale > 0.0 && cfg.min_scale <= cfg.max_scale)) throw ConfigError("synthetic: bad scale range");
    if (cfg.clusters == 0 || cfg.train_normals < 2) throw ConfigError("synthetic: need clusters and >= 2 normals");

    Rng rng(cfg.seed);
    const std::size_t d = cfg.dim;
    const std::size_t k = cfg.subspace_dim;
    const Matrix basis = random_orthonormal(d, rng);

    // Subspace coordinates of the mixture centre and the cluster centres;
    // the last centre is held out for familiar anomalies.
    Vec centre = random_direction(k, rng);
    for (double& x : centre) x *= cfg.offset;
    std::vector<Vec> centres;
    for (std::size_t c = 0; c <= cfg.clusters; ++c) {
        Vec dir = random_direction(k, rng);
        Vec ctr(k);
        for (std::size_t i = 0; i < k; ++i) ctr[i] = centre[i] + cfg.cluster_radius * dir[i];
        centres.push_back(std::move(ctr));
    }

    auto draw = [&](const Vec& ctr, double novel) {
        const double scale = rng.uniform(cfg.min_scale, cfg.max_scale);
        Vec coords(d, 0.0);
        for (std::size_t i = 0; i < k; ++i) coords[i] = scale * (ctr[i] + cfg.cluster_spread * rng.normal());
        for (std::size_t i = k; i < d; ++i) coords[i] = novel > 0.0 ? novel * rng.normal() : 0.0;
        Vec x(d, 0.0);
        for (std::size_t r = 0; r < d; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < d; ++c) s += basis(r, c) * coords[c];
            x[r] = s + cfg.noise * rng.normal();
        }
        return x;
    };
    auto normal_sample = [&](double novel) { return draw(centres[rng.uniform_index(cfg.clusters)], novel); };

    auto table = [](Split split) {
        DatasetTable t;
        t.labels = std::vector<int>{};
        t.split = split;
        return t;
    };
    auto push = [](DatasetTable& t, const Vec& x, int label) {
        t.samples.append_row(x);
        t.labels->push_back(label);
    };

    SyntheticBenchmark b;
    b.train = table(Split::TrainNormal);
    for (std::size_t i = 0; i < cfg.train_normals; ++i) push(b.train, normal_sample(0.0), 0);

    DatasetTable normals = table(Split::TestNormal);
    DatasetTable familiar = table(Split::TestAnomaly);
    DatasetTable novel = table(Split::TestAnomaly);
    for (std::size_t i = 0; i < cfg.test_normals; ++i) push(normals, normal_sample(0.0), 0);
    for (std::size_t i = 0; i < cfg.test_familiar; ++i) push(familiar, draw(centres.back(), 0.0), 1);
    for (std::size_t i = 0; i < cfg.test_novel; ++i) push(novel, normal_sample(cfg.novel_energy), 1);

    b.test_familiar = concat(normals, familiar);
    b.test_novel = concat(normals, novel);
    b.test_combined = concat(b.test_familiar, novel);
    return b;
}

}  // namespace bcosad
