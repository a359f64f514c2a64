#include <fstream>
#include <map>
#include <sstream>

#include "bcosad/errors.hpp"
#include "bcosad/pipeline.hpp"
#include "bcosad/presets.hpp"
#include "bcosad/synthetic.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace bcosad;
namespace fs = std::filesystem;

namespace {

SyntheticConfig small_bench() {
    SyntheticConfig s;
    s.train_normals = 120;
    s.test_normals = 40;
    s.test_familiar = 20;
    s.test_novel = 20;
    return s;
}

RunConfig small_run(const fs::path& dir) {
    RunConfig rc = synthetic_run_config(5);
    rc.train.epochs = 5;
    const auto b = make_synthetic_benchmark(small_bench());
    save_csv(b.train, (dir / "train.csv").string());
    save_csv(b.test_combined, (dir / "test.csv").string());
    rc.train_path = (dir / "train.csv").string();
    rc.test_path = (dir / "test.csv").string();
    rc.output_dir = (dir / "out").string();
    return rc;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("synthetic benchmark geometry") {
    auto cfg = small_bench();
    cfg.noise = 0.0;
    const auto b = make_synthetic_benchmark(cfg);
    CHECK(b.train.size() == 120);
    CHECK(b.test_combined.size() == 80);
    CHECK(b.test_novel.size() == 60);
    // training normals span exactly subspace_dim directions
    const auto p = pca_project(b.train.samples, cfg.subspace_dim + 1);
    const Matrix proj = pca_transform(p, b.test_novel.samples);
    double train_var = 0.0;
    for (std::size_t r = 0; r < p.projected.rows(); ++r) train_var += p.projected(r, cfg.subspace_dim) * p.projected(r, cfg.subspace_dim);
    CHECK(train_var < 1e-12);
    // novel anomalies carry energy outside that subspace, test normals do not
    double normal_out = 0.0, novel_out = 0.0;
    for (std::size_t r = 0; r < b.test_novel.size(); ++r) {
        Vec centred(b.test_novel.row(r).begin(), b.test_novel.row(r).end());
        for (std::size_t j = 0; j < centred.size(); ++j) centred[j] -= p.mean[j];
        double inside = 0.0;
        for (std::size_t c = 0; c < cfg.subspace_dim; ++c) {
            const double d = dot(centred, p.components.row(c));
            inside += d * d;
        }
        const double outside = dot(centred, centred) - inside;
        ((*b.test_novel.labels)[r] == 1 ? novel_out : normal_out) += outside;
    }
    CHECK(normal_out < 1e-9);
    CHECK(novel_out > 1.0);
    CHECK(make_synthetic_benchmark(cfg).train.samples == b.train.samples);
    auto bad = cfg;
    bad.subspace_dim = cfg.dim;
    CHECK_THROWS_AS(make_synthetic_benchmark(bad), ConfigError);
}

TEST_CASE("file pipeline: artifacts, stage log, determinism") {
    const auto dir = testutil::tmp_dir("pipe");
    auto rc = small_run(dir);
    rc.heatmap_shape = ImageShape{4, 4};
    rc.heatmap_count = 2;
    const auto r1 = run_pipeline(rc);
    const fs::path out(rc.output_dir);
    for (const char* f : {"outliers.csv", "model.bin", "scores.csv", "metrics.txt", "projection.csv", "run.log",
                          "heatmaps/sample_0.pgm", "heatmaps/sample_1.pgm", "heatmaps/sample_1.pgm.txt"})
        CHECK(fs::exists(out / f));

    // stage order is visible in the log
    const std::string log = slurp(out / "run.log");
    std::size_t pos = 0;
    for (const auto& s : pipeline_stages()) {
        const auto at = log.find("stage " + s + "\n", pos);
        CHECK_MESSAGE(at != std::string::npos, s);
        pos = at == std::string::npos ? pos : at;
    }

    // every artifact reloads
    CHECK(load_model((out / "model.bin").string()) == r1.model);
    CHECK(load_csv((out / "outliers.csv").string()).samples == r1.outliers.samples);
    const auto scores = read_scores((out / "scores.csv").string());
    REQUIRE(scores.records.size() == r1.records.size());
    CHECK(scores.records[3].joint == r1.records[3].joint);
    CHECK(*scores.labels == r1.labels);
    CHECK(load_pgm((out / "heatmaps/sample_0.pgm").string()).shape_hint == ImageShape{4, 4});

    // rerun: byte-identical
    std::map<std::string, std::string> first;
    for (const auto& e : fs::recursive_directory_iterator(out))
        if (e.is_regular_file()) first[e.path().string()] = slurp(e.path());
    run_pipeline(rc);
    for (const auto& [p, bytes] : first) CHECK_MESSAGE(slurp(p) == bytes, p);
}

TEST_CASE("w = 0 leaves the FFS columns unchanged") {
    const auto b = make_synthetic_benchmark(small_bench());
    auto rc = synthetic_run_config(3);
    rc.train.epochs = 3;
    const auto base = run_pipeline(rc, b.train, b.test_combined);
    rc.score.joint_weight = 0.0;
    const auto ablated = run_pipeline(rc, b.train, b.test_combined);
    for (std::size_t i = 0; i < base.records.size(); ++i) {
        CHECK(base.records[i].ffs_raw == ablated.records[i].ffs_raw);
        CHECK(base.records[i].ffs_norm == ablated.records[i].ffs_norm);
        CHECK(ablated.records[i].joint == ablated.records[i].ffs_norm);
    }
    CHECK(ablated.metrics.auroc == *ablated.metrics.auroc_ffs);
}

TEST_CASE("failures are tagged with the stage") {
    const auto dir = testutil::tmp_dir("pipe_err");
    auto rc = small_run(dir);
    rc.train_path = (dir / "missing.csv").string();
    try {
        run_pipeline(rc);
        FAIL("expected an error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "load");
        CHECK(std::string(e.what()).rfind("[load]", 0) == 0);
    }

    const auto b = make_synthetic_benchmark(small_bench());
    auto bad = synthetic_run_config(1);
    bad.train.learning_rate = -1.0;
    try {
        run_pipeline(bad, b.train, b.test_combined);
        FAIL("expected an error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "train");
    }
    DatasetTable unlabeled = b.test_combined;
    unlabeled.labels.reset();
    CHECK_THROWS_AS(run_pipeline(synthetic_run_config(1), b.train, unlabeled), StageError);
}

TEST_CASE("scores file with unlabeled rows") {
    const auto dir = testutil::tmp_dir("scores");
    std::vector<ScoreRecord> recs(2);
    recs[0].ffs_raw = 1.25;
    recs[1].joint = -0.5;
    write_scores(recs, std::nullopt, (dir / "s.csv").string());
    const std::string text = slurp(dir / "s.csv");
    CHECK(text == "sample_id,ffs_raw,ens_raw,ffs_norm,ens_norm,joint,label\n0,1.25,0,0,0,0,\n1,0,0,0,0,-0.5,\n");
    const auto back = read_scores((dir / "s.csv").string());
    CHECK_FALSE(back.labels.has_value());
    CHECK(back.records[1].joint == -0.5);
    std::ofstream(dir / "bad.csv") << "nope\n";
    CHECK_THROWS_AS(read_scores((dir / "bad.csv").string()), ParseError);
}

}
