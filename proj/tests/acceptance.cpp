// One line per acceptance criterion; exit status is nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "bcosad/eval.hpp"
#include "bcosad/pipeline.hpp"
#include "bcosad/presets.hpp"
#include "bcosad/synthetic.hpp"
#include "gradcheck.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace bcosad;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream s;
    s.precision(prec);
    s << std::fixed << v;
    return s.str();
}

std::string sci(double v) {
    std::ostringstream s;
    s.precision(2);
    s << std::scientific << v;
    return s.str();
}

Vec nonzero_input(std::size_t n, Rng& rng) {
    Vec x;
    do x = testutil::random_vec(n, rng);
    while (norm(x) < 1e-6);
    return x;
}

Outcome collapse_faithfulness() {
    Rng rng(101);
    double worst = 0.0;
    for (int t = 0; t < 500; ++t) {
        const auto net = testutil::random_net(rng, 4, 16);
        const Vec x = nonzero_input(net.input_dim(), rng);
        const auto f = forward(net, x);
        for (std::size_t j = 0; j < 2; ++j) {
            const double err = std::abs(dot(collapse(net, f.trace, 0, j), x) - f.logits[j]) /
                               std::max(1.0, std::abs(f.logits[j]));
            worst = std::max(worst, err);
        }
    }
    return {worst <= 1e-9, "500 nets, max scaled error " + sci(worst) + " (limit 1e-9)"};
}

Outcome gradient_correctness() {
    Rng rng(202);
    double worst = 0.0;
    std::size_t checked = 0, skipped = 0;
    // diagnostics for the worst triple, not part of the verdict
    double worst_min_cos = 1.0, worst_fine = 0.0, worst_b = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto net = testutil::random_net(rng, 4, 16);
        const Vec x = nonzero_input(net.input_dim(), rng);
        const int label = static_cast<int>(rng.uniform_index(2));
        const auto g = testutil::check_gradients(net, x, label);
        if (g.max_rel > worst) {
            worst = g.max_rel;
            worst_min_cos = 1.0;
            for (const auto& layer_cos : forward(net, x).trace.cosines)
                for (double c : layer_cos) worst_min_cos = std::min(worst_min_cos, std::abs(c));
            worst_fine = testutil::check_gradients(net, x, label, 1e-6).max_rel;
            worst_b = 3.0;
            for (std::size_t l = 0; l < net.layer_count(); ++l) worst_b = std::min(worst_b, net.layer(l).b_exponent);
        }
        checked += g.checked;
        skipped += g.skipped;
    }
    std::string detail = "100 triples, " + std::to_string(checked) + " coordinates (" + std::to_string(skipped) +
                         " skipped at |cos| < 1e-6), max relative error " + sci(worst) + " (limit 1e-4)";
    if (worst > 1e-4)
        detail += "; worst triple: min |cos| " + sci(worst_min_cos) + ", smallest B " + sci(worst_b) +
                  ", same check at h = 1e-6 gives " + sci(worst_fine);
    return {worst <= 1e-4, detail};
}

Outcome oracle_equivalences() {
    Rng rng(303);
    std::size_t ffs_bad = 0, auroc_bad = 0, thr_bad = 0;
    Matrix rows;
    for (int i = 0; i < 300; ++i) rows.append_row(testutil::random_vec(6, rng));
    // a few duplicates exercise the tie-break
    for (int i = 0; i < 20; ++i) rows.append_row(Vec(rows.row(i).begin(), rows.row(i).end()));
    const MemoryBank bank(rows, 0);
    for (int q = 0; q < 1000; ++q) {
        const Vec x = q % 10 == 0 ? Vec(rows.row(q % 300).begin(), rows.row(q % 300).end()) : testutil::random_vec(6, rng);
        const std::size_t k = 1 + rng.uniform_index(5);
        std::vector<std::pair<double, std::size_t>> all;
        for (std::size_t r = 0; r < rows.rows(); ++r) all.emplace_back(squared_distance(rows.row(r), x), r);
        std::sort(all.begin(), all.end());
        double want = 0.0;
        for (std::size_t i = 0; i < k; ++i) want += std::sqrt(all[i].first);
        ffs_bad += ffs(bank, x, k) == want ? 0 : 1;
    }
    auto random_set = [&](std::size_t n) {
        Vec s(n);
        std::vector<int> l(n);
        const bool coarse = rng.uniform() < 0.5;
        for (std::size_t i = 0; i < n; ++i) {
            l[i] = i < 2 ? static_cast<int>(i) : static_cast<int>(rng.uniform_index(2));
            s[i] = coarse ? static_cast<double>(rng.uniform_index(8)) : rng.normal() + 0.5 * l[i];
        }
        return LabeledScores::make(s, l);
    };
    for (int t = 0; t < 200; ++t) {
        const auto ls = random_set(2 + rng.uniform_index(100));
        auroc_bad += auroc(ls) == testutil::pairwise_auroc(ls) ? 0 : 1;
    }
    for (int t = 0; t < 200; ++t) {
        const auto ls = random_set(2 + rng.uniform_index(199));
        const auto got = oracle_threshold(ls);
        const auto want = testutil::enumerate_thresholds(ls);
        thr_bad += got.balanced_accuracy == want.balanced_accuracy && got.threshold == want.threshold ? 0 : 1;
    }
    return {ffs_bad + auroc_bad + thr_bad == 0,
            "ffs mismatches " + std::to_string(ffs_bad) + "/1000, auroc " + std::to_string(auroc_bad) +
                "/200, oracle_threshold " + std::to_string(thr_bad) + "/200"};
}

Outcome ens_bounds() {
    Rng rng(404);
    std::size_t out_of_range = 0;
    double worst = 0.0;
    for (int t = 0; t < 10000; ++t) {
        const auto net = testutil::random_net(rng, 4, 16);
        // every 50th input is zero, the degenerate case
        const Vec x = t % 50 == 0 ? Vec(net.input_dim(), 0.0) : testutil::random_vec(net.input_dim(), rng);
        const std::size_t node = rng.uniform_index(2);
        const double e = ens(net, x, 0, node);
        if (!(e >= 0.0 && e <= 2.0)) ++out_of_range;
        if (t % 10 == 0 && norm(x) > 0.0) {
            for (double alpha : {0.5, 2.0, 10.0}) {
                Vec ax = x;
                for (double& v : ax) v *= alpha;
                worst = std::max(worst, std::abs(ens(net, ax, 0, node) - e));
            }
        }
    }
    return {out_of_range == 0 && worst <= 1e-9, "10000 pairs, " + std::to_string(out_of_range) +
                                                    " outside [0,2], max |ENS(ax) - ENS(x)| " + sci(worst)};
}

struct BenchRuns {
    SyntheticBenchmark bench;
    RunConfig run;
    PipelineResult combined;
    PipelineResult novel;
};

Outcome k_sweep(const BenchRuns& r) {
    const auto& model = r.combined.model;
    const auto bank = build_memory_bank(model, r.bench.train, default_feature_layer(model));
    double lo = 1.0, hi = 0.0;
    std::string values;
    for (std::size_t k = 1; k <= 5; ++k) {
        ScoreConfig c = r.run.score;
        c.k = k;
        c.normalization = fit_training_normalization(model, bank, r.bench.train, c);
        const auto m = evaluate_records(score_table(model, bank, r.bench.test_combined, c), *r.bench.test_combined.labels);
        lo = std::min(lo, m.auroc);
        hi = std::max(hi, m.auroc);
        values += (k > 1 ? "/" : "") + fmt(100.0 * m.auroc, 1);
    }
    return {hi - lo <= 0.02, "joint AUROC k=1..5: " + values + ", spread " + fmt(100.0 * (hi - lo), 2) + " points (limit 2)"};
}

Outcome novel_benchmark(const BenchRuns& r, double seconds) {
    const auto& m = r.novel.metrics;
    const double gain = m.auroc - *m.auroc_ffs;
    return {gain >= 0.05 && m.fn_reduction > 0.0 && seconds < 300.0,
            "joint " + fmt(m.auroc) + " vs FFS " + fmt(*m.auroc_ffs) + " (+" + fmt(100.0 * gain, 1) +
                " points, need 5), fn_reduction " + fmt(m.fn_reduction, 3) + ", " + fmt(seconds, 1) + " s"};
}

Outcome gaussian_pipeline(const BenchRuns& r) {
    const auto& m = r.combined.metrics;
    return {m.auroc >= 0.9, "combined-set joint AUROC " + fmt(m.auroc) + " (train accuracy " +
                                fmt(r.combined.train_accuracy, 3) + ", need 0.9)"};
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        files[fs::relative(e.path(), dir).string()] = {std::istreambuf_iterator<char>(in), {}};
    }
    return files;
}

Outcome determinism(const BenchRuns& r) {
    const auto dir = testutil::tmp_dir("acceptance_determinism");
    save_csv(r.bench.train, (dir / "train.csv").string());
    save_csv(r.bench.test_combined, (dir / "test.csv").string());
    std::vector<std::map<std::string, std::string>> runs;
    for (const char* name : {"run_a", "run_b"}) {
        RunConfig rc = r.run;
        rc.train_path = (dir / "train.csv").string();
        rc.test_path = (dir / "test.csv").string();
        rc.output_dir = (dir / name).string();
        run_pipeline(rc);
        runs.push_back(snapshot(dir / name));
    }
    std::size_t differing = 0;
    for (const auto& [name, bytes] : runs[0]) {
        const auto it = runs[1].find(name);
        if (it == runs[1].end() || it->second != bytes) ++differing;
    }
    const bool same = differing == 0 && runs[0].size() == runs[1].size() && !runs[0].empty();
    return {same, std::to_string(runs[0].size()) + " files per run, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const std::string& name, const std::function<Outcome()>& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failures;
        std::cout << "criterion " << id << " [" << name << "]: " << (o.pass ? "PASS" : "FAIL") << ": " << o.detail
                  << " (" << fmt(s, 1) << " s)" << std::endl;
        return s;
    };

    report(1, "collapse faithfulness", [] {
        const auto t0 = std::chrono::steady_clock::now();
        auto o = collapse_faithfulness();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s >= 10.0) o = {false, o.detail + ", over the 10 s budget"};
        return o;
    });
    report(2, "gradient correctness", [] {
        const auto t0 = std::chrono::steady_clock::now();
        auto o = gradient_correctness();
        const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (s >= 30.0) o = {false, o.detail + ", over the 30 s budget"};
        return o;
    });
    report(3, "oracle equivalences", oracle_equivalences);
    report(4, "ENS bounds and invariance", ens_bounds);

    BenchRuns runs;
    double novel_seconds = 0.0;
    std::string setup_error;
    try {
        runs.bench = make_synthetic_benchmark(SyntheticConfig{});
        runs.run = synthetic_run_config();
        const auto t0 = std::chrono::steady_clock::now();
        runs.novel = run_pipeline(runs.run, runs.bench.train, runs.bench.test_novel);
        novel_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        runs.combined = run_pipeline(runs.run, runs.bench.train, runs.bench.test_combined);
    } catch (const std::exception& e) {
        setup_error = e.what();
    }
    auto guarded = [&](std::function<Outcome()> fn) {
        return [&, fn] { return setup_error.empty() ? fn() : Outcome{false, "benchmark run failed: " + setup_error}; };
    };
    report(5, "k-sweep sanity", guarded([&] { return k_sweep(runs); }));
    report(6, "novel-feature benchmark", guarded([&] { return novel_benchmark(runs, novel_seconds); }));
    report(7, "Gaussian-outlier pipeline", guarded([&] { return gaussian_pipeline(runs); }));
    report(8, "determinism", guarded([&] { return determinism(runs); }));

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
