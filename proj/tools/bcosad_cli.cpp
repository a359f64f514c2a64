// bcosad command-line front end. Every option can also be given in an INI
// file passed with --config; keys go in a section named after the subcommand.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bcosad/bcos_network.hpp"
#include "bcosad/dataset.hpp"
#include "bcosad/errors.hpp"
#include "bcosad/eval.hpp"
#include "bcosad/outlier_gen.hpp"
#include "bcosad/pipeline.hpp"
#include "bcosad/scoring.hpp"
#include "bcosad/synthetic.hpp"

namespace fs = std::filesystem;
using namespace bcosad;

namespace {

ImageShape parse_shape(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw ConfigError("shape must look like HxW, got '" + text + "'");
    try {
        std::size_t used = 0;
        const auto h = std::stoul(text.substr(0, x), &used);
        if (used != x) throw ConfigError("bad height in '" + text + "'");
        const auto w = std::stoul(text.substr(x + 1), &used);
        if (used != text.size() - x - 1) throw ConfigError("bad width in '" + text + "'");
        if (h == 0 || w == 0) throw ConfigError("shape must be positive");
        return {h, w};
    } catch (const std::logic_error&) {
        throw ConfigError("shape must look like HxW, got '" + text + "'");
    }
}

// Options shared by the commands that draw outliers or train a network.
struct RunOptions {
    RunConfig cfg;
    std::vector<double> b_values;
    std::string optimizer = "sgd";
    std::optional<double> clamp_lo, clamp_hi;

    void add_outlier_options(CLI::App* app) {
        app->add_option("--seed", cfg.seed, "Root seed")->required();
        app->add_option("--outlier-count", cfg.outlier_count, "Outliers to draw (0 = one per training normal)")
            ->capture_default_str();
        app->add_option("--clamp-lo", clamp_lo, "Clamp outliers from below");
        app->add_option("--clamp-hi", clamp_hi, "Clamp outliers from above");
    }

    void add_network_options(CLI::App* app) {
        auto& t = cfg.train;
        app->add_option("--hidden", cfg.hidden_dims, "Hidden layer widths")->delimiter(',')->capture_default_str();
        app->add_option("--b", b_values, "B exponent: one value for all layers or one per layer")->delimiter(',');
        app->add_option("--optimizer", optimizer, "sgd or adam")->capture_default_str();
        app->add_option("--lr", t.learning_rate, "Learning rate")->capture_default_str();
        app->add_option("--epochs", t.epochs)->capture_default_str();
        app->add_option("--batch-size", t.batch_size)->capture_default_str();
        app->add_option("--weight-decay", t.weight_decay, "Decoupled weight decay")->capture_default_str();
        app->add_option("--logit-scale", t.logit_scale, "Logit multiplier seen by the loss")->capture_default_str();
        app->add_flag("--unit-norm-rows", t.unit_norm_rows, "Keep weight rows at unit norm");
        app->add_option("--adam-beta1", t.adam_beta1)->capture_default_str();
        app->add_option("--adam-beta2", t.adam_beta2)->capture_default_str();
        app->add_option("--adam-epsilon", t.adam_epsilon)->capture_default_str();
    }

    // Called after parsing.
    RunConfig resolve() {
        cfg.train.optimizer = parse_optimizer(optimizer);
        const std::size_t layers = cfg.hidden_dims.size() + 1;
        if (b_values.size() == 1)
            cfg.b_per_layer.assign(layers, b_values.front());
        else if (!b_values.empty()) {
            if (b_values.size() != layers)
                throw ConfigError("--b needs 1 or " + std::to_string(layers) + " values, got " +
                                  std::to_string(b_values.size()));
            cfg.b_per_layer = b_values;
        }
        if (clamp_lo || clamp_hi) {
            ClampRange r;
            if (clamp_lo) r.lo = *clamp_lo;
            if (clamp_hi) r.hi = *clamp_hi;
            if (!(r.lo < r.hi)) throw ConfigError("clamp range is empty");
            cfg.clamp = r;
        }
        return cfg;
    }
};

struct ScoreOptions {
    ScoreConfig cfg;
    std::optional<std::size_t> feature_layer;

    void add(CLI::App* app) {
        app->add_option("--k", cfg.k, "Nearest neighbours summed in FFS")->capture_default_str();
        app->add_option("--novelty-layer", cfg.novelty_layer, "Layer whose input ENS compares against")
            ->capture_default_str();
        app->add_option("--node", cfg.target_node, "Output node explained by ENS")->capture_default_str();
        app->add_option("--joint-weight", cfg.joint_weight, "Weight of the ENS term in the joint score")
            ->capture_default_str();
        app->add_option("--feature-layer", feature_layer, "Memory bank layer (default: penultimate)");
    }

    ScoreConfig resolve() {
        cfg.feature_layer = feature_layer;
        return cfg;
    }
};

DatasetTable load_inputs(const std::string& path) {
    if (fs::path(path).extension() == ".pgm") return load_pgm(path);
    return load_csv(path);
}

void print_normalization(const Normalization& n) {
    std::cout << "ffs_mean = " << format_real(n.ffs.mean) << '\n'
              << "ffs_std = " << format_real(n.ffs.std) << '\n'
              << "ens_mean = " << format_real(n.ens.mean) << '\n'
              << "ens_std = " << format_real(n.ens.std) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint familiarity and novelty anomaly detection with B-cos networks"};
    app.set_config("--config", "", "INI file; options go in a section named after the subcommand");
    app.require_subcommand(1);
    app.fallthrough();

    // synth
    SyntheticConfig syn;
    std::string synth_dir;
    auto* synth = app.add_subcommand("synth", "Write the synthetic novel-feature benchmark as CSV files");
    synth->add_option("--out-dir", synth_dir)->required();
    synth->add_option("--seed", syn.seed)->capture_default_str();
    synth->add_option("--dim", syn.dim)->capture_default_str();
    synth->add_option("--subspace-dim", syn.subspace_dim)->capture_default_str();
    synth->add_option("--clusters", syn.clusters)->capture_default_str();
    synth->add_option("--train-normals", syn.train_normals)->capture_default_str();
    synth->add_option("--test-normals", syn.test_normals)->capture_default_str();
    synth->add_option("--test-familiar", syn.test_familiar)->capture_default_str();
    synth->add_option("--test-novel", syn.test_novel)->capture_default_str();
    synth->add_option("--offset", syn.offset)->capture_default_str();
    synth->add_option("--cluster-radius", syn.cluster_radius)->capture_default_str();
    synth->add_option("--cluster-spread", syn.cluster_spread)->capture_default_str();
    synth->add_option("--noise", syn.noise)->capture_default_str();
    synth->add_option("--min-scale", syn.min_scale)->capture_default_str();
    synth->add_option("--max-scale", syn.max_scale)->capture_default_str();
    synth->add_option("--novel-energy", syn.novel_energy)->capture_default_str();

    // gen-outliers
    RunOptions gen_opts;
    std::string gen_train, gen_out;
    auto* gen = app.add_subcommand("gen-outliers", "Fit a Gaussian to training normals and sample outliers");
    gen->add_option("--train", gen_train, "CSV of training normals")->required();
    gen->add_option("--out", gen_out, "Output CSV")->required();
    gen_opts.add_outlier_options(gen);

    // train
    RunOptions train_opts;
    std::string train_path, outliers_path, model_out, loss_log;
    auto* train_cmd = app.add_subcommand("train", "Train a B-cos network on normals vs outliers");
    train_cmd->add_option("--train", train_path, "CSV of training normals")->required();
    train_cmd->add_option("--outliers", outliers_path, "CSV of outliers")->required();
    train_cmd->add_option("--out", model_out, "Model file")->required();
    train_cmd->add_option("--seed", train_opts.cfg.seed, "Root seed")->required();
    train_cmd->add_option("--loss-log", loss_log, "Write per-epoch loss and accuracy as CSV");
    train_opts.add_network_options(train_cmd);

    // score
    ScoreOptions score_opts;
    std::string score_model, score_train, score_test, score_out, score_projection;
    auto* score = app.add_subcommand("score", "Compute FFS, ENS and joint scores");
    score->add_option("--model", score_model)->required();
    score->add_option("--train", score_train, "CSV of training normals (memory bank)")->required();
    score->add_option("--test", score_test, "CSV of samples to score")->required();
    score->add_option("--out", score_out, "Scores CSV")->required();
    score->add_option("--projection", score_projection, "Also write the PCA projection CSV");
    score_opts.add(score);

    // explain
    std::string expl_model, expl_input, expl_dir, expl_shape;
    std::size_t expl_rows = 0, expl_node = BcosNetwork::kNormalNode;
    unsigned expl_maxval = 255;
    auto* explain = app.add_subcommand("explain", "Render input-space explanations as PGM heatmaps");
    explain->add_option("--model", expl_model)->required();
    explain->add_option("--input", expl_input, "CSV of samples or a single .pgm image")->required();
    explain->add_option("--out-dir", expl_dir)->required();
    explain->add_option("--shape", expl_shape, "HxW, required for CSV input");
    explain->add_option("--rows", expl_rows, "Samples to render (0 = all)")->capture_default_str();
    explain->add_option("--node", expl_node, "Output node to explain")->capture_default_str();
    explain->add_option("--maxval", expl_maxval, "PGM maxval")->capture_default_str()->check(CLI::Range(1, 65535));

    // eval
    std::string eval_scores, eval_out;
    auto* eval = app.add_subcommand("eval", "AUROC, oracle threshold and FN reduction from a scores CSV");
    eval->add_option("--scores", eval_scores)->required();
    eval->add_option("--out", eval_out, "Metrics file (default: stdout)");

    // pipeline
    RunOptions pipe_opts;
    ScoreOptions pipe_score;
    std::string heatmap_shape;
    auto* pipeline = app.add_subcommand("pipeline", "Outliers, training, scoring and evaluation in one run");
    pipeline->add_option("--train", pipe_opts.cfg.train_path, "CSV of training normals")->required();
    pipeline->add_option("--test", pipe_opts.cfg.test_path, "Labeled test CSV")->required();
    pipeline->add_option("--out-dir", pipe_opts.cfg.output_dir)->required();
    pipeline->add_option("--heatmaps", pipe_opts.cfg.heatmap_count, "Heatmaps for the first N test samples")
        ->capture_default_str();
    pipeline->add_option("--heatmap-shape", heatmap_shape, "HxW");
    pipe_opts.add_outlier_options(pipeline);
    pipe_opts.add_network_options(pipeline);
    pipe_score.add(pipeline);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (*synth) {
            const auto bench = make_synthetic_benchmark(syn);
            fs::create_directories(synth_dir);
            const fs::path dir(synth_dir);
            save_csv(bench.train, (dir / "train.csv").string());
            save_csv(bench.test_familiar, (dir / "test_familiar.csv").string());
            save_csv(bench.test_novel, (dir / "test_novel.csv").string());
            save_csv(bench.test_combined, (dir / "test_combined.csv").string());
            std::cout << "wrote " << bench.train.size() << " training and " << bench.test_combined.size()
                      << " combined test samples to " << synth_dir << '\n';
        } else if (*gen) {
            const auto cfg = gen_opts.resolve();
            const auto train = load_csv(gen_train);
            const auto outliers = generate_outliers(cfg, train);
            save_csv(outliers, gen_out);
            std::cout << "wrote " << outliers.size() << " outliers to " << gen_out << '\n';
        } else if (*train_cmd) {
            const auto cfg = train_opts.resolve();
            const auto normals = load_csv(train_path);
            const auto outliers = load_csv(outliers_path);
            TrainReport report;
            const auto net = train_model(cfg, normals, outliers, &report);
            save_model(net, model_out);
            if (!loss_log.empty()) {
                std::ofstream out(loss_log);
                if (!out) throw std::runtime_error(loss_log + ": cannot open for writing");
                out << "epoch,loss,accuracy\n";
                for (std::size_t e = 0; e < report.epoch_loss.size(); ++e)
                    out << e + 1 << ',' << format_real(report.epoch_loss[e]) << ','
                        << format_real(report.epoch_accuracy[e]) << '\n';
            }
            std::cout << "train_accuracy = " << format_real(accuracy(net, normals, outliers)) << '\n';
            if (!report.epoch_loss.empty())
                std::cout << "final_loss = " << format_real(report.epoch_loss.back()) << '\n';
        } else if (*score) {
            const auto net = load_model(score_model);
            const auto train = load_csv(score_train);
            const auto test = load_csv(score_test);
            const auto result = score_dataset(net, train, test, score_opts.resolve());
            write_scores(result.records, test.labels, score_out);
            if (!score_projection.empty())
                write_projection(projection_for(net, result.bank, train, test, result.records, result.config),
                                 score_projection);
            print_normalization(*result.config.normalization);
        } else if (*explain) {
            const auto net = load_model(expl_model);
            const auto input = load_inputs(expl_input);
            if (input.dim() != net.input_dim()) throw DimensionError("input width does not match the model");
            const ImageShape shape = !expl_shape.empty() ? parse_shape(expl_shape)
                                     : input.shape_hint  ? *input.shape_hint
                                                         : throw ConfigError("--shape is required for CSV input");
            if (shape.height * shape.width != input.dim()) throw DimensionError("shape does not match the input width");
            if (expl_node >= BcosNetwork::kHeadDim) throw IndexError("node must be 0 or 1");
            fs::create_directories(expl_dir);
            const std::size_t n = expl_rows ? std::min(expl_rows, input.size()) : input.size();
            for (std::size_t i = 0; i < n; ++i) {
                const auto fw = forward(net, input.row(i));
                const Vec expl = collapse(net, fw.trace, 0, expl_node);
                save_heatmap(expl, input.row(i), shape,
                             (fs::path(expl_dir) / ("sample_" + std::to_string(i) + ".pgm")).string(), expl_maxval);
            }
            std::cout << "wrote " << n << " heatmaps to " << expl_dir << '\n';
        } else if (*eval) {
            const auto file = read_scores(eval_scores);
            if (!file.labels) throw ConfigError("scores file has no labels");
            const auto metrics = evaluate_records(file.records, *file.labels);
            if (eval_out.empty())
                write_metrics(metrics, std::cout);
            else
                write_metrics(metrics, eval_out);
        } else if (*pipeline) {
            auto cfg = pipe_opts.resolve();
            cfg.score = pipe_score.resolve();
            if (!heatmap_shape.empty()) cfg.heatmap_shape = parse_shape(heatmap_shape);
            const auto result = run_pipeline(cfg);
            write_metrics(result.metrics, std::cout);
        }
    } catch (const StageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: [" << command << "] " << e.what() << '\n';
        return 1;
    }
    return 0;
}
