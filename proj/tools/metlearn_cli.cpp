// Command-line surface for the metric learning library: fitting, SRM
// selection, k-NN evaluation, noise augmentation, complexity estimation,
// the hardness experiment and the full noise-robustness experiment.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metlearn/complexity.hpp"
#include "metlearn/dataset.hpp"
#include "metlearn/errors.hpp"
#include "metlearn/experiment.hpp"
#include "metlearn/hardness.hpp"
#include "metlearn/knn.hpp"
#include "metlearn/metric.hpp"
#include "metlearn/netclass.hpp"
#include "metlearn/optimizer.hpp"
#include "metlearn/rng.hpp"

namespace {

using namespace metlearn;

struct CommonDataArgs {
    std::string path;
    bool has_header = false;
    int label_column = -1;
};

void add_data_options(CLI::App* cmd, CommonDataArgs& args) {
    cmd->add_option("--data", args.path, "input CSV")->required();
    cmd->add_flag("--has-header", args.has_header, "skip a header line");
    cmd->add_option("--label-column", args.label_column,
                    "label column index (-1 = last)");
}

struct LossArgs {
    bool fixed = false;
    double lambda = 1.0;
    double u = 0.0;
    double l = 1.0;
};

void add_loss_options(CLI::App* cmd, LossArgs& args) {
    cmd->add_flag("--fixed-loss", args.fixed,
                  "use --loss-* values instead of calibrating from data");
    cmd->add_option("--loss-lambda", args.lambda, "loss slope");
    cmd->add_option("--loss-u", args.u, "same-class upper limit");
    cmd->add_option("--loss-l", args.l, "different-class lower limit");
}

LossSpec resolve_loss(const LossArgs& args, const PairedSample& pairs) {
    ExperimentConfig helper;
    helper.auto_loss = !args.fixed;
    helper.loss_lambda = args.lambda;
    helper.loss_u = args.u;
    helper.loss_l = args.l;
    return experiment_loss_spec(helper, pairs);
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw DataError("cannot open output " + path);
    return file;
}

int run(int argc, char** argv) {
    CLI::App app{"Mahalanobis metric learning toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    std::string output;
    std::string config_path;
    app.add_option("--seed", seed, "base seed for all randomized steps");
    app.add_option("--output", output, "output file (default: stdout)");
    app.add_option("--config", config_path, "experiment config file");

    // fit: regularized empirical risk minimization on one dataset.
    auto* fit_cmd = app.add_subcommand("fit", "fit a metric by regularized ERM");
    CommonDataArgs fit_data;
    LossArgs fit_loss;
    double fit_lambda_reg = 0.0;
    int fit_pair_passes = 8;
    FitOptions fit_opts;
    add_data_options(fit_cmd, fit_data);
    add_loss_options(fit_cmd, fit_loss);
    fit_cmd->add_option("--lambda", fit_lambda_reg, "regularization weight");
    fit_cmd->add_option("--pair-passes", fit_pair_passes,
                        "number of reshuffled pairing passes");
    fit_cmd->add_option("--max-iters", fit_opts.max_iters, "iteration cap");
    fit_cmd->add_option("--step0", fit_opts.step0, "initial step size");
    fit_cmd->add_option("--tol", fit_opts.tol, "stopping tolerance");

    // srm: adaptive selection over the regularization path.
    auto* srm_cmd =
        app.add_subcommand("srm", "fit with adaptive complexity selection");
    CommonDataArgs srm_data;
    LossArgs srm_loss;
    int srm_pair_passes = 8;
    double srm_delta = 0.05;
    FitOptions srm_opts;
    add_data_options(srm_cmd, srm_data);
    add_loss_options(srm_cmd, srm_loss);
    srm_cmd->add_option("--pair-passes", srm_pair_passes,
                        "number of reshuffled pairing passes");
    srm_cmd->add_option("--delta", srm_delta, "confidence level");
    srm_cmd->add_option("--max-iters", srm_opts.max_iters, "iteration cap");
    srm_cmd->add_option("--step0", srm_opts.step0, "initial step size");

    // eval: k-NN error under a stored metric.
    auto* eval_cmd = app.add_subcommand("eval", "k-NN evaluation of a metric");
    std::string eval_train, eval_test, eval_metric;
    bool eval_has_header = false;
    int eval_label_column = -1;
    int eval_k = 3;
    eval_cmd->add_option("--train", eval_train, "training CSV")->required();
    eval_cmd->add_option("--test", eval_test, "test CSV")->required();
    eval_cmd->add_option("--metric", eval_metric,
                         "metric file (default: identity)");
    eval_cmd->add_flag("--has-header", eval_has_header, "skip a header line");
    eval_cmd->add_option("--label-column", eval_label_column,
                         "label column index (-1 = last)");
    eval_cmd->add_option("--k", eval_k, "neighbor count");

    // augment: append correlated Wishart noise.
    auto* augment_cmd =
        app.add_subcommand("augment", "append correlated Wishart noise");
    CommonDataArgs augment_data;
    int augment_dim = 0;
    add_data_options(augment_cmd, augment_data);
    augment_cmd->add_option("--noise-dim", augment_dim, "noise dimension")
        ->required();

    // complexity: Rademacher estimates against the deviation bound.
    auto* complexity_cmd = app.add_subcommand(
        "complexity", "estimate Rademacher complexity over sample sizes");
    CommonDataArgs complexity_data;
    std::vector<int> complexity_m_grid{4, 8, 16, 32, 64};
    int complexity_draws = 200;
    double complexity_lambda = 1.0;
    double complexity_delta = 0.1;
    add_data_options(complexity_cmd, complexity_data);
    complexity_cmd->add_option("--m-grid", complexity_m_grid,
                               "pair counts to evaluate");
    complexity_cmd->add_option("--draws", complexity_draws, "sign draws");
    complexity_cmd->add_option("--loss-lambda", complexity_lambda, "loss slope");
    complexity_cmd->add_option("--delta", complexity_delta, "confidence level");

    // hardness: failure-rate scaling on the adversarial family.
    auto* hardness_cmd = app.add_subcommand(
        "hardness", "failure rates of ERM on the adversarial simplex family");
    LowerboundOptions hardness_opts;
    hardness_cmd->add_option("--dim", hardness_opts.D, "representation dimension");
    hardness_cmd->add_option("--alpha", hardness_opts.alpha, "label bias");
    hardness_cmd->add_option("--m-grid", hardness_opts.m_grid, "sample sizes");
    hardness_cmd->add_option("--trials", hardness_opts.trials, "trials per size");
    hardness_cmd->add_option("--eps", hardness_opts.eps, "excess-risk threshold");
    hardness_cmd->add_option("--max-iters", hardness_opts.fit.max_iters,
                             "iteration cap");
    hardness_cmd->add_option("--step0", hardness_opts.fit.step0,
                             "initial step size");

    // experiment: the full noise sweep.
    auto* experiment_cmd =
        app.add_subcommand("experiment", "noise sweep with validation selection");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);  // prints help or the parse error
        return code == 0 ? 0 : 2;
    }

    if (*fit_cmd) {
        const LabeledDataset ds =
            load_csv(fit_data.path, fit_data.has_header, fit_data.label_column);
        const PairedSample pairs =
            experiment_pairs(shuffled(ds, derive_seed(seed, 0)), fit_pair_passes,
                             derive_seed(seed, 1));
        const LossSpec spec = resolve_loss(fit_loss, pairs);
        fit_opts.seed = derive_seed(seed, 2);
        const Metric m = erm_fit(pairs, spec, fit_lambda_reg, fit_opts);
        const auto fc = frobenius_complexity(m);
        std::ofstream file;
        save_metric(m, open_output(file, output));
        std::fprintf(stderr,
                     "fit: m=%d pairs, error=%.6f, frobenius2=%.6f, d=%d\n",
                     pairs.size(), empirical_distance_error(m, pairs, spec), fc.f2,
                     fc.d);
        return 0;
    }
    if (*srm_cmd) {
        const LabeledDataset ds =
            load_csv(srm_data.path, srm_data.has_header, srm_data.label_column);
        const PairedSample pairs =
            experiment_pairs(shuffled(ds, derive_seed(seed, 0)), srm_pair_passes,
                             derive_seed(seed, 1));
        const LossSpec spec = resolve_loss(srm_loss, pairs);
        srm_opts.seed = derive_seed(seed, 2);
        const SrmParams params = SrmParams::uniform_prior(
            ds.support_bound(), spec.lambda, srm_delta, ds.dim());
        const SrmSelection sel = srm_select(pairs, spec, params, srm_opts);
        std::ofstream file;
        save_metric(sel.metric, open_output(file, output));
        std::fprintf(stderr, "srm: d_hat=%d, lambda=%.6g, score=%.6f\n", sel.d_hat,
                     sel.lambda_reg, sel.score);
        return 0;
    }
    if (*eval_cmd) {
        const LabeledDataset train =
            load_csv(eval_train, eval_has_header, eval_label_column);
        const LabeledDataset test =
            load_csv(eval_test, eval_has_header, eval_label_column);
        const Metric m = eval_metric.empty() ? Metric::identity(train.dim())
                                             : load_metric(eval_metric);
        std::ofstream file;
        std::ostream& out = open_output(file, output);
        out << "knn_error," << knn_error(m, train, test, eval_k) << '\n';
        out << "random_baseline," << random_baseline(train, test) << '\n';
        return 0;
    }
    if (*augment_cmd) {
        const LabeledDataset ds = load_csv(augment_data.path, augment_data.has_header,
                                           augment_data.label_column);
        LabeledDataset out = ds;
        if (augment_dim > 0) {
            const Eigen::MatrixXd sigma =
                wishart_covariance(augment_dim, derive_seed(seed, 1));
            out = augment_noise(ds, sigma, derive_seed(seed, 2));
        }
        if (output.empty()) throw DataError("augment: --output is required");
        save_csv(out, output);
        return 0;
    }
    if (*complexity_cmd) {
        const LabeledDataset ds =
            load_csv(complexity_data.path, complexity_data.has_header,
                     complexity_data.label_column);
        const PairedSample all_pairs = make_pairs(shuffled(ds, derive_seed(seed, 0)));
        const double support = ds.support_bound();
        std::ofstream file;
        std::ostream& out = open_output(file, output);
        out << "m,D,estimate,stderr,bound\n";
        for (int m : complexity_m_grid) {
            if (m < 1 || m > all_pairs.size()) {
                throw DataError("complexity: m grid entry exceeds available pairs");
            }
            std::vector<std::uint8_t> same(static_cast<std::size_t>(m));
            for (int i = 0; i < m; ++i) {
                same[static_cast<std::size_t>(i)] = all_pairs.same_label(i);
            }
            const PairedSample subset(all_pairs.diffs().leftCols(m), std::move(same));
            const McEstimate est = rademacher_estimate(subset, complexity_draws,
                                                       derive_seed(seed, 1,
                                                                   static_cast<std::uint64_t>(m)));
            BoundInputs b;
            b.B = support;
            b.lambda = complexity_lambda;
            b.D = ds.dim();
            b.m = m;
            b.delta = complexity_delta;
            char line[256];
            std::snprintf(line, sizeof(line), "%d,%d,%.10g,%.10g,%.10g\n", m,
                          ds.dim(), est.mean, est.stderr_,
                          ambient_deviation_bound(b));
            out << line;
        }
        return 0;
    }
    if (*hardness_cmd) {
        hardness_opts.seed = seed;
        const auto rows = lowerbound_experiment(hardness_opts);
        std::ofstream file;
        std::ostream& out = open_output(file, output);
        out << "D,alpha,m,trials,failure_fraction,threshold_m\n";
        for (const auto& r : rows) {
            char line[256];
            std::snprintf(line, sizeof(line), "%d,%.10g,%d,%d,%.10g,%.10g\n", r.D,
                          r.alpha, r.m, r.trials, r.failure_fraction, r.threshold_m);
            out << line;
        }
        return 0;
    }
    if (*experiment_cmd) {
        if (config_path.empty()) throw DataError("experiment: --config is required");
        ExperimentConfig cfg = load_experiment_config(config_path);
        if (app.count("--seed")) cfg.seed = seed;
        if (!output.empty()) cfg.output_path = output;
        const auto rows = run_experiment(cfg);
        std::ofstream file;
        write_experiment_csv(rows, open_output(file, cfg.output_path));
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const metlearn::DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const metlearn::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << '\n';
        return 3;
    }
}
