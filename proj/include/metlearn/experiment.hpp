#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "metlearn/dataset.hpp"
#include "metlearn/losses.hpp"
#include "metlearn/optimizer.hpp"

namespace metlearn {

/// Configuration of the noise-robustness experiment: for every noise
/// dimension and run, augment the dataset with correlated Wishart noise,
/// split 70/10/20, fit with and without norm regularization, select the
/// trade-off weight on the validation split, and score k-NN test error.
struct ExperimentConfig {
    std::string dataset_path;
    std::string dataset_name;  ///< defaults to the file stem
    bool has_header = false;
    int label_column = -1;

    std::vector<int> noise_dims = {0, 25, 50, 100, 200, 500};
    std::vector<double> lambda_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                       0.6, 0.7, 0.8, 0.9, 1.0};
    int k = 3;
    int runs = 20;
    int pair_passes = 8;  ///< training pairs formed from this many reshuffles

    /// Loss limits; when auto_loss is set (default) they are calibrated
    /// per run from the mean squared pair distance rho under the identity:
    /// lambda = 1/rho, U = rho/2, L = 3 rho/2.
    bool auto_loss = true;
    double loss_lambda = 1.0;
    double loss_u = 0.0;
    double loss_l = 1.0;

    FitOptions fit{/*max_iters=*/250, /*step0=*/0.5, /*tol=*/1e-7,
                   /*patience=*/50, /*seed=*/0};
    std::uint64_t seed = 0;
    std::string output_path;
};

struct ExperimentRow {
    std::string dataset;
    int noise_dim = 0;
    int run = 0;
    double lambda_selected = 0.0;
    double err_unreg = 0.0;
    double err_reg = 0.0;
    double err_identity = 0.0;
    double err_random = 0.0;
};

/// Executes every (noise_dim, run) cell; cells run concurrently and the
/// rows come back in (noise_dim, run) order regardless of scheduling.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg);

/// CSV with the fixed header
/// dataset,noise_dim,run,lambda_selected,err_unreg,err_reg,err_identity,err_random
void write_experiment_csv(const std::vector<ExperimentRow>& rows, std::ostream& out);
void write_experiment_csv(const std::vector<ExperimentRow>& rows,
                          const std::string& path);

/// Parses a plain "key = value" config file ('#' starts a comment).
/// Unknown keys are an error.
ExperimentConfig parse_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config(const std::string& path);

/// Calibrated or fixed loss parameters for a set of training pairs.
LossSpec experiment_loss_spec(const ExperimentConfig& cfg, const PairedSample& pairs);

/// Training pairs: pair_passes seeded reshuffles of the training split,
/// consecutively paired and concatenated.
PairedSample experiment_pairs(const LabeledDataset& train, int pair_passes,
                              std::uint64_t seed);

}  // namespace metlearn
