#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>

#include "metlearn/errors.hpp"
#include "metlearn/experiment.hpp"
#include "metlearn/rng.hpp"
#include "test_utils.hpp"

using namespace metlearn;

namespace {

const std::string kIris = std::string(METLEARN_DATA_DIR) + "/iris.csv";

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.dataset_path = kIris;
    cfg.dataset_name = "iris";
    cfg.noise_dims = {0, 5};
    cfg.lambda_grid = {0.0, 0.5};
    cfg.runs = 2;
    cfg.k = 3;
    cfg.pair_passes = 2;
    cfg.fit.max_iters = 40;
    cfg.seed = 7;
    return cfg;
}

}  // namespace

TEST_CASE("experiment_pairs concatenates reshuffled passes") {
    LabeledDataset ds;
    ds.points = testutil::random_matrix(3, 21, -1, 1, 2);
    for (int i = 0; i < 21; ++i) ds.labels.push_back(i % 2);
    const PairedSample pairs = experiment_pairs(ds, 4, 11);
    CHECK(pairs.size() == 4 * 10);
    CHECK(pairs.dim() == 3);

    const PairedSample again = experiment_pairs(ds, 4, 11);
    CHECK((pairs.diffs() - again.diffs()).norm() == 0.0);
}

TEST_CASE("loss calibration tracks the mean pair distance") {
    Eigen::MatrixXd diffs(1, 2);
    diffs << 2.0, 0.0;  // mean squared distance 2
    const PairedSample pairs(diffs, {1, 0});
    ExperimentConfig cfg;
    const LossSpec spec = experiment_loss_spec(cfg, pairs);
    CHECK(spec.lambda == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(spec.U == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(spec.L == doctest::Approx(3.0).epsilon(1e-12));

    cfg.auto_loss = false;
    cfg.loss_lambda = 2.0;
    cfg.loss_u = 0.1;
    cfg.loss_l = 0.9;
    const LossSpec fixed = experiment_loss_spec(cfg, pairs);
    CHECK(fixed.lambda == 2.0);
    CHECK(fixed.U == 0.1);
    CHECK(fixed.L == 0.9);
}

TEST_CASE("run_experiment emits one row per cell with errors in range") {
    const ExperimentConfig cfg = small_config();
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 4);
    int idx = 0;
    for (int nd : {0, 0, 5, 5}) {
        CHECK(rows[static_cast<std::size_t>(idx)].noise_dim == nd);
        ++idx;
    }
    for (const auto& r : rows) {
        CHECK(r.dataset == "iris");
        for (double e : {r.err_unreg, r.err_reg, r.err_identity, r.err_random}) {
            CHECK(e >= 0.0);
            CHECK(e <= 1.0);
        }
        CHECK(r.lambda_selected >= 0.0);
    }
}

TEST_CASE("a degenerate grid makes the regularized arm the plain fit") {
    ExperimentConfig cfg = small_config();
    cfg.noise_dims = {0};
    cfg.runs = 1;
    cfg.lambda_grid = {0.0};
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].lambda_selected == 0.0);
    CHECK(rows[0].err_reg == rows[0].err_unreg);
}

TEST_CASE("identity baseline does not depend on the lambda grid") {
    ExperimentConfig a = small_config();
    ExperimentConfig b = small_config();
    b.lambda_grid = {0.0, 0.1, 1.0};
    const auto ra = run_experiment(a);
    const auto rb = run_experiment(b);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].err_identity == rb[i].err_identity);
        CHECK(ra[i].err_random == rb[i].err_random);
    }
}

TEST_CASE("experiment output is byte-identical across invocations") {
    const ExperimentConfig cfg = small_config();
    std::stringstream a, b;
    write_experiment_csv(run_experiment(cfg), a);
    write_experiment_csv(run_experiment(cfg), b);
    CHECK(a.str() == b.str());
    CHECK(a.str().rfind("dataset,noise_dim,run,lambda_selected,err_unreg,err_reg,"
                        "err_identity,err_random\n",
                        0) == 0);
}

TEST_CASE("config parser round trip and errors") {
    std::stringstream cfg_text;
    cfg_text << "# comment line\n"
             << "dataset = data/iris.csv\n"
             << "name = iris\n"
             << "noise_dims = 0, 25, 50\n"
             << "lambda_grid = 0,0.5,1\n"
             << "k = 3\n"
             << "runs = 4\n"
             << "pair_passes = 3\n"
             << "auto_loss = true\n"
             << "fit_max_iters = 77\n"
             << "seed = 99\n"
             << "output = out.csv\n";
    const ExperimentConfig cfg = parse_experiment_config(cfg_text);
    CHECK(cfg.dataset_path == "data/iris.csv");
    CHECK(cfg.noise_dims == std::vector<int>{0, 25, 50});
    CHECK(cfg.lambda_grid == std::vector<double>{0.0, 0.5, 1.0});
    CHECK(cfg.runs == 4);
    CHECK(cfg.pair_passes == 3);
    CHECK(cfg.fit.max_iters == 77);
    CHECK(cfg.seed == 99);
    CHECK(cfg.output_path == "out.csv");

    std::stringstream bad("nonsense_key = 3\n");
    CHECK_THROWS_AS(parse_experiment_config(bad), DataError);
    std::stringstream malformed("runs 4\n");
    CHECK_THROWS_AS(parse_experiment_config(malformed), DataError);
    std::stringstream badval("runs = soon\n");
    CHECK_THROWS_AS(parse_experiment_config(badval), DataError);
}

TEST_CASE("experiment validation rejects bad configs") {
    ExperimentConfig cfg = small_config();
    cfg.k = 2;
    CHECK_THROWS_AS(run_experiment(cfg), DataError);
    cfg = small_config();
    cfg.runs = 0;
    CHECK_THROWS_AS(run_experiment(cfg), DataError);
    cfg = small_config();
    cfg.dataset_path.clear();
    CHECK_THROWS_AS(run_experiment(cfg), DataError);
}
