#include "metlearn/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "metlearn/errors.hpp"
#include "metlearn/knn.hpp"
#include "metlearn/parallel.hpp"
#include "metlearn/rng.hpp"

namespace metlearn {

namespace {

std::string file_stem(const std::string& path) {
    auto slash = path.find_last_of("/\\");
    std::string base = slash == std::string::npos ? path : path.substr(slash + 1);
    auto dot = base.find_last_of('.');
    return dot == std::string::npos ? base : base.substr(0, dot);
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.dataset_path.empty()) throw DataError("experiment: dataset path missing");
    if (cfg.runs < 1) throw DataError("experiment: runs must be >= 1");
    if (cfg.k < 1 || cfg.k % 2 == 0) throw DataError("experiment: k must be odd");
    if (cfg.noise_dims.empty()) throw DataError("experiment: empty noise grid");
    if (cfg.lambda_grid.empty()) throw DataError("experiment: empty lambda grid");
    if (cfg.pair_passes < 1) throw DataError("experiment: pair_passes must be >= 1");
    for (int nd : cfg.noise_dims) {
        if (nd < 0) throw DataError("experiment: noise dims must be >= 0");
    }
    for (double l : cfg.lambda_grid) {
        if (l < 0.0) throw DataError("experiment: lambda grid must be >= 0");
    }
}

}  // namespace

PairedSample experiment_pairs(const LabeledDataset& train, int pair_passes,
                              std::uint64_t seed) {
    const int per_pass = train.size() / 2;
    if (per_pass < 1) throw DataError("experiment_pairs: training split too small");
    Eigen::MatrixXd diffs(train.dim(),
                          static_cast<Eigen::Index>(per_pass) * pair_passes);
    std::vector<std::uint8_t> same;
    same.reserve(static_cast<std::size_t>(per_pass) * pair_passes);
    Eigen::Index col = 0;
    for (int pass = 0; pass < pair_passes; ++pass) {
        const LabeledDataset order =
            shuffled(train, derive_seed(seed, static_cast<std::uint64_t>(pass)));
        for (int i = 0; i < per_pass; ++i) {
            diffs.col(col++) = order.points.col(2 * i) - order.points.col(2 * i + 1);
            same.push_back(order.labels[static_cast<std::size_t>(2 * i)] ==
                           order.labels[static_cast<std::size_t>(2 * i + 1)]);
        }
    }
    return PairedSample(std::move(diffs), std::move(same));
}

LossSpec experiment_loss_spec(const ExperimentConfig& cfg, const PairedSample& pairs) {
    if (!cfg.auto_loss) return LossSpec(cfg.loss_lambda, cfg.loss_u, cfg.loss_l);
    double mean_rho = 0.0;
    for (int i = 0; i < pairs.size(); ++i) {
        mean_rho += pairs.weights()[i] * pairs.diffs().col(i).squaredNorm();
    }
    if (!(mean_rho > 0.0)) return LossSpec(1.0, 0.0, 1.0);
    return LossSpec(1.0 / mean_rho, 0.5 * mean_rho, 1.5 * mean_rho);
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    const LabeledDataset base =
        load_csv(cfg.dataset_path, cfg.has_header, cfg.label_column);
    if (base.num_classes() < 2) {
        throw DataError("experiment: dataset needs at least two classes");
    }
    const std::string name =
        cfg.dataset_name.empty() ? file_stem(cfg.dataset_path) : cfg.dataset_name;

    std::vector<double> grid = cfg.lambda_grid;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const std::size_t cells = cfg.noise_dims.size() * static_cast<std::size_t>(cfg.runs);
    std::vector<ExperimentRow> rows(cells);

    parallel_for(cells, [&](std::size_t cell) {
        const std::size_t nd_index = cell / static_cast<std::size_t>(cfg.runs);
        const int run = static_cast<int>(cell % static_cast<std::size_t>(cfg.runs));
        const int noise_dim = cfg.noise_dims[nd_index];
        const std::uint64_t cell_seed =
            derive_seed(cfg.seed, static_cast<std::uint64_t>(noise_dim),
                        static_cast<std::uint64_t>(run));

        LabeledDataset ds = base;
        if (noise_dim > 0) {
            const Eigen::MatrixXd sigma =
                wishart_covariance(noise_dim, derive_seed(cell_seed, 1));
            ds = augment_noise(base, sigma, derive_seed(cell_seed, 2));
        }

        // Unstratified split; reseed deterministically if a class vanishes.
        Split parts;
        bool split_ok = false;
        for (std::uint64_t attempt = 0; attempt < 100 && !split_ok; ++attempt) {
            try {
                SplitSpec sp;
                sp.seed = derive_seed(cell_seed, 3, attempt);
                parts = split(ds, sp);
                split_ok = true;
            } catch (const SplitClassLoss&) {
            }
        }
        if (!split_ok) {
            throw DataError("experiment: could not find a class-preserving split");
        }

        const PairedSample pairs =
            experiment_pairs(parts.train, cfg.pair_passes, derive_seed(cell_seed, 4));
        const LossSpec spec = experiment_loss_spec(cfg, pairs);

        FitOptions fit = cfg.fit;
        fit.seed = derive_seed(cell_seed, 5);

        const Metric identity = Metric::identity(ds.dim());
        Metric unreg = erm_fit(pairs, spec, 0.0, fit);

        double best_val = std::numeric_limits<double>::infinity();
        double best_lambda = grid.front();
        Metric best = identity;
        for (double lam : grid) {  // ascending, so ties keep the smaller lambda
            Metric cand = lam == 0.0 ? unreg : erm_fit(pairs, spec, lam, fit);
            const double val = knn_error(cand, parts.train, parts.val, cfg.k);
            if (val < best_val) {
                best_val = val;
                best_lambda = lam;
                best = std::move(cand);
            }
        }

        ExperimentRow row;
        row.dataset = name;
        row.noise_dim = noise_dim;
        row.run = run;
        row.lambda_selected = best_lambda;
        row.err_unreg = knn_error(unreg, parts.train, parts.test, cfg.k);
        row.err_reg = knn_error(best, parts.train, parts.test, cfg.k);
        row.err_identity = knn_error(identity, parts.train, parts.test, cfg.k);
        row.err_random = random_baseline(parts.train, parts.test);
        rows[cell] = std::move(row);
    });
    return rows;
}

namespace {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

void write_experiment_csv(const std::vector<ExperimentRow>& rows, std::ostream& out) {
    out << "dataset,noise_dim,run,lambda_selected,err_unreg,err_reg,err_identity,"
           "err_random\n";
    for (const auto& r : rows) {
        out << r.dataset << ',' << r.noise_dim << ',' << r.run << ','
            << format_number(r.lambda_selected) << ',' << format_number(r.err_unreg)
            << ',' << format_number(r.err_reg) << ',' << format_number(r.err_identity)
            << ',' << format_number(r.err_random) << '\n';
    }
}

void write_experiment_csv(const std::vector<ExperimentRow>& rows,
                          const std::string& path) {
    std::ofstream f(path);
    if (!f) throw DataError("write_experiment_csv: cannot open " + path);
    write_experiment_csv(rows, f);
    if (!f) throw DataError("write_experiment_csv: write failed for " + path);
}

namespace {

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw DataError("config: bad boolean for " + key);
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            bool blank = true;
            for (char c : line) blank &= std::isspace(static_cast<unsigned char>(c));
            if (blank) continue;
            throw DataError("config: line " + std::to_string(line_no) +
                            " is not 'key = value'");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "dataset") {
                cfg.dataset_path = value;
            } else if (key == "name") {
                cfg.dataset_name = value;
            } else if (key == "has_header") {
                cfg.has_header = parse_bool(value, key);
            } else if (key == "label_column") {
                cfg.label_column = std::stoi(value);
            } else if (key == "noise_dims") {
                cfg.noise_dims.clear();
                for (const auto& s : split_list(value)) {
                    cfg.noise_dims.push_back(std::stoi(s));
                }
            } else if (key == "lambda_grid") {
                cfg.lambda_grid.clear();
                for (const auto& s : split_list(value)) {
                    cfg.lambda_grid.push_back(std::stod(s));
                }
            } else if (key == "k") {
                cfg.k = std::stoi(value);
            } else if (key == "runs") {
                cfg.runs = std::stoi(value);
            } else if (key == "pair_passes") {
                cfg.pair_passes = std::stoi(value);
            } else if (key == "auto_loss") {
                cfg.auto_loss = parse_bool(value, key);
            } else if (key == "loss_lambda") {
                cfg.loss_lambda = std::stod(value);
            } else if (key == "loss_u") {
                cfg.loss_u = std::stod(value);
            } else if (key == "loss_l") {
                cfg.loss_l = std::stod(value);
            } else if (key == "fit_max_iters") {
                cfg.fit.max_iters = std::stoi(value);
            } else if (key == "fit_step0") {
                cfg.fit.step0 = std::stod(value);
            } else if (key == "fit_tol") {
                cfg.fit.tol = std::stod(value);
            } else if (key == "fit_patience") {
                cfg.fit.patience = std::stoi(value);
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "output") {
                cfg.output_path = value;
            } else {
                throw DataError("config: unknown key '" + key + "'");
            }
        } catch (const DataError&) {
            throw;
        } catch (const std::exception&) {
            throw DataError("config: bad value for '" + key + "' at line " +
                            std::to_string(line_no));
        }
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("config: cannot open " + path);
    return parse_experiment_config(f);
}

}  // namespace metlearn
