#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "metlearn/complexity.hpp"
#include "metlearn/errors.hpp"
#include "metlearn/metric.hpp"
#include "metlearn/rng.hpp"
#include "test_utils.hpp"

using namespace metlearn;

namespace {

double sign_value(const Eigen::MatrixXd& m, const Eigen::VectorXd& signs,
                  const Eigen::MatrixXd& diffs) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < diffs.cols(); ++i) {
        total += signs[i] * (m * diffs.col(i)).squaredNorm();
    }
    return total / static_cast<double>(diffs.cols());
}

// Candidate maximizers on the unit spectral sphere: the positive
// eigenspace projector of S (or the top eigendirection when S has no
// positive eigenvalue) plus random normalized matrices.
double random_search_sup(const Eigen::VectorXd& signs, const Eigen::MatrixXd& diffs,
                         int tries, std::uint64_t seed) {
    const Eigen::MatrixXd s = diffs * signs.asDiagonal() * diffs.transpose();
    const auto spec = sym_eig(s);
    const int dim = static_cast<int>(diffs.rows());
    Eigen::MatrixXd projector = Eigen::MatrixXd::Zero(dim, dim);
    bool any_positive = false;
    for (int i = 0; i < dim; ++i) {
        if (spec.eigenvalues[i] > 0.0) {
            projector += spec.eigenvectors.col(i) * spec.eigenvectors.col(i).transpose();
            any_positive = true;
        }
    }
    if (!any_positive) {
        projector = spec.eigenvectors.col(0) * spec.eigenvectors.col(0).transpose();
    }
    double best = sign_value(projector, signs, diffs);
    for (int t = 0; t < tries; ++t) {
        const Eigen::MatrixXd m =
            testutil::random_unit_spectral(dim, derive_seed(seed, t));
        best = std::max(best, sign_value(m, signs, diffs));
    }
    return best;
}

// Exact average of the closed form over all 2^m sign vectors.
double enumerate_mean(const Eigen::MatrixXd& diffs) {
    const int m = static_cast<int>(diffs.cols());
    REQUIRE(m <= 16);
    double total = 0.0;
    Eigen::VectorXd signs(m);
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        for (int i = 0; i < m; ++i) signs[i] = (mask >> i) & 1 ? 1.0 : -1.0;
        total += rademacher_sup_closed_form(signs, diffs);
    }
    return total / static_cast<double>(1u << m);
}

}  // namespace

TEST_CASE("closed form on orthonormal differences and degenerate inputs") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::VectorXd plus = Eigen::VectorXd::Ones(3);
    CHECK(rademacher_sup_closed_form(plus, eye) == doctest::Approx(1.0).epsilon(1e-12));

    const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(3, 4);
    CHECK(rademacher_sup_closed_form(Eigen::VectorXd::Ones(4), zeros) == 0.0);

    CHECK_THROWS_AS(rademacher_sup_closed_form(Eigen::VectorXd::Ones(2), eye),
                    DataError);
}

TEST_CASE("closed form for a single pair, both branches") {
    // One difference vector: sigma = +1 gives its squared norm; sigma = -1
    // gives the top eigenvalue of -xbar xbar^T, which is 0 for D >= 2 and
    // -|xbar|^2 in one dimension.
    Eigen::MatrixXd one_2d(2, 1);
    one_2d << 1.5, 0.5;
    Eigen::VectorXd sp(1), sm(1);
    sp << 1.0;
    sm << -1.0;
    const double norm2 = one_2d.col(0).squaredNorm();
    CHECK(rademacher_sup_closed_form(sp, one_2d) ==
          doctest::Approx(norm2).epsilon(1e-12));
    CHECK(rademacher_sup_closed_form(sm, one_2d) == doctest::Approx(0.0).epsilon(1e-12));

    Eigen::MatrixXd one_1d(1, 1);
    one_1d << 2.0;
    CHECK(rademacher_sup_closed_form(sp, one_1d) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(rademacher_sup_closed_form(sm, one_1d) ==
          doctest::Approx(-4.0).epsilon(1e-12));
}

TEST_CASE("closed form dominates and matches random search") {
    SplitMix64 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
        const int dim = 2;
        const int m = 3;
        const Eigen::MatrixXd diffs = testutil::random_matrix(dim, m, -1, 1,
                                                              rng.next_u64());
        Eigen::VectorXd signs(m);
        for (int i = 0; i < m; ++i) signs[i] = rng.next_sign();
        const double closed = rademacher_sup_closed_form(signs, diffs);

        // Dominance over every sampled feasible matrix.
        for (int t = 0; t < 2000; ++t) {
            const Eigen::MatrixXd mm =
                testutil::random_unit_spectral(dim, derive_seed(9, trial, t));
            CHECK(closed >= sign_value(mm, signs, diffs) - 1e-9);
        }
        // And the search (with the projector candidate) attains it.
        const double best = random_search_sup(signs, diffs, 2000, rng.next_u64());
        CHECK(closed == doctest::Approx(best).epsilon(1e-3));
    }
}

TEST_CASE("rademacher estimate on degenerate and enumerable samples") {
    Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(2, 3);
    const PairedSample zero_pairs(zeros, {1, 0, 1});
    const McEstimate z = rademacher_estimate(zero_pairs, 50, 1);
    CHECK(z.mean == 0.0);
    CHECK(z.stderr_ == 0.0);

    CHECK_THROWS_AS(rademacher_estimate(zero_pairs, 1, 1), DataError);

    // Small m: Monte Carlo agrees with exact enumeration within 3 stderr.
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const int m = 6;
        const PairedSample s = testutil::random_pairs(3, m, 1.0, 100 + seed);
        const double exact = enumerate_mean(s.diffs());
        const McEstimate est = rademacher_estimate(s, 3000, seed);
        CHECK(std::abs(est.mean - exact) <= 3.0 * est.stderr_ + 1e-12);
    }
}

TEST_CASE("estimate stays under the dimension-based chain on bounded data") {
    SplitMix64 rng(55);
    for (int trial = 0; trial < 4; ++trial) {
        const int dim = 3 + trial;
        const int m = 16 + 8 * trial;
        // Points in the unit ball: differences bounded by 2, B = 1.
        Eigen::MatrixXd diffs(dim, m);
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd a = testutil::random_vector(dim, -1, 1, rng.next_u64());
            Eigen::VectorXd b = testutil::random_vector(dim, -1, 1, rng.next_u64());
            if (a.norm() > 1.0) a /= a.norm();
            if (b.norm() > 1.0) b /= b.norm();
            diffs.col(i) = a - b;
        }
        const PairedSample s(diffs,
                             std::vector<std::uint8_t>(static_cast<std::size_t>(m), 1));
        const McEstimate est = rademacher_estimate(s, 400, rng.next_u64());
        const double chain = 4.0 * std::sqrt(static_cast<double>(dim) / m);
        CHECK(est.mean <= chain + 3.0 * est.stderr_);
    }
}

TEST_CASE("deviation bound values and scalings") {
    BoundInputs b;
    b.B = 1.0;
    b.lambda = 1.0;
    b.D = 4;
    b.m = 100;
    b.delta = 0.1;
    CHECK(ambient_deviation_bound(b) ==
          doctest::Approx(1.8145966026289347).epsilon(1e-12));

    BoundInputs quad = b;
    quad.m = 400;
    CHECK(ambient_deviation_bound(quad) ==
          doctest::Approx(0.5 * ambient_deviation_bound(b)).epsilon(1e-12));

    BoundInputs flat = b;
    flat.lambda = 0.0;
    CHECK(ambient_deviation_bound(flat) ==
          doctest::Approx(std::sqrt(2.0 * std::log(10.0) / 100.0)).epsilon(1e-12));

    b.d = 2.0;
    CHECK(refined_deviation_bound(b) ==
          doctest::Approx(1.3459674525274108).epsilon(1e-12));
    b.d = static_cast<double>(b.D);
    CHECK(refined_deviation_bound(b) ==
          doctest::Approx(ambient_deviation_bound(b)).epsilon(1e-12));

    // sqrt(d) scaling of the first term.
    BoundInputs one = b, hundred = b;
    one.d = 1.0;
    one.lambda = 1.0;
    hundred.d = 100.0;
    const double conc = std::sqrt(2.0 * std::log(10.0) / 100.0);
    CHECK((refined_deviation_bound(one) - conc) * 10.0 ==
          doctest::Approx(refined_deviation_bound(hundred) - conc).epsilon(1e-9));

    for (double d : {0.5, 1.0, 2.5, 4.0}) {
        BoundInputs r = b;
        r.d = d;
        CHECK(refined_deviation_bound(r) <= ambient_deviation_bound(b) + 1e-12);
    }
}

TEST_CASE("adaptive bound values") {
    SrmParams p = SrmParams::uniform_prior(1.0, 1.0, 1.0 / std::exp(1.0), 1);
    CHECK(adaptive_deviation_bound(1, 1, p) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(adaptive_deviation_bound(1, 4, p) == doctest::Approx(0.5).epsilon(1e-12));

    SrmParams uniform = SrmParams::uniform_prior(1.0, 1.0, 0.05, 8);
    for (int d = 2; d <= 8; ++d) {
        CHECK(adaptive_deviation_bound(d, 50, uniform) >
              adaptive_deviation_bound(d - 1, 50, uniform));
    }
}

TEST_CASE("hardness sample threshold") {
    CHECK(hardness_sample_threshold(511, 1.0 / 64.0) ==
          doctest::Approx(4096.0).epsilon(1e-12));
    CHECK(hardness_sample_threshold(15, 0.005) ==
          doctest::Approx(4.0 * hardness_sample_threshold(15, 0.01)).epsilon(1e-12));
    CHECK(hardness_sample_threshold(31, 0.01) / hardness_sample_threshold(15, 0.01) ==
          doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(hardness_sample_threshold(15, 0.5), DataError);
    CHECK_THROWS_AS(hardness_sample_threshold(15, 0.0), DataError);
}

TEST_CASE("network deviation bound") {
    BoundInputs b;
    b.B = 1.0;
    b.lambda = 1.0;
    b.gamma = 0.0;
    b.D = 4;
    b.d = 1.0;
    b.m = 10;
    b.delta = 0.1;
    CHECK(net_deviation_bound(b) == 0.0);

    b.gamma = 1.0;
    b.D = 1;
    b.delta = 1.0 / std::exp(1.0);
    b.m = 1;
    CHECK(net_deviation_bound(b) == doctest::Approx(1.0).epsilon(1e-12));

    b.delta = 0.1;
    double prev = 0.0;
    for (int dim : {2, 4, 8, 16}) {
        b.D = dim;
        const double val = net_deviation_bound(b);
        CHECK(val > prev);
        prev = val;
    }
}
