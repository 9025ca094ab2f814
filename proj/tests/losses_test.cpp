#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "metlearn/errors.hpp"
#include "metlearn/losses.hpp"
#include "metlearn/rng.hpp"
#include "test_utils.hpp"

using namespace metlearn;

namespace {

// Central difference of pair_loss in rho; the independent check for the
// subgradient away from kinks.
double loss_slope_fd(const LossSpec& spec, double rho, bool same, double h = 1e-6) {
    return (pair_loss(spec, rho + h, same) - pair_loss(spec, rho - h, same)) /
           (2.0 * h);
}

double min_kink_distance(const LossSpec& spec, double rho, bool same) {
    const double cap = spec.lambda > 0.0 ? 1.0 / spec.lambda
                                         : std::numeric_limits<double>::infinity();
    double d1, d2;
    if (same) {
        d1 = std::abs(rho - spec.U);
        d2 = std::abs(rho - (spec.U + cap));
    } else {
        d1 = std::abs(rho - spec.L);
        d2 = std::abs(rho - (spec.L - cap));
    }
    return std::min(d1, d2);
}

}  // namespace

TEST_CASE("pair and triplet losses reproduce the hand table") {
    const LossSpec wide(1, 1, 2);
    CHECK(pair_loss(wide, 0.5, true) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pair_loss(wide, 1.5, true) == doctest::Approx(0.5).epsilon(1e-12));

    const LossSpec steep(10, 0, 1);
    CHECK(pair_loss(steep, 0.5, true) == doctest::Approx(1.0).epsilon(1e-12));

    // Slope D/4 with limits (0, 4/D): at D = 4 this is the unit hinge.
    const LossSpec d4(1, 0, 1);
    CHECK(pair_loss(d4, 0.5, false) == doctest::Approx(0.5).epsilon(1e-12));
    const LossSpec d8(2, 0, 0.5);
    CHECK(pair_loss(d8, 0.125, false) == doctest::Approx(0.75).epsilon(1e-12));

    const LossSpec narrow(3, 0.2, 0.8);
    CHECK(pair_loss(narrow, 0.9, false) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(pair_loss(narrow, 0.2, true) == doctest::Approx(0.0).epsilon(1e-12));

    const LossSpec mid(5, 0.1, 0.9);
    CHECK(pair_loss(mid, 0.26, true) == doctest::Approx(0.8).epsilon(1e-12));

    const LossSpec unit(1, 0, 1);
    CHECK(triplet_loss(unit, 0.7, 0.2, 1, 1, 1) == 0.0);
    CHECK(triplet_loss(unit, 0.3, 0.8, 1, 1, 0) == 0.0);
    const LossSpec two(2, 0, 1);
    CHECK(triplet_loss(two, 0.9, 0.5, 0, 0, 1) == doctest::Approx(0.8).epsilon(1e-12));
    const LossSpec four(4, 0, 1);
    CHECK(triplet_loss(four, 1.0, 0.5, 1, 1, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("loss spec validation") {
    CHECK_THROWS_AS(LossSpec(-1, 0, 1), DataError);
    CHECK_THROWS_AS(LossSpec(1, 2, 1), DataError);
    CHECK_THROWS_AS(LossSpec(1, 1, 1), DataError);
}

TEST_CASE("losses stay inside [0, 1]") {
    SplitMix64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        const double u = rng.next_uniform(0, 2);
        const LossSpec spec(rng.next_uniform(0, 20), u, u + rng.next_uniform(0.01, 3));
        const double rho = rng.next_uniform(0, 10);
        const double p = pair_loss(spec, rho, rng.next_u64() & 1);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        const double t = triplet_loss(spec, rho, rng.next_uniform(0, 10), 1, 1, 0);
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
    }
}

TEST_CASE("pair_loss is lambda-Lipschitz in rho") {
    SplitMix64 rng(13);
    for (int i = 0; i < 2000; ++i) {
        const double u = rng.next_uniform(0, 2);
        const LossSpec spec(rng.next_uniform(0, 10), u, u + rng.next_uniform(0.01, 3));
        const double r1 = rng.next_uniform(0, 6);
        const double r2 = rng.next_uniform(0, 6);
        const bool same = rng.next_u64() & 1;
        CHECK(std::abs(pair_loss(spec, r1, same) - pair_loss(spec, r2, same)) <=
              spec.lambda * std::abs(r1 - r2) + 1e-12);
    }
}

TEST_CASE("subgradient on the active, flat and saturated regions") {
    const LossSpec wide(1, 1, 2);
    CHECK(pair_loss_subgradient(wide, 1.5, true) == 1.0);
    CHECK(pair_loss_subgradient(wide, 0.2, true) == 0.0);

    const LossSpec steep(4, 0, 1);
    // Active hinge region for an opposite-class pair is (L - 1/lambda, L).
    CHECK(pair_loss_subgradient(steep, 0.9, false) == -4.0);
    // At rho = 0.5 the loss is already clipped at 1 (flat), slope 0.
    CHECK(pair_loss_subgradient(steep, 0.5, false) == 0.0);
    CHECK(pair_loss(steep, 0.5, false) == 1.0);

    // Kinks return the flat side.
    CHECK(pair_loss_subgradient(wide, 1.0, true) == 0.0);
    CHECK(pair_loss_subgradient(wide, 2.0, true) == 0.0);
    CHECK(pair_loss_subgradient(wide, 2.0, false) == 0.0);
}

TEST_CASE("subgradient matches central differences at smooth points") {
    SplitMix64 rng(101);
    int checked = 0;
    while (checked < 1000) {
        const double u = rng.next_uniform(0, 1.5);
        const LossSpec spec(rng.next_uniform(0.05, 8), u,
                            u + rng.next_uniform(0.05, 2));
        const double rho = rng.next_uniform(1e-3, 5);
        const bool same = rng.next_u64() & 1;
        if (min_kink_distance(spec, rho, same) <= 1e-3) continue;
        ++checked;
        CHECK(std::abs(pair_loss_subgradient(spec, rho, same) -
                       loss_slope_fd(spec, rho, same)) <= 1e-4);
    }
}

TEST_CASE("empirical_distance_error averages the pair losses") {
    const LossSpec spec(1, 0, 1);

    Eigen::MatrixXd diffs(2, 3);
    diffs << 1, 2, 0.5, 0, 0, 0;
    const Metric zero = Metric::zero(2);
    CHECK(empirical_distance_error(zero, PairedSample(diffs, {1, 1, 1}), spec) == 0.0);
    CHECK(empirical_distance_error(zero, PairedSample(diffs, {0, 0, 0}), spec) == 1.0);

    // Hand-set distances 0.5 (same class) and 0.2 (different class).
    Eigen::MatrixXd hand(2, 2);
    hand << std::sqrt(0.5), std::sqrt(0.2), 0, 0;
    CHECK(empirical_distance_error(Metric::identity(2), PairedSample(hand, {1, 0}),
                                   spec) == doctest::Approx(0.65).epsilon(1e-12));

    // Integer weights behave like repetition.
    Eigen::MatrixXd once(1, 2);
    once << 1.0, 0.4;
    Eigen::VectorXd w(2);
    w << 3, 1;
    const PairedSample weighted(once, {1, 0}, w);
    Eigen::MatrixXd expanded(1, 4);
    expanded << 1.0, 1.0, 1.0, 0.4;
    const PairedSample repeated(expanded, {1, 1, 1, 0});
    const Metric id1 = Metric::identity(1);
    CHECK(empirical_distance_error(id1, weighted, spec) ==
          doctest::Approx(empirical_distance_error(id1, repeated, spec))
              .epsilon(1e-12));
}

TEST_CASE("paired sample validation") {
    Eigen::MatrixXd diffs(2, 2);
    diffs.setZero();
    CHECK_THROWS_AS(PairedSample(diffs, {1}), DataError);
    CHECK_THROWS_AS(PairedSample(Eigen::MatrixXd(2, 0), {}), DataError);
    Eigen::VectorXd w(2);
    w << -1, 1;
    CHECK_THROWS_AS(PairedSample(diffs, {1, 0}, w), DataError);
}
