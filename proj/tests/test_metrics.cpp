#include "possfuse/metrics.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace possfuse;
using namespace possfuse::testing;

namespace {

std::vector<Eigen::VectorXd> random_set(std::mt19937_64& eng, std::size_t n, Eigen::Index dim, double span) {
    std::vector<Eigen::VectorXd> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(random_vector(eng, dim, span));
    return s;
}

Estimate estimate_at(double x, double y, double var) {
    Eigen::VectorXd m(4);
    m << x, 0.0, y, 0.0;
    return {m, var * Eigen::MatrixXd::Identity(4, 4)};
}

/// Single-series record with one estimate (or none) per step.
RunRecord record(const std::vector<std::optional<Eigen::Vector2d>>& truth,
                 const std::vector<std::optional<Estimate>>& est) {
    RunRecord r;
    r.truth = truth;
    r.series_names = {"f"};
    r.series.emplace_back();
    for (const auto& e : est) r.series[0].push_back(SeriesStep{e, e ? 0.1 : 1.0, e ? 1.0 : 0.1, 3});
    return r;
}

}  // namespace

TEST_CASE("ospa examples") {
    const std::vector<Eigen::VectorXd> none;
    CHECK(ospa(none, none, 10.0, 1.0) == 0.0);
    CHECK(ospa({vec1(4)}, none, 10.0, 1.0) == 10.0);
    CHECK(ospa(none, {vec1(4)}, 10.0, 2.0) == 10.0);
    CHECK(ospa({vec1(0)}, {vec1(3)}, 10.0, 1.0) == 3.0);
    CHECK(ospa({vec1(0)}, {vec1(30)}, 10.0, 1.0) == 10.0);
    // One matched at distance 3, one unmatched: (3 + 10) / 2.
    CHECK(ospa({vec1(0)}, {vec1(3), vec1(50)}, 10.0, 1.0) == 6.5);
    CHECK_THROWS_AS(ospa(none, none, 0.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(ospa(none, none, 10.0, 0.5), InvalidArgument);
}

TEST_CASE("ospa properties") {
    std::mt19937_64 eng(101);
    std::uniform_int_distribution<std::size_t> size(0, 5);
    for (int t = 0; t < 200; ++t) {
        const auto X = random_set(eng, size(eng), 2, 12.0);
        const auto Y = random_set(eng, size(eng), 2, 12.0);
        const double p = 1.0 + t % 3;
        const double d = ospa(X, Y, 10.0, p);
        // Equal-size sets swap the summation order, so symmetry holds to rounding.
        CHECK(d == doctest::Approx(ospa(Y, X, 10.0, p)).epsilon(1e-14));
        CHECK(d >= 0.0);
        CHECK(d <= 10.0 + 1e-12);
        CHECK(ospa(X, X, 10.0, p) == 0.0);
    }
    for (int t = 0; t < 50; ++t) {
        const auto x = random_vector(eng, 2, 15.0);
        const auto y = random_vector(eng, 2, 15.0);
        CHECK(ospa({x}, {y}, 10.0, 1.0) == doctest::Approx(std::min(10.0, (x - y).norm())).epsilon(1e-14));
    }
}

TEST_CASE("ospa agrees with exhaustive permutation search") {
    std::mt19937_64 eng(103);
    std::uniform_int_distribution<std::size_t> size(0, 4);
    for (int t = 0; t < 300; ++t) {
        const auto X = random_set(eng, size(eng), 2, 8.0);
        const auto Y = random_set(eng, size(eng), 2, 8.0);
        const double p = t % 2 ? 1.0 : 2.0;
        CHECK(ospa(X, Y, 10.0, p) == doctest::Approx(ospa_bruteforce(X, Y, 10.0, p)).epsilon(1e-14));
    }
}

TEST_CASE("min_assignment_cost agrees with exhaustive search up to 8 columns") {
    std::mt19937_64 eng(107);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int t = 0; t < 60; ++t) {
        const int n = 1 + t % 8;
        const int m = 1 + (t / 8) % n;
        Eigen::MatrixXd cost(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) cost(i, j) = u(eng);
        CHECK(min_assignment_cost(cost) == doctest::Approx(permutation_min_cost(cost)).epsilon(1e-14));
    }
    CHECK(min_assignment_cost(Eigen::MatrixXd(0, 3)) == 0.0);
    CHECK_THROWS_AS(min_assignment_cost(Eigen::MatrixXd::Zero(3, 2)), InvalidArgument);
    CHECK_THROWS_AS(min_assignment_cost(Eigen::MatrixXd::Zero(1, 17)), InvalidArgument);
}

TEST_CASE("covariance_trace") {
    CHECK(covariance_trace(Estimate{Eigen::VectorXd::Zero(4), Eigen::MatrixXd::Identity(4, 4)}) == 4.0);
    Eigen::VectorXd diag(4);
    diag << 1, 2, 3, 4;
    const Estimate e{Eigen::VectorXd::Zero(4), diag.asDiagonal().toDenseMatrix()};
    CHECK(covariance_trace(e) == 10.0);
    CHECK(covariance_trace(e, true) == 4.0);
    CHECK_THROWS_AS(covariance_trace(std::nullopt), InvalidArgument);
}

TEST_CASE("aggregate of one record is that record") {
    const std::vector<std::optional<Eigen::Vector2d>> truth{std::nullopt, Eigen::Vector2d(1, 1),
                                                            Eigen::Vector2d(2, 2)};
    const auto r = record(truth, {estimate_at(5, 5, 1.0), std::nullopt, estimate_at(2, 5, 2.0)});
    const auto agg = aggregate({r}, OspaParams{});
    CHECK(agg.runs == 1);
    CHECK(agg.steps == 3);
    const auto& s = agg.at("f");
    CHECK(s.mean_ospa == std::vector<double>{10.0, 10.0, 3.0});
    CHECK(s.mean_trace[0] == 4.0);
    CHECK(std::isnan(s.mean_trace[1]));
    CHECK(s.mean_trace[2] == 8.0);
    CHECK(s.present_count == std::vector<std::size_t>{1, 0, 1});
    CHECK(s.mean_q_absent == std::vector<double>{0.1, 1.0, 0.1});
    CHECK(s.mean_components == std::vector<double>{3.0, 3.0, 3.0});
    CHECK_THROWS_AS(static_cast<void>(agg.at("missing")), InvalidArgument);
}

TEST_CASE("aggregate of two records is the per-step mean") {
    const std::vector<std::optional<Eigen::Vector2d>> truth{Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 0)};
    const auto a = record(truth, {estimate_at(1, 0, 1.0), estimate_at(0, 4, 1.0)});
    const auto b = record(truth, {estimate_at(3, 0, 3.0), std::nullopt});
    const auto s = aggregate({a, b}, OspaParams{}).at("f");
    CHECK(s.mean_ospa[0] == 2.0);
    CHECK(s.mean_ospa[1] == 7.0);
    CHECK(s.mean_trace[0] == 8.0);
    CHECK(s.mean_trace[1] == 4.0);
    CHECK(s.present_count[1] == 1);
}

TEST_CASE("aggregate matches a brute-force recomputation and is order-invariant") {
    std::mt19937_64 eng(109);
    std::bernoulli_distribution coin(0.7);
    std::vector<RunRecord> records;
    for (int r = 0; r < 30; ++r) {
        std::vector<std::optional<Eigen::Vector2d>> truth;
        std::vector<std::optional<Estimate>> est;
        for (int k = 0; k < 6; ++k) {
            truth.push_back(coin(eng) ? std::optional<Eigen::Vector2d>(random_vector(eng, 2, 20.0))
                                      : std::nullopt);
            if (coin(eng)) {
                const auto v = random_vector(eng, 2, 20.0);
                est.push_back(estimate_at(v(0), v(1), 1.0 + r));
            } else {
                est.push_back(std::nullopt);
            }
        }
        records.push_back(record(truth, est));
    }
    const auto agg = aggregate(records, OspaParams{});
    for (std::size_t k = 0; k < 6; ++k) {
        double acc = 0.0;
        for (const auto& r : records) {
            std::vector<Eigen::VectorXd> X;
            std::vector<Eigen::VectorXd> Y;
            if (r.truth[k]) X.emplace_back(*r.truth[k]);
            if (r.series[0][k].estimate) Y.emplace_back(r.series[0][k].estimate->position());
            acc += ospa_bruteforce(X, Y, 10.0, 1.0);
        }
        CHECK(agg.at("f").mean_ospa[k] == doctest::Approx(acc / 30.0).epsilon(1e-13));
    }

    auto shuffled = records;
    std::shuffle(shuffled.begin(), shuffled.end(), eng);
    const auto again = aggregate(shuffled, OspaParams{});
    for (std::size_t k = 0; k < 6; ++k) {
        CHECK(again.at("f").mean_ospa[k] == doctest::Approx(agg.at("f").mean_ospa[k]).epsilon(1e-13));
        CHECK(again.at("f").present_count[k] == agg.at("f").present_count[k]);
    }
}

TEST_CASE("aggregate rejects inconsistent input") {
    CHECK_THROWS_AS(aggregate({}, OspaParams{}), InvalidArgument);
    const auto a = record({std::nullopt}, {std::nullopt});
    const auto b = record({std::nullopt, std::nullopt}, {std::nullopt, std::nullopt});
    CHECK_THROWS_AS(aggregate({a, b}, OspaParams{}), InvalidArgument);
}

TEST_CASE("window_mean") {
    const std::vector<double> v{1, 2, 3, 4, 5};
    CHECK(window_mean(v, 1, 5) == 3.0);
    CHECK(window_mean(v, 2, 3) == 2.5);
    CHECK_THROWS_AS(window_mean(v, 0, 3), InvalidArgument);
    CHECK_THROWS_AS(window_mean(v, 3, 6), InvalidArgument);
}
