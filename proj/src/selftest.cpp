#include "possfuse/selftest.hpp"

#include "possfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace possfuse {

namespace {

GaussianMaxMixture random_mixture(std::mt19937_64& eng, int dim) {
    std::uniform_int_distribution<int> count(1, 4);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::uniform_real_distribution<double> loc(-3.0, 3.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    const int n = count(eng);
    std::vector<WeightedComponent> comps;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd m(dim);
        for (int d = 0; d < dim; ++d) m(d) = loc(eng);
        Eigen::MatrixXd A(dim, dim);
        for (int r = 0; r < dim; ++r)
            for (int c = 0; c < dim; ++c) A(r, c) = normal(eng);
        Eigen::MatrixXd P = A * A.transpose() * 0.5 + 0.3 * Eigen::MatrixXd::Identity(dim, dim);
        comps.push_back({weight(eng), GaussianPossibility(m, P)});
    }
    return normalize(GaussianMaxMixture(std::move(comps)));
}

std::vector<Eigen::VectorXd> grid_points(int dim) {
    std::vector<Eigen::VectorXd> pts;
    const int n = dim == 1 ? 401 : 61;
    const double lo = -8.0;
    const double step = 16.0 / (n - 1);
    if (dim == 1) {
        for (int i = 0; i < n; ++i) pts.push_back(Eigen::VectorXd::Constant(1, lo + i * step));
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Eigen::VectorXd x(2);
                x << lo + i * step, lo + j * step;
                pts.push_back(x);
            }
    }
    return pts;
}

}  // namespace

std::vector<SelftestCase> run_fusion_selftest(std::uint64_t seed, int pairs, double tolerance) {
    std::mt19937_64 eng(seed);
    const std::vector<double> omegas{0.1, 0.3, 0.5, 0.7, 0.9};
    SelftestCase chernoff{"chernoff-exactness"};
    SelftestCase independent{"independent-exactness"};
    for (int dim = 1; dim <= 2; ++dim) {
        const auto grid = grid_points(dim);
        for (int p = 0; p < pairs; ++p) {
            const BernoulliPossState a{1.0, 1.0, random_mixture(eng, dim)};
            const BernoulliPossState b{1.0, 1.0, random_mixture(eng, dim)};
            for (const double omega : omegas) {
                const auto fused = fuse_chernoff(a, b, omega);
                for (const auto& x : grid) {
                    const double expect = std::pow(eval_mixture(a.spatial, x), 1.0 - omega) *
                                          std::pow(eval_mixture(b.spatial, x), omega) / fused.alpha;
                    const double err = std::abs(eval_mixture(fused.state.spatial, x) - expect);
                    chernoff.max_abs_error = std::max(chernoff.max_abs_error, err);
                    ++chernoff.checks;
                }
            }
            const auto prod = fuse_independent(a, b);
            for (const auto& x : grid) {
                const double expect =
                    eval_mixture(a.spatial, x) * eval_mixture(b.spatial, x) / prod.alpha;
                const double err = std::abs(eval_mixture(prod.state.spatial, x) - expect);
                independent.max_abs_error = std::max(independent.max_abs_error, err);
                ++independent.checks;
            }
        }
    }
    chernoff.passed = chernoff.max_abs_error <= tolerance;
    independent.passed = independent.max_abs_error <= tolerance;
    return {chernoff, independent};
}

}  // namespace possfuse
