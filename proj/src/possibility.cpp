#include "possfuse/possibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace possfuse {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kConditionFloor = 1e-9;

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
    if (a != b) {
        throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                              " vs " + std::to_string(b) + ")");
    }
}

// -1/2 d^T S^-1 d for SPD S, via Cholesky.
double log_gaussian_at(const Eigen::VectorXd& d, const Eigen::MatrixXd& S) {
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("innovation covariance is not positive definite");
    }
    const Eigen::VectorXd y = llt.matrixL().solve(d);
    return -0.5 * y.squaredNorm();
}

}  // namespace

Eigen::MatrixXd validated_covariance(const Eigen::MatrixXd& covariance) {
    if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
        throw InvalidArgument("covariance must be a nonempty square matrix");
    }
    if (!covariance.allFinite()) {
        throw InvalidArgument("covariance has non-finite entries");
    }
    const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
    if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
        throw InvalidArgument("covariance is not symmetric");
    }
    Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0.0) || lo <= -kConditionFloor * hi) {
        throw InvalidArgument("covariance is not positive definite");
    }
    if (lo < kConditionFloor * hi) {
        const double n = static_cast<double>(sym.rows());
        sym.diagonal().array() += kConditionFloor * sym.trace() / n;
    }
    return sym;
}

Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("matrix is not positive definite");
    }
    Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    return 0.5 * (inv + inv.transpose());
}

// ---- GaussianPossibility ----

GaussianPossibility::GaussianPossibility(Eigen::VectorXd mean, Eigen::MatrixXd covariance)
    : mean_(std::move(mean)) {
    require_same_dim(mean_.size(), covariance.rows(), "GaussianPossibility");
    if (!mean_.allFinite()) {
        throw InvalidArgument("GaussianPossibility: non-finite mean");
    }
    covariance_ = validated_covariance(covariance);
    precision_ = spd_inverse(covariance_);
}

double GaussianPossibility::mahalanobis_sq(const Eigen::VectorXd& x) const {
    require_same_dim(x.size(), dim(), "eval_gaussian");
    const Eigen::VectorXd d = x - mean_;
    return std::max(0.0, d.dot(precision_ * d));
}

double GaussianPossibility::log_eval(const Eigen::VectorXd& x) const {
    return -0.5 * mahalanobis_sq(x);
}

// ---- GaussianMaxMixture ----

GaussianMaxMixture::GaussianMaxMixture(std::vector<WeightedComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) {
        throw InvalidArgument("GaussianMaxMixture: empty component list");
    }
    const Eigen::Index d = components_.front().gaussian.dim();
    for (const auto& c : components_) {
        require_same_dim(c.gaussian.dim(), d, "GaussianMaxMixture");
        if (!(c.weight > 0.0 && c.weight <= 1.0)) {
            throw InvalidArgument("GaussianMaxMixture: weight outside (0, 1]");
        }
    }
}

GaussianMaxMixture GaussianMaxMixture::from_log_weights(const std::vector<double>& log_weights,
                                                        std::vector<GaussianPossibility> gaussians,
                                                        double min_weight) {
    if (log_weights.size() != gaussians.size()) {
        throw InvalidArgument("from_log_weights: size mismatch");
    }
    if (log_weights.empty()) {
        throw InvalidArgument("from_log_weights: empty component list");
    }
    const double top = *std::max_element(log_weights.begin(), log_weights.end());
    if (!std::isfinite(top)) {
        throw NumericalError("from_log_weights: non-finite maximal log-weight");
    }
    const double floor = std::log(min_weight);
    std::vector<WeightedComponent> out;
    out.reserve(gaussians.size());
    for (std::size_t i = 0; i < gaussians.size(); ++i) {
        const double rel = log_weights[i] - top;
        if (std::isnan(rel)) {
            throw NumericalError("from_log_weights: NaN log-weight");
        }
        if (rel < floor) continue;
        out.push_back({std::exp(rel), std::move(gaussians[i])});
    }
    return GaussianMaxMixture(std::move(out));
}

std::size_t GaussianMaxMixture::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < components_.size(); ++i) {
        if (components_[i].weight > components_[best].weight) best = i;
    }
    return best;
}

bool GaussianMaxMixture::is_normalized(double tol) const {
    return std::abs(components_[argmax()].weight - 1.0) <= tol;
}

// ---- free operations ----

double eval_gaussian(const GaussianPossibility& g, const Eigen::VectorXd& x) {
    return std::exp(g.log_eval(x));
}

double eval_mixture(const GaussianMaxMixture& m, const Eigen::VectorXd& x) {
    double best = 0.0;
    for (const auto& c : m.components()) {
        best = std::max(best, c.weight * eval_gaussian(c.gaussian, x));
    }
    return best;
}

double supremum(const GaussianMaxMixture& m) {
    return m[m.argmax()].weight;
}

GaussianMaxMixture normalize(const GaussianMaxMixture& m) {
    const double sup = supremum(m);
    std::vector<WeightedComponent> out = m.components();
    for (auto& c : out) c.weight /= sup;
    return GaussianMaxMixture(std::move(out));
}

GaussianMaxMixture mixture_power(const GaussianMaxMixture& m, double a) {
    if (!(a > 0.0 && a <= 1.0)) {
        throw InvalidArgument("mixture_power: exponent must lie in (0, 1]");
    }
    if (a == 1.0) return m;
    std::vector<WeightedComponent> out;
    out.reserve(m.size());
    for (const auto& c : m.components()) {
        out.push_back({std::exp(a * std::log(c.weight)),
                       GaussianPossibility(c.gaussian.mean(), c.gaussian.covariance() / a)});
    }
    return GaussianMaxMixture(std::move(out));
}

LogWeightedGaussian chernoff_component_log_fusion(const WeightedComponent& c1,
                                                  const WeightedComponent& c2, double omega) {
    if (!(omega > 0.0 && omega < 1.0)) {
        throw InvalidArgument("chernoff_component_fusion: omega must lie in (0, 1)");
    }
    const auto& g1 = c1.gaussian;
    const auto& g2 = c2.gaussian;
    require_same_dim(g1.dim(), g2.dim(), "chernoff_component_fusion");

    const double a = 1.0 - omega;
    const Eigen::MatrixXd info = a * g1.precision() + omega * g2.precision();
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("chernoff_component_fusion: singular fused precision");
    }
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    const Eigen::VectorXd mean =
        llt.solve(a * (g1.precision() * g1.mean()) + omega * (g2.precision() * g2.mean()));

    const Eigen::MatrixXd spread = g1.covariance() / a + g2.covariance() / omega;
    const double log_w = a * std::log(c1.weight) + omega * std::log(c2.weight) +
                         log_gaussian_at(g1.mean() - g2.mean(), spread);
    return {log_w, GaussianPossibility(mean, 0.5 * (cov + cov.transpose()))};
}

LogWeightedGaussian independent_component_log_fusion(const WeightedComponent& c1,
                                                     const WeightedComponent& c2) {
    const auto& g1 = c1.gaussian;
    const auto& g2 = c2.gaussian;
    require_same_dim(g1.dim(), g2.dim(), "independent_component_fusion");

    const Eigen::MatrixXd info = g1.precision() + g2.precision();
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("independent_component_fusion: singular fused precision");
    }
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));
    const Eigen::VectorXd mean = llt.solve(g1.precision() * g1.mean() + g2.precision() * g2.mean());

    const double log_w = std::log(c1.weight) + std::log(c2.weight) +
                         log_gaussian_at(g1.mean() - g2.mean(), g1.covariance() + g2.covariance());
    return {log_w, GaussianPossibility(mean, 0.5 * (cov + cov.transpose()))};
}

WeightedComponent chernoff_component_fusion(const WeightedComponent& c1,
                                            const WeightedComponent& c2, double omega) {
    auto f = chernoff_component_log_fusion(c1, c2, omega);
    return {std::exp(f.log_weight), std::move(f.gaussian)};
}

WeightedComponent independent_component_fusion(const WeightedComponent& c1,
                                               const WeightedComponent& c2) {
    auto f = independent_component_log_fusion(c1, c2);
    return {std::exp(f.log_weight), std::move(f.gaussian)};
}

double log_sup_linear_gaussian_product(const Eigen::VectorXd& z, const Eigen::MatrixXd& H,
                                       const Eigen::MatrixXd& R, const Eigen::VectorXd& m,
                                       const Eigen::MatrixXd& P) {
    if (H.cols() != m.size() || H.rows() != z.size() || R.rows() != z.size() ||
        R.cols() != z.size() || P.rows() != m.size() || P.cols() != m.size()) {
        throw InvalidArgument("sup_linear_gaussian_product: dimension mismatch");
    }
    const Eigen::MatrixXd S = H * P * H.transpose() + R;
    return log_gaussian_at(z - H * m, 0.5 * (S + S.transpose()));
}

double sup_linear_gaussian_product(const Eigen::VectorXd& z, const Eigen::MatrixXd& H,
                                   const Eigen::MatrixXd& R, const Eigen::VectorXd& m,
                                   const Eigen::MatrixXd& P) {
    return std::exp(log_sup_linear_gaussian_product(z, H, R, m, P));
}

}  // namespace possfuse
