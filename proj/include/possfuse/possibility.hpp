#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace possfuse {

/// Thrown when inputs violate a structural precondition (dimensions, ranges,
/// non positive-definite covariances).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a computation runs into an ill-conditioned or non-finite result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Gaussian-shaped possibility function exp(-1/2 (x-m)^T P^-1 (x-m)).
/// Unlike a density there is no normalizing prefactor: the value at the mean
/// is exactly 1.
///
/// Construction validates the covariance: it must be symmetric (relative
/// tolerance 1e-9) and positive definite. If the smallest eigenvalue falls
/// below 1e-9 of the largest, a diagonal jitter of 1e-9 * trace / n is added.
class GaussianPossibility {
public:
    GaussianPossibility(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

    [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
    [[nodiscard]] const Eigen::MatrixXd& covariance() const { return covariance_; }
    [[nodiscard]] const Eigen::MatrixXd& precision() const { return precision_; }
    [[nodiscard]] Eigen::Index dim() const { return mean_.size(); }

    /// Squared Mahalanobis distance (x-m)^T P^-1 (x-m).
    [[nodiscard]] double mahalanobis_sq(const Eigen::VectorXd& x) const;

    /// log of the possibility value, i.e. -1/2 mahalanobis_sq(x).
    [[nodiscard]] double log_eval(const Eigen::VectorXd& x) const;

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd covariance_;
    Eigen::MatrixXd precision_;
};

struct WeightedComponent {
    double weight = 1.0;
    GaussianPossibility gaussian;
};

/// Pointwise maximum of weighted Gaussian possibility functions.
/// Components are nonempty, share one dimension, and have weights in (0, 1].
class GaussianMaxMixture {
public:
    explicit GaussianMaxMixture(std::vector<WeightedComponent> components);

    /// Builds a normalized mixture from log-weights: each weight becomes
    /// exp(lw - max lw), so the heaviest component has weight exactly 1.
    /// Components whose relative weight underflows below `min_weight` are
    /// dropped.
    static GaussianMaxMixture from_log_weights(const std::vector<double>& log_weights,
                                               std::vector<GaussianPossibility> gaussians,
                                               double min_weight = 1e-300);

    [[nodiscard]] const std::vector<WeightedComponent>& components() const { return components_; }
    [[nodiscard]] std::size_t size() const { return components_.size(); }
    [[nodiscard]] Eigen::Index dim() const { return components_.front().gaussian.dim(); }
    [[nodiscard]] const WeightedComponent& operator[](std::size_t i) const { return components_[i]; }

    /// Index of the first component carrying the maximal weight.
    [[nodiscard]] std::size_t argmax() const;

    /// True when the maximal weight equals 1 within `tol`.
    [[nodiscard]] bool is_normalized(double tol = 1e-12) const;

private:
    std::vector<WeightedComponent> components_;
};

/// Jitter-aware validation shared by every covariance entering the library.
/// Returns the (symmetrized, possibly jittered) matrix or throws InvalidArgument.
Eigen::MatrixXd validated_covariance(const Eigen::MatrixXd& covariance);

/// Inverse of a symmetric positive-definite matrix via Cholesky.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m);

double eval_gaussian(const GaussianPossibility& g, const Eigen::VectorXd& x);

double eval_mixture(const GaussianMaxMixture& m, const Eigen::VectorXd& x);

/// Exact supremum over x of eval_mixture: the largest component weight.
double supremum(const GaussianMaxMixture& m);

GaussianMaxMixture normalize(const GaussianMaxMixture& m);

/// Pointwise power of a mixture. (w, m, P) maps to (w^a, m, P/a), which is
/// exact because t -> t^a is monotone and commutes with max.
GaussianMaxMixture mixture_power(const GaussianMaxMixture& m, double a);

/// Fused component with its weight kept in log scale; the public component
/// fusion routines are thin wrappers around these.
struct LogWeightedGaussian {
    double log_weight;
    GaussianPossibility gaussian;
};

LogWeightedGaussian chernoff_component_log_fusion(const WeightedComponent& c1,
                                                  const WeightedComponent& c2, double omega);
LogWeightedGaussian independent_component_log_fusion(const WeightedComponent& c1,
                                                     const WeightedComponent& c2);

/// (w1 N1(x))^(1-omega) (w2 N2(x))^omega written as a single weighted
/// Gaussian possibility. omega must lie strictly inside (0, 1).
WeightedComponent chernoff_component_fusion(const WeightedComponent& c1,
                                            const WeightedComponent& c2, double omega);

/// w1 N1(x) w2 N2(x) written as a single weighted Gaussian possibility.
WeightedComponent independent_component_fusion(const WeightedComponent& c1,
                                               const WeightedComponent& c2);

/// sup_x N(z; Hx, R) N(x; m, P) = N(z; Hm, HPH^T + R).
double sup_linear_gaussian_product(const Eigen::VectorXd& z, const Eigen::MatrixXd& H,
                                   const Eigen::MatrixXd& R, const Eigen::VectorXd& m,
                                   const Eigen::MatrixXd& P);

/// log of sup_linear_gaussian_product.
double log_sup_linear_gaussian_product(const Eigen::VectorXd& z, const Eigen::MatrixXd& H,
                                       const Eigen::MatrixXd& R, const Eigen::VectorXd& m,
                                       const Eigen::MatrixXd& P);

}  // namespace possfuse
