#include "possfuse/bernoulli_gmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace possfuse {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kUnderflow = 1e-300;

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

struct Innovation {
    Eigen::VectorXd predicted_z;
    Eigen::LLT<Eigen::MatrixXd> s_llt;
    Eigen::MatrixXd gain;
    Eigen::MatrixXd posterior_cov;
};

Innovation innovation_for(const GaussianPossibility& g, const MeasurementModel& meas) {
    const Eigen::MatrixXd& H = meas.H;
    const Eigen::MatrixXd& P = g.covariance();
    Eigen::MatrixXd S = H * P * H.transpose() + meas.R;
    S = 0.5 * (S + S.transpose());
    Innovation inn{H * g.mean(), Eigen::LLT<Eigen::MatrixXd>(S), {}, {}};
    if (inn.s_llt.info() != Eigen::Success) {
        throw NumericalError("update: innovation covariance is not positive definite");
    }
    // K = P H^T S^-1
    inn.gain = inn.s_llt.solve(H * P).transpose();
    // Joseph form of P - P H^T S^-1 H P.
    const Eigen::Index n = P.rows();
    const Eigen::MatrixXd I_KH = Eigen::MatrixXd::Identity(n, n) - inn.gain * H;
    Eigen::MatrixXd post = I_KH * P * I_KH.transpose() + inn.gain * meas.R * inn.gain.transpose();
    inn.posterior_cov = 0.5 * (post + post.transpose());
    return inn;
}

double log_likelihood(const Innovation& inn, const Eigen::Vector2d& z) {
    const Eigen::VectorXd d = z - inn.predicted_z;
    const Eigen::VectorXd y = inn.s_llt.matrixL().solve(d);
    return -0.5 * y.squaredNorm();
}

void check_measurement_dim(const MeasurementModel& meas) {
    if (meas.H.rows() != 2) {
        throw InvalidArgument("scans carry 2-D points but H has " +
                              std::to_string(meas.H.rows()) + " rows");
    }
}

}  // namespace

bool satisfies_invariants(const BernoulliPossState& s, double tol) {
    if (!in_unit(s.q_absent) || !in_unit(s.q_present)) return false;
    if (std::abs(std::max(s.q_absent, s.q_present) - 1.0) > tol) return false;
    return s.spatial.is_normalized(tol);
}

void TransitionPossibilityMatrix::validate() const {
    if (!in_unit(tau00) || !in_unit(tau01) || !in_unit(tau10) || !in_unit(tau11)) {
        throw InvalidArgument("transition possibilities must lie in [0, 1]");
    }
    if (std::max(tau00, tau01) != 1.0 || std::max(tau10, tau11) != 1.0) {
        throw InvalidArgument("each row of the transition possibility matrix must have max 1");
    }
}

void DetectionPossibility::validate() const {
    if (!(d_nondetect > 0.0 && d_nondetect <= 1.0 && d_detect > 0.0 && d_detect <= 1.0)) {
        throw InvalidArgument("detection possibilities must lie in (0, 1]");
    }
    if (std::max(d_nondetect, d_detect) != 1.0) {
        throw InvalidArgument("max{d0, d1} must equal 1");
    }
}

MotionModel MotionModel::constant_velocity_2d(double dt, double psd) {
    if (!(dt > 0.0) || !(psd >= 0.0)) {
        throw InvalidArgument("constant_velocity_2d: dt must be > 0 and psd >= 0");
    }
    Eigen::Matrix2d f;
    f << 1.0, dt, 0.0, 1.0;
    Eigen::Matrix2d q;
    q << dt * dt * dt / 3.0, dt * dt / 2.0, dt * dt / 2.0, dt;
    MotionModel m{Eigen::MatrixXd::Zero(4, 4), Eigen::MatrixXd::Zero(4, 4)};
    m.F.block<2, 2>(0, 0) = f;
    m.F.block<2, 2>(2, 2) = f;
    m.Q.block<2, 2>(0, 0) = psd * q;
    m.Q.block<2, 2>(2, 2) = psd * q;
    return m;
}

void MotionModel::validate() const {
    if (F.rows() != F.cols() || Q.rows() != F.rows() || Q.cols() != F.cols()) {
        throw InvalidArgument("MotionModel: F and Q must be square and of equal size");
    }
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
        throw InvalidArgument("MotionModel: Q is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-9 * scale) {
        throw InvalidArgument("MotionModel: Q is not positive semidefinite");
    }
}

MeasurementModel MeasurementModel::position_2d(double noise_var, double clutter_rate,
                                               Region region) {
    MeasurementModel m;
    m.H = Eigen::MatrixXd::Zero(2, 4);
    m.H(0, 0) = 1.0;
    m.H(1, 2) = 1.0;
    m.R = noise_var * Eigen::MatrixXd::Identity(2, 2);
    m.clutter_rate = clutter_rate;
    m.region = region;
    m.validate();
    return m;
}

void MeasurementModel::validate() const {
    if (R.rows() != H.rows() || R.cols() != H.rows()) {
        throw InvalidArgument("MeasurementModel: R must be square with H.rows() rows");
    }
    validated_covariance(R);
    if (!(clutter_rate > 0.0)) {
        throw InvalidArgument("MeasurementModel: clutter_rate must be positive");
    }
    if (!region.valid()) {
        throw InvalidArgument("MeasurementModel: empty region");
    }
}

void ReductionConfig::validate() const {
    if (!(prune_ratio >= 0.0 && prune_ratio < 1.0)) {
        throw InvalidArgument("ReductionConfig: prune_ratio must lie in [0, 1)");
    }
    if (!(merge_mahalanobis > 0.0)) {
        throw InvalidArgument("ReductionConfig: merge_mahalanobis must be positive");
    }
    if (max_components == 0) {
        throw InvalidArgument("ReductionConfig: max_components must be positive");
    }
}

BernoulliPossState make_initial_state(GaussianMaxMixture spatial) {
    return {1.0, 1.0, normalize(spatial)};
}

BernoulliPossState predict(const BernoulliPossState& state, const MotionModel& motion,
                           const TransitionPossibilityMatrix& phi,
                           const GaussianMaxMixture& birth) {
    if (motion.F.cols() != state.spatial.dim() || birth.dim() != state.spatial.dim()) {
        throw InvalidArgument("predict: dimension mismatch");
    }
    const double absent = std::max(phi.tau00 * state.q_absent, phi.tau10 * state.q_present);
    const double present = std::max(phi.tau01 * state.q_absent, phi.tau11 * state.q_present);
    const double norm = std::max(absent, present);

    const double log_birth = safe_log(phi.tau01 * state.q_absent);
    const double log_survive = safe_log(phi.tau11 * state.q_present);

    std::vector<double> log_w;
    std::vector<GaussianPossibility> gaussians;
    log_w.reserve(state.spatial.size() + birth.size());
    gaussians.reserve(state.spatial.size() + birth.size());

    // Both branches share the 1/q1_pred factor, which the final
    // normalization absorbs.
    const bool degenerate = log_birth == kNegInf && log_survive == kNegInf;
    for (const auto& c : state.spatial.components()) {
        const auto& g = c.gaussian;
        Eigen::MatrixXd P = motion.Q + motion.F * g.covariance() * motion.F.transpose();
        gaussians.emplace_back(motion.F * g.mean(), 0.5 * (P + P.transpose()));
        log_w.push_back((degenerate ? 0.0 : log_survive) + std::log(c.weight));
    }
    if (!degenerate) {
        for (const auto& c : birth.components()) {
            gaussians.push_back(c.gaussian);
            log_w.push_back(log_birth + std::log(c.weight));
        }
    }
    return {absent / norm, present / norm,
            GaussianMaxMixture::from_log_weights(log_w, std::move(gaussians), kUnderflow)};
}

double compute_theta(const BernoulliPossState& pred, const Scan& scan,
                     const MeasurementModel& meas, const DetectionPossibility& det) {
    check_measurement_dim(meas);
    double log_theta = std::log(det.d_nondetect);
    if (scan.empty()) return det.d_nondetect;
    const double log_gate = std::log(det.d_detect) + std::log(meas.clutter_ratio());
    for (const auto& c : pred.spatial.components()) {
        const double log_w = std::log(c.weight);
        for (const auto& z : scan.points) {
            const double l = log_sup_linear_gaussian_product(z, meas.H, meas.R, c.gaussian.mean(),
                                                             c.gaussian.covariance());
            log_theta = std::max(log_theta, log_gate + l + log_w);
        }
    }
    return std::exp(log_theta);
}

BernoulliPossState update(const BernoulliPossState& pred, const Scan& scan,
                          const MeasurementModel& meas, const DetectionPossibility& det) {
    check_measurement_dim(meas);
    const auto& comps = pred.spatial.components();
    const std::size_t n = comps.size();

    std::vector<double> log_w;
    std::vector<GaussianPossibility> gaussians;
    log_w.reserve(n * (scan.size() + 1));
    gaussians.reserve(n * (scan.size() + 1));

    const double log_d0 = std::log(det.d_nondetect);
    for (const auto& c : comps) {
        log_w.push_back(log_d0 + std::log(c.weight));
        gaussians.push_back(c.gaussian);
    }

    double log_theta = log_d0;
    if (!scan.empty()) {
        std::vector<Innovation> innovations;
        innovations.reserve(n);
        for (const auto& c : comps) innovations.push_back(innovation_for(c.gaussian, meas));

        const double log_gate = std::log(det.d_detect) + std::log(meas.clutter_ratio());
        for (const auto& z : scan.points) {
            for (std::size_t i = 0; i < n; ++i) {
                const auto& inn = innovations[i];
                const double lw = log_gate + std::log(comps[i].weight) + log_likelihood(inn, z);
                log_theta = std::max(log_theta, lw);
                log_w.push_back(lw);
                gaussians.emplace_back(comps[i].gaussian.mean() + inn.gain * (z - inn.predicted_z),
                                       inn.posterior_cov);
            }
        }
    }

    const double theta = std::exp(log_theta);
    if (!std::isfinite(theta) || !(theta > 0.0)) {
        throw NumericalError("update: non-finite theta");
    }
    for (auto& lw : log_w) lw -= log_theta;

    const double present = theta * pred.q_present;
    const double denom = std::max(pred.q_absent, present);
    return {pred.q_absent / denom, present / denom,
            GaussianMaxMixture::from_log_weights(log_w, std::move(gaussians), kUnderflow)};
}

GaussianMaxMixture reduce(const GaussianMaxMixture& m, const ReductionConfig& cfg) {
    const auto& comps = m.components();
    const double top = supremum(m);

    std::vector<std::size_t> order;
    order.reserve(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (comps[i].weight >= cfg.prune_ratio * top) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return comps[a].weight > comps[b].weight;
    });

    const double gate = cfg.merge_mahalanobis * cfg.merge_mahalanobis;
    std::vector<bool> used(comps.size(), false);
    std::vector<WeightedComponent> out;
    for (std::size_t oi = 0; oi < order.size() && out.size() < cfg.max_components; ++oi) {
        const std::size_t lead = order[oi];
        if (used[lead]) continue;
        used[lead] = true;
        const auto& head = comps[lead].gaussian;

        std::vector<std::size_t> cluster{lead};
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (used[j]) continue;
            if (head.mahalanobis_sq(comps[j].gaussian.mean()) <= gate) {
                used[j] = true;
                cluster.push_back(j);
            }
        }
        if (cluster.size() == 1) {
            out.push_back(comps[lead]);
            continue;
        }

        double wsum = 0.0;
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(head.dim());
        for (const auto j : cluster) {
            wsum += comps[j].weight;
            mean += comps[j].weight * comps[j].gaussian.mean();
        }
        mean /= wsum;
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(head.dim(), head.dim());
        for (const auto j : cluster) {
            const Eigen::VectorXd d = comps[j].gaussian.mean() - mean;
            cov += comps[j].weight * (comps[j].gaussian.covariance() + d * d.transpose());
        }
        cov /= wsum;
        out.push_back({comps[lead].weight,
                       GaussianPossibility(mean, 0.5 * (cov + cov.transpose()))});
    }
    return normalize(GaussianMaxMixture(std::move(out)));
}

std::optional<Estimate> extract(const BernoulliPossState& state) {
    if (!(state.q_present > state.q_absent)) return std::nullopt;
    const auto& top = state.spatial[state.spatial.argmax()].gaussian;
    return Estimate{top.mean(), top.covariance()};
}

DetectionPossibility probability_interval_to_possibility(double lo, double hi) {
    if (!(lo >= 0.0 && lo <= hi && hi <= 1.0)) {
        throw InvalidArgument("probability interval must satisfy 0 <= lo <= hi <= 1");
    }
    if (hi == 0.0 || lo == 1.0) {
        throw InvalidArgument("probability interval pins detection to certainty; "
                              "one of the possibilities would be zero");
    }
    const double d1 = hi;
    const double d0 = 1.0 - lo;
    const double top = std::max(d0, d1);
    return {d0 / top, d1 / top};
}

}  // namespace possfuse
