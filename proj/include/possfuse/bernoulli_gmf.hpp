#pragma once

#include "possfuse/possibility.hpp"
#include "possfuse/scan.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace possfuse {

/// Possibilistic Bernoulli state: absence/presence possibilities and the
/// spatial possibility of the target state [x, vx, y, vy].
/// Valid states have max{q_absent, q_present} = 1 and a normalized mixture.
struct BernoulliPossState {
    double q_absent = 1.0;
    double q_present = 1.0;
    GaussianMaxMixture spatial;
};

bool satisfies_invariants(const BernoulliPossState& s, double tol = 1e-12);

/// Row-max-normalized 2x2 presence transition matrix; tau_ij is the
/// possibility of moving from presence i to presence j.
struct TransitionPossibilityMatrix {
    double tau00 = 1.0;
    double tau01 = 0.01;
    double tau10 = 0.01;
    double tau11 = 1.0;

    void validate() const;
    bool operator==(const TransitionPossibilityMatrix&) const = default;
};

struct DetectionPossibility {
    double d_nondetect = 0.5;
    double d_detect = 1.0;

    void validate() const;
};

struct MotionModel {
    Eigen::MatrixXd F;
    Eigen::MatrixXd Q;

    /// Nearly-constant-velocity model on [x, vx, y, vy] with white
    /// acceleration of spectral density `psd`.
    static MotionModel constant_velocity_2d(double dt, double psd);

    void validate() const;
};

struct MeasurementModel {
    Eigen::MatrixXd H;
    Eigen::MatrixXd R;
    double clutter_rate = 4.0;
    Region region;

    /// Position-only observation of [x, vx, y, vy] with R = noise_var * I.
    static MeasurementModel position_2d(double noise_var, double clutter_rate, Region region);

    /// 1 / (lambda c(z)) with c uniform over the region.
    [[nodiscard]] double clutter_ratio() const { return region.area() / clutter_rate; }

    void validate() const;
};

struct ReductionConfig {
    double prune_ratio = 1e-3;
    double merge_mahalanobis = 2.0;
    std::size_t max_components = 100;

    void validate() const;
    bool operator==(const ReductionConfig&) const = default;
};

struct Estimate {
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;

    [[nodiscard]] Eigen::Vector2d position() const { return {mean(0), mean(2)}; }
};

/// Total ignorance about presence with the given spatial prior.
BernoulliPossState make_initial_state(GaussianMaxMixture spatial);

BernoulliPossState predict(const BernoulliPossState& state, const MotionModel& motion,
                           const TransitionPossibilityMatrix& phi,
                           const GaussianMaxMixture& birth);

/// Normalizer of the measurement update,
/// theta = max{d0, d1 max_z [ max_i w_i N(z; H m_i, S_i) / (lambda c(z)) ]}.
double compute_theta(const BernoulliPossState& pred, const Scan& scan,
                     const MeasurementModel& meas, const DetectionPossibility& det);

/// Measurement update. The posterior mixture holds the non-detection copies
/// of all predicted components first, then one detection component per
/// (measurement, component) pair in scan order.
BernoulliPossState update(const BernoulliPossState& pred, const Scan& scan,
                          const MeasurementModel& meas, const DetectionPossibility& det);

/// Prune, merge and cap. The heaviest component always survives with
/// weight 1.
GaussianMaxMixture reduce(const GaussianMaxMixture& m, const ReductionConfig& cfg);

/// Top-component estimate when presence is strictly more possible than
/// absence; empty otherwise.
std::optional<Estimate> extract(const BernoulliPossState& state);

/// Maps a detection probability known only to lie in [lo, hi] to binary
/// possibilities d1 = hi, d0 = 1 - lo, rescaled so the larger one is 1.
DetectionPossibility probability_interval_to_possibility(double lo, double hi);

}  // namespace possfuse
