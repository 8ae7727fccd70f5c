#pragma once

#include "possfuse/bernoulli_gmf.hpp"
#include "possfuse/possibility.hpp"
#include "possfuse/scan.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace possfuse {

struct SensorConfig {
    double pd_true = 0.8;
    double noise_var = 2.0;    // km^2, per axis
    double clutter_rate = 4.0; // mean false alarms per scan
    int seed_stream = 0;       // sensors sharing a stream see identical data

    bool operator==(const SensorConfig&) const = default;
};

struct ScenarioConfig {
    Region region;
    int steps = 50;
    double dt = 2.0;   // s
    double psd = 1e-5; // process noise level
    std::array<double, 4> initial_state{10.0, 0.3, 55.0, -0.35};
    int birth_step = 1;
    int death_step = 50;
    std::vector<SensorConfig> sensors{SensorConfig{0.8, 2.0, 4.0, 0}, SensorConfig{0.6, 2.0, 4.0, 1}};
    // Probabilistic birth/survival of the reference scenario. The
    // possibilistic filter is driven by the transition matrix instead.
    double p_birth = 0.05;
    double p_survive = 0.99;

    void validate() const;
    [[nodiscard]] MotionModel motion() const { return MotionModel::constant_velocity_2d(dt, psd); }
    bool operator==(const ScenarioConfig&) const = default;
};

struct BirthConfig {
    double position_var_margin = 1.0; // birth position variance = noise_var + margin
    double velocity_var = 0.25;       // (km/s)^2

    bool operator==(const BirthConfig&) const = default;
};

/// Per-step truth; empty while the target does not exist. Index k-1 holds
/// step k.
using Trajectory = std::vector<std::optional<Eigen::VectorXd>>;

/// Deterministic 64-bit seed derived from a parent seed and a label.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label);

Trajectory generate_truth(const ScenarioConfig& cfg, std::uint64_t seed);

/// One scan per step. Detections are Hx plus N(0, noise_var I) noise with
/// probability pd_true; clutter is Poisson(clutter_rate) in count and
/// uniform over `region`. Point order is shuffled.
std::vector<Scan> generate_measurements(const Trajectory& truth, const SensorConfig& sensor,
                                        const Region& region, std::uint64_t seed);

/// Measurement-driven birth: a weight-1 component at [zx, 0, zy, 0] per
/// point of the previous scan, or a single region-covering component when
/// that scan is empty.
GaussianMaxMixture build_birth_mixture(const Scan& previous_scan, const BirthConfig& birth,
                                       double noise_var, const Region& region);

/// Region-covering component used for the empty-scan birth fallback and the
/// initial spatial prior.
GaussianMaxMixture region_prior(const Region& region, double velocity_var);

}  // namespace possfuse
