#pragma once

#include "possfuse/bernoulli_gmf.hpp"
#include "possfuse/fusion.hpp"
#include "possfuse/metrics.hpp"
#include "possfuse/simulator.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace possfuse {

/// Invalid or unreadable experiment configuration. The message starts with
/// the offending field path, e.g. "scenario.sensors[1].pd_true: ...".
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FilterConfig {
    // Detection probability known only as an interval.
    std::array<double, 2> detection_interval{0.5, 1.0};
    TransitionPossibilityMatrix transition;
    ReductionConfig reduction;
    BirthConfig birth;
    // The filter assumes max(sensor clutter rate, min_clutter_rate) so that
    // clutter-free scenarios still have a finite clutter ratio.
    double min_clutter_rate = 0.1;

    [[nodiscard]] DetectionPossibility detection() const {
        return probability_interval_to_possibility(detection_interval[0], detection_interval[1]);
    }
    bool operator==(const FilterConfig&) const = default;
};

enum class FusionMode { chernoff, independent, both };

struct FusionConfig {
    FusionMode mode = FusionMode::both;
    OmegaStrategy omega_strategy;

    [[nodiscard]] bool wants_chernoff() const { return mode != FusionMode::independent; }
    [[nodiscard]] bool wants_independent() const { return mode != FusionMode::chernoff; }
    bool operator==(const FusionConfig&) const = default;
};

struct MetricsConfig {
    OspaParams ospa;
    bool trace_position_only = false;

    bool operator==(const MetricsConfig&) const = default;
};

struct ExperimentConfig {
    ScenarioConfig scenario;
    FilterConfig filter;
    FusionConfig fusion;
    MetricsConfig metrics;
    int runs = 200;
    std::uint64_t master_seed = 1;
    std::string output_dir = "out";

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses a JSON experiment document. Missing fields keep their defaults;
/// unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);

ExperimentConfig load_config(const std::string& path);

/// Serializes every field; parse_config(to_json(c)) == c.
std::string to_json(const ExperimentConfig& cfg);

/// Semantic checks beyond syntax (ranges, matrix normalization). Throws
/// ConfigError.
void validate(const ExperimentConfig& cfg);

}  // namespace possfuse
