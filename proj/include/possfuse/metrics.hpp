#pragma once

#include "possfuse/bernoulli_gmf.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace possfuse {

struct OspaParams {
    double cutoff = 10.0; // km
    double order = 1.0;

    bool operator==(const OspaParams&) const = default;
};

/// Minimum total cost of assigning every row of `cost` to a distinct column.
/// Requires rows <= cols <= 16; solved exactly by dynamic programming over
/// column subsets.
double min_assignment_cost(const Eigen::MatrixXd& cost);

/// OSPA distance between two finite point sets. Both sets empty gives 0.
double ospa(const std::vector<Eigen::VectorXd>& X, const std::vector<Eigen::VectorXd>& Y,
            double cutoff, double order);

double ospa(const std::vector<Eigen::VectorXd>& X, const std::vector<Eigen::VectorXd>& Y,
            const OspaParams& params);

/// Trace of the estimate covariance; `position_only` restricts it to the
/// x and y diagonal entries of the [x, vx, y, vy] state.
double covariance_trace(const std::optional<Estimate>& estimate, bool position_only = false);

struct SeriesStep {
    std::optional<Estimate> estimate;
    double q_absent = 1.0;
    double q_present = 1.0;
    std::size_t components = 0;
};

/// Everything one Monte Carlo run produced: the truth positions and one
/// track per named filter or fuser.
struct RunRecord {
    std::vector<std::optional<Eigen::Vector2d>> truth;
    std::vector<std::string> series_names;
    std::vector<std::vector<SeriesStep>> series;
};

struct SeriesSummary {
    std::string name;
    std::vector<double> mean_ospa;
    std::vector<double> mean_trace; // NaN where no run reported a target
    std::vector<std::size_t> present_count;
    std::vector<double> mean_q_absent;
    std::vector<double> mean_q_present;
    std::vector<double> mean_components;
};

struct Aggregate {
    std::size_t runs = 0;
    std::size_t steps = 0;
    std::vector<SeriesSummary> series;

    [[nodiscard]] const SeriesSummary& at(const std::string& name) const;
};

/// Per-step means over runs. Records must be nonempty and share step count
/// and series names.
Aggregate aggregate(const std::vector<RunRecord>& records, const OspaParams& ospa_params,
                    bool trace_position_only = false);

/// Mean of `values` over the 1-based step window [first, last].
double window_mean(const std::vector<double>& values, int first, int last);

}  // namespace possfuse
