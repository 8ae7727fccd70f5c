#pragma once

#include <Eigen/Dense>

#include <vector>

namespace possfuse {

/// Axis-aligned rectangle in the measurement plane (km).
struct Region {
    double x_min = 0.0;
    double x_max = 60.0;
    double y_min = 0.0;
    double y_max = 60.0;

    [[nodiscard]] double width() const { return x_max - x_min; }
    [[nodiscard]] double height() const { return y_max - y_min; }
    [[nodiscard]] double area() const { return width() * height(); }
    [[nodiscard]] bool valid() const { return x_max > x_min && y_max > y_min; }
    [[nodiscard]] Eigen::Vector2d center() const {
        return {0.5 * (x_min + x_max), 0.5 * (y_min + y_max)};
    }
    bool operator==(const Region&) const = default;
};

/// Point measurements one sensor reports at one time step.
/// `is_clutter` is the simulator's ground-truth label; filters never read it.
struct Scan {
    int time_index = 0;
    std::vector<Eigen::Vector2d> points;
    std::vector<bool> is_clutter;

    [[nodiscard]] std::size_t size() const { return points.size(); }
    [[nodiscard]] bool empty() const { return points.empty(); }
};

}  // namespace possfuse
