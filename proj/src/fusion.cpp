#include "possfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace possfuse {

namespace {

constexpr double kUnderflow = 1e-300;

void require_compatible(const BernoulliPossState& a, const BernoulliPossState& b) {
    if (a.spatial.dim() != b.spatial.dim()) {
        throw InvalidArgument("fusion: state dimension mismatch");
    }
}

template <typename PairFusion>
FusionResult fuse_pairs(const BernoulliPossState& a, const BernoulliPossState& b,
                        double absent_numerator, double present_scale, PairFusion&& pair) {
    const auto& ca = a.spatial.components();
    const auto& cb = b.spatial.components();

    std::vector<double> log_w;
    std::vector<GaussianPossibility> gaussians;
    log_w.reserve(ca.size() * cb.size());
    gaussians.reserve(ca.size() * cb.size());

    double log_alpha = -std::numeric_limits<double>::infinity();
    for (const auto& cj : cb) {
        for (const auto& ci : ca) {
            auto f = pair(ci, cj);
            log_alpha = std::max(log_alpha, f.log_weight);
            log_w.push_back(f.log_weight);
            gaussians.push_back(std::move(f.gaussian));
        }
    }
    if (!std::isfinite(log_alpha)) {
        throw NumericalError("fusion: fused spatial supremum is not finite");
    }

    const double alpha = std::exp(log_alpha);
    const double present_numerator = present_scale * alpha;
    const double normalizer = std::max(absent_numerator, present_numerator);
    if (!(normalizer > 0.0)) {
        throw NumericalError("fusion: zero normalizer (sources are in total conflict)");
    }
    return {BernoulliPossState{absent_numerator / normalizer, present_numerator / normalizer,
                               GaussianMaxMixture::from_log_weights(log_w, std::move(gaussians),
                                                                    kUnderflow)},
            normalizer, alpha};
}

double geometric(double x, double y, double omega) {
    return std::pow(x, 1.0 - omega) * std::pow(y, omega);
}

}  // namespace

FusionResult fuse_chernoff(const BernoulliPossState& a, const BernoulliPossState& b, double omega) {
    require_compatible(a, b);
    if (!(omega >= 0.0 && omega <= 1.0)) {
        throw InvalidArgument("fuse_chernoff: omega must lie in [0, 1]");
    }
    if (omega == 0.0) return {a, 1.0, 1.0};
    if (omega == 1.0) return {b, 1.0, 1.0};

    return fuse_pairs(a, b, geometric(a.q_absent, b.q_absent, omega),
                      geometric(a.q_present, b.q_present, omega),
                      [omega](const WeightedComponent& ci, const WeightedComponent& cj) {
                          return chernoff_component_log_fusion(ci, cj, omega);
                      });
}

FusionResult fuse_independent(const BernoulliPossState& a, const BernoulliPossState& b) {
    require_compatible(a, b);
    return fuse_pairs(a, b, a.q_absent * b.q_absent, a.q_present * b.q_present,
                      [](const WeightedComponent& ci, const WeightedComponent& cj) {
                          return independent_component_log_fusion(ci, cj);
                      });
}

std::vector<double> OmegaStrategy::default_grid() {
    std::vector<double> grid;
    for (int k = 1; k <= 19; ++k) grid.push_back(k / 20.0);
    return grid;
}

double select_omega(const BernoulliPossState& a, const BernoulliPossState& b,
                    const OmegaStrategy& strategy) {
    if (strategy.kind == OmegaStrategy::Kind::fixed) {
        if (!(strategy.value >= 0.0 && strategy.value <= 1.0)) {
            throw InvalidArgument("select_omega: fixed omega must lie in [0, 1]");
        }
        return strategy.value;
    }
    if (strategy.grid.empty()) {
        throw InvalidArgument("select_omega: empty omega grid");
    }

    double best_omega = strategy.grid.front();
    double best_trace = std::numeric_limits<double>::infinity();
    for (const double omega : strategy.grid) {
        const auto fused = fuse_chernoff(a, b, omega);
        const double trace = fused.state.spatial[fused.state.spatial.argmax()]
                                 .gaussian.covariance()
                                 .trace();
        const double tol = 1e-12 * std::max(1.0, std::abs(best_trace));
        const bool tie = std::isfinite(best_trace) && std::abs(trace - best_trace) <= tol;
        if (tie) {
            if (std::abs(omega - 0.5) < std::abs(best_omega - 0.5)) best_omega = omega;
        } else if (trace < best_trace) {
            best_trace = trace;
            best_omega = omega;
        }
    }
    return best_omega;
}

}  // namespace possfuse
