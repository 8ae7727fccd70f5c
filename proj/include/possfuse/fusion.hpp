#pragma once

#include "possfuse/bernoulli_gmf.hpp"

#include <vector>

namespace possfuse {

/// Fused Bernoulli state together with its normalizers: `normalizer` is the
/// set-level normalizer (R for Chernoff, G for the independent product) and
/// `alpha` the supremum of the unnormalized fused spatial mixture.
struct FusionResult {
    BernoulliPossState state;
    double normalizer = 1.0;
    double alpha = 1.0;
};

/// Exact Chernoff fusion f_a^(1-omega) f_b^omega / sup of two Bernoulli
/// Gaussian-max states. The fused mixture holds one component per pair
/// (i, j), ordered with j outer and i inner; pairs whose weight underflows
/// below 1e-300 are dropped. omega = 0 returns a, omega = 1 returns b.
/// No reduction is applied; callers run `reduce` when they need bounded size.
FusionResult fuse_chernoff(const BernoulliPossState& a, const BernoulliPossState& b, double omega);

/// Normalized plain product f_a f_b / sup, valid for conditionally
/// independent sources.
FusionResult fuse_independent(const BernoulliPossState& a, const BernoulliPossState& b);

struct OmegaStrategy {
    enum class Kind { fixed, min_trace };

    Kind kind = Kind::fixed;
    double value = 0.5;
    std::vector<double> grid = default_grid();

    static OmegaStrategy fixed(double v) { return {Kind::fixed, v, default_grid()}; }
    static OmegaStrategy min_trace() { return {Kind::min_trace, 0.5, default_grid()}; }

    /// {0.05, 0.10, ..., 0.95}
    static std::vector<double> default_grid();

    bool operator==(const OmegaStrategy&) const = default;
};

/// Picks the Chernoff exponent. `min_trace` returns the grid point that
/// minimizes the trace of the fused top-component covariance; ties go to the
/// point closest to 0.5.
double select_omega(const BernoulliPossState& a, const BernoulliPossState& b,
                    const OmegaStrategy& strategy);

}  // namespace possfuse
