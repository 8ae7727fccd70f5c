#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace possfuse {

struct SelftestCase {
    std::string name;
    std::size_t checks = 0;
    double max_abs_error = 0.0;
    bool passed = false;
};

/// Grid check of the closed-form fusion against pointwise evaluation of
/// s1^(1-omega) s2^omega / alpha (and s1 s2 / alpha*) on random 1-D and 2-D
/// mixture pairs.
std::vector<SelftestCase> run_fusion_selftest(std::uint64_t seed, int pairs = 20,
                                              double tolerance = 1e-9);

}  // namespace possfuse
