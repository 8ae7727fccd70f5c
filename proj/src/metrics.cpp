#include "possfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace possfuse {

double min_assignment_cost(const Eigen::MatrixXd& cost) {
    const Eigen::Index m = cost.rows();
    const Eigen::Index n = cost.cols();
    if (m > n) throw InvalidArgument("min_assignment_cost: more rows than columns");
    if (n > 16) throw InvalidArgument("min_assignment_cost: at most 16 columns supported");
    if (m == 0) return 0.0;

    // best[mask] = cheapest assignment of the first popcount(mask) rows to
    // the columns in mask.
    const std::size_t full = std::size_t{1} << n;
    std::vector<double> best(full, std::numeric_limits<double>::infinity());
    best[0] = 0.0;
    double answer = std::numeric_limits<double>::infinity();
    for (std::size_t mask = 0; mask < full; ++mask) {
        if (!std::isfinite(best[mask])) continue;
        const auto row = static_cast<Eigen::Index>(__builtin_popcountll(mask));
        if (row == m) {
            answer = std::min(answer, best[mask]);
            continue;
        }
        for (Eigen::Index col = 0; col < n; ++col) {
            const std::size_t bit = std::size_t{1} << col;
            if (mask & bit) continue;
            best[mask | bit] = std::min(best[mask | bit], best[mask] + cost(row, col));
        }
    }
    return answer;
}

double ospa(const std::vector<Eigen::VectorXd>& X, const std::vector<Eigen::VectorXd>& Y,
            double cutoff, double order) {
    if (!(cutoff > 0.0) || !(order >= 1.0)) {
        throw InvalidArgument("ospa: requires cutoff > 0 and order >= 1");
    }
    const auto& small = X.size() <= Y.size() ? X : Y;
    const auto& large = X.size() <= Y.size() ? Y : X;
    const std::size_t m = small.size();
    const std::size_t n = large.size();
    if (n == 0) return 0.0;

    Eigen::MatrixXd cost(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (small[i].size() != large[j].size()) {
                throw InvalidArgument("ospa: point dimension mismatch");
            }
            const double d = std::min(cutoff, (small[i] - large[j]).norm());
            cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::pow(d, order);
        }
    }
    const double total = min_assignment_cost(cost) +
                         std::pow(cutoff, order) * static_cast<double>(n - m);
    return std::pow(total / static_cast<double>(n), 1.0 / order);
}

double ospa(const std::vector<Eigen::VectorXd>& X, const std::vector<Eigen::VectorXd>& Y,
            const OspaParams& params) {
    return ospa(X, Y, params.cutoff, params.order);
}

double covariance_trace(const std::optional<Estimate>& estimate, bool position_only) {
    if (!estimate) throw InvalidArgument("covariance_trace: no estimate");
    const auto& P = estimate->covariance;
    if (!position_only) return P.trace();
    if (P.rows() < 3) throw InvalidArgument("covariance_trace: state has no y position");
    return P(0, 0) + P(2, 2);
}

const SeriesSummary& Aggregate::at(const std::string& name) const {
    for (const auto& s : series) {
        if (s.name == name) return s;
    }
    throw InvalidArgument("Aggregate: unknown series '" + name + "'");
}

Aggregate aggregate(const std::vector<RunRecord>& records, const OspaParams& ospa_params,
                    bool trace_position_only) {
    if (records.empty()) throw InvalidArgument("aggregate: no records");
    const auto& first = records.front();
    const std::size_t steps = first.truth.size();
    const std::size_t nseries = first.series_names.size();
    for (const auto& r : records) {
        if (r.truth.size() != steps || r.series_names != first.series_names ||
            r.series.size() != nseries) {
            throw InvalidArgument("aggregate: records disagree on steps or series");
        }
        for (const auto& s : r.series) {
            if (s.size() != steps) throw InvalidArgument("aggregate: series length mismatch");
        }
    }

    Aggregate out;
    out.runs = records.size();
    out.steps = steps;
    const double runs = static_cast<double>(records.size());
    for (std::size_t s = 0; s < nseries; ++s) {
        SeriesSummary sum;
        sum.name = first.series_names[s];
        sum.mean_ospa.assign(steps, 0.0);
        sum.mean_trace.assign(steps, 0.0);
        sum.present_count.assign(steps, 0);
        sum.mean_q_absent.assign(steps, 0.0);
        sum.mean_q_present.assign(steps, 0.0);
        sum.mean_components.assign(steps, 0.0);
        for (const auto& r : records) {
            for (std::size_t k = 0; k < steps; ++k) {
                const auto& st = r.series[s][k];
                std::vector<Eigen::VectorXd> truth_set;
                std::vector<Eigen::VectorXd> est_set;
                if (r.truth[k]) truth_set.emplace_back(*r.truth[k]);
                if (st.estimate) {
                    est_set.emplace_back(st.estimate->position());
                    sum.mean_trace[k] += covariance_trace(st.estimate, trace_position_only);
                    ++sum.present_count[k];
                }
                sum.mean_ospa[k] += ospa(truth_set, est_set, ospa_params);
                sum.mean_q_absent[k] += st.q_absent;
                sum.mean_q_present[k] += st.q_present;
                sum.mean_components[k] += static_cast<double>(st.components);
            }
        }
        for (std::size_t k = 0; k < steps; ++k) {
            sum.mean_ospa[k] /= runs;
            sum.mean_q_absent[k] /= runs;
            sum.mean_q_present[k] /= runs;
            sum.mean_components[k] /= runs;
            sum.mean_trace[k] = sum.present_count[k] > 0
                                    ? sum.mean_trace[k] / static_cast<double>(sum.present_count[k])
                                    : std::numeric_limits<double>::quiet_NaN();
        }
        out.series.push_back(std::move(sum));
    }
    return out;
}

double window_mean(const std::vector<double>& values, int first, int last) {
    if (first < 1 || last < first || static_cast<std::size_t>(last) > values.size()) {
        throw InvalidArgument("window_mean: invalid step window");
    }
    double acc = 0.0;
    for (int k = first; k <= last; ++k) acc += values[static_cast<std::size_t>(k - 1)];
    return acc / static_cast<double>(last - first + 1);
}

}  // namespace possfuse
