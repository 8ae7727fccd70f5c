#pragma once

#include "possfuse/bernoulli_gmf.hpp"
#include "possfuse/config.hpp"
#include "possfuse/metrics.hpp"
#include "possfuse/simulator.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace possfuse {

enum class ExperimentKind { single, fuse_independent, fuse_dependent };

/// One Bernoulli GMF driven by one sensor's scans.
class LocalFilter {
public:
    LocalFilter(const FilterConfig& filter, const ScenarioConfig& scenario,
                const SensorConfig& sensor);

    /// Predict with a birth mixture built from `previous`, then update with
    /// `current` and reduce. The predicted state stays available until the
    /// next call.
    void step(const Scan& previous, const Scan& current);

    [[nodiscard]] const BernoulliPossState& state() const { return state_; }
    [[nodiscard]] const BernoulliPossState& predicted() const { return predicted_; }
    [[nodiscard]] const ReductionConfig& reduction() const { return filter_.reduction; }

private:
    FilterConfig filter_;
    Region region_;
    double noise_var_;
    MotionModel motion_;
    MeasurementModel measurement_;
    DetectionPossibility detection_;
    BernoulliPossState state_;
    BernoulliPossState predicted_;
};

/// Observation hook for every state a run produces. `stage` is "predict",
/// "update" or "fused"; `series` names the filter or fuser. Called from
/// worker threads, so it must be thread-safe.
struct StateEvent {
    int run;
    int step;
    std::string_view stage;
    std::string_view series;
    const BernoulliPossState& state;
};
using StateObserver = std::function<void(const StateEvent&)>;

struct RunOptions {
    unsigned threads = 0; // 0 picks the hardware concurrency
    bool keep_scans = false;
    StateObserver observer;
};

struct ScanDumpRow {
    int run;
    int step;
    int sensor;
    double x_km;
    double y_km;
    bool is_clutter;
};

struct ExperimentResult {
    ExperimentKind kind;
    Aggregate aggregate;
    std::vector<RunRecord> records;
    std::vector<ScanDumpRow> scans;
};

/// Worker count after applying the POSSFUSE_THREADS cap.
unsigned resolve_thread_count(unsigned requested);

/// Runs one Monte Carlo replication. Pure function of (kind, cfg, run).
RunRecord simulate_run(ExperimentKind kind, const ExperimentConfig& cfg, int run,
                       const StateObserver& observer = {},
                       std::vector<ScanDumpRow>* scans = nullptr);

ExperimentResult run_experiment(ExperimentKind kind, const ExperimentConfig& cfg,
                                const RunOptions& options = {});

inline ExperimentResult run_single(const ExperimentConfig& cfg, const RunOptions& options = {}) {
    return run_experiment(ExperimentKind::single, cfg, options);
}
inline ExperimentResult run_fusion_independent(const ExperimentConfig& cfg,
                                               const RunOptions& options = {}) {
    return run_experiment(ExperimentKind::fuse_independent, cfg, options);
}
inline ExperimentResult run_fusion_dependent(const ExperimentConfig& cfg,
                                             const RunOptions& options = {}) {
    return run_experiment(ExperimentKind::fuse_dependent, cfg, options);
}

// CSV bodies, header included.
std::string ospa_csv(const Aggregate& agg);
std::string trace_csv(const Aggregate& agg);
std::string presence_csv(const Aggregate& agg);
std::string scans_csv(const std::vector<ScanDumpRow>& rows);

/// Writes ospa.csv, trace.csv, presence.csv and, when scans were kept,
/// scans.csv into `dir` (created if missing). Throws std::runtime_error when
/// the directory or a file cannot be written.
void write_results(const std::string& dir, const ExperimentResult& result);

}  // namespace possfuse
