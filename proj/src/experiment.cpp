#include "possfuse/experiment.hpp"

#include "possfuse/fusion.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace possfuse {

namespace {

constexpr std::uint64_t kSensorStreamBase = 1000;

BernoulliPossState reduced(BernoulliPossState s, const ReductionConfig& cfg) {
    return {s.q_absent, s.q_present, reduce(s.spatial, cfg)};
}

SeriesStep summarize(const BernoulliPossState& s) {
    return {extract(s), s.q_absent, s.q_present, s.spatial.size()};
}

class RunContext {
public:
    RunContext(int run, const StateObserver& observer) : run_(run), observer_(observer) {}

    void set_step(int step) { step_ = step; }

    // Every state leaving a filter or fuser goes through here.
    void check(std::string_view stage, std::string_view series, const BernoulliPossState& s) const {
        if (observer_) observer_({run_, step_, stage, series, s});
        if (!satisfies_invariants(s)) {
            throw NumericalError(std::string(series) + " " + std::string(stage) +
                                 " state violates normalization (q0=" +
                                 std::to_string(s.q_absent) + ", q1=" +
                                 std::to_string(s.q_present) + ")");
        }
    }

private:
    int run_;
    int step_ = 0;
    const StateObserver& observer_;
};

void dump_scans(std::vector<ScanDumpRow>* out, int run, int sensor, const std::vector<Scan>& scans) {
    if (!out) return;
    for (const auto& scan : scans) {
        for (std::size_t i = 0; i < scan.size(); ++i) {
            out->push_back({run, scan.time_index, sensor, scan.points[i].x(), scan.points[i].y(),
                            static_cast<bool>(scan.is_clutter[i])});
        }
    }
}

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << body;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

// ---- LocalFilter ----

LocalFilter::LocalFilter(const FilterConfig& filter, const ScenarioConfig& scenario,
                         const SensorConfig& sensor)
    : filter_(filter),
      region_(scenario.region),
      noise_var_(sensor.noise_var),
      motion_(scenario.motion()),
      measurement_(MeasurementModel::position_2d(
          sensor.noise_var, std::max(sensor.clutter_rate, filter.min_clutter_rate),
          scenario.region)),
      detection_(filter.detection()),
      state_(make_initial_state(region_prior(scenario.region, filter.birth.velocity_var))),
      predicted_(state_) {
    filter_.transition.validate();
    filter_.reduction.validate();
    detection_.validate();
    motion_.validate();
}

void LocalFilter::step(const Scan& previous, const Scan& current) {
    const auto birth = build_birth_mixture(previous, filter_.birth, noise_var_, region_);
    predicted_ = predict(state_, motion_, filter_.transition, birth);
    state_ = reduced(update(predicted_, current, measurement_, detection_), filter_.reduction);
}

// ---- drivers ----

unsigned resolve_thread_count(unsigned requested) {
    unsigned n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("POSSFUSE_THREADS")) {
        char* end = nullptr;
        const long cap = std::strtol(env, &end, 10);
        if (end != env && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
    }
    return n;
}

RunRecord simulate_run(ExperimentKind kind, const ExperimentConfig& cfg, int run,
                       const StateObserver& observer, std::vector<ScanDumpRow>* scans) {
    const auto& scn = cfg.scenario;
    const std::uint64_t run_seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(run));
    const Trajectory truth = generate_truth(scn, run_seed);
    auto sensor_scans = [&](const SensorConfig& s) {
        return generate_measurements(
            truth, s, scn.region,
            derive_seed(run_seed, kSensorStreamBase + static_cast<std::uint64_t>(s.seed_stream)));
    };

    // Each local filter is paired with the index of the scan stream it reads.
    std::vector<std::vector<Scan>> streams;
    std::vector<LocalFilter> filters;
    std::vector<std::size_t> filter_stream;
    std::vector<std::string> names;

    switch (kind) {
        case ExperimentKind::single:
            for (std::size_t i = 0; i < scn.sensors.size(); ++i) {
                streams.push_back(sensor_scans(scn.sensors[i]));
                filters.emplace_back(cfg.filter, scn, scn.sensors[i]);
                filter_stream.push_back(i);
                names.push_back("sensor" + std::to_string(i + 1));
            }
            break;
        case ExperimentKind::fuse_independent:
            if (scn.sensors.size() < 2) {
                throw InvalidArgument("fuse-independent requires two sensors");
            }
            for (std::size_t i = 0; i < 2; ++i) {
                streams.push_back(sensor_scans(scn.sensors[i]));
                filters.emplace_back(cfg.filter, scn, scn.sensors[i]);
                filter_stream.push_back(i);
                names.push_back("sensor" + std::to_string(i + 1));
            }
            if (cfg.fusion.wants_independent()) names.emplace_back("centralized");
            if (cfg.fusion.wants_chernoff()) names.emplace_back("chernoff");
            break;
        case ExperimentKind::fuse_dependent:
            // Both filters consume the very same scans.
            streams.push_back(sensor_scans(scn.sensors[0]));
            filters.emplace_back(cfg.filter, scn, scn.sensors[0]);
            filters.emplace_back(cfg.filter, scn, scn.sensors[0]);
            filter_stream = {0, 0};
            names.emplace_back("single");
            if (cfg.fusion.wants_chernoff()) names.emplace_back("chernoff");
            if (cfg.fusion.wants_independent()) names.emplace_back("independent");
            break;
    }
    for (std::size_t s = 0; s < streams.size(); ++s) dump_scans(scans, run, static_cast<int>(s) + 1, streams[s]);

    RunRecord record;
    record.series_names = names;
    record.series.assign(names.size(), {});
    record.truth.reserve(static_cast<std::size_t>(scn.steps));
    for (const auto& t : truth) {
        if (t) {
            record.truth.emplace_back(Eigen::Vector2d((*t)(0), (*t)(2)));
        } else {
            record.truth.emplace_back(std::nullopt);
        }
    }

    const std::vector<std::string> filter_names =
        kind == ExperimentKind::fuse_dependent ? std::vector<std::string>{"filter1", "filter2"}
                                               : std::vector<std::string>(names.begin(),
                                                                          names.begin() + static_cast<long>(filters.size()));
    RunContext ctx(run, observer);
    const Scan empty_scan;
    for (int k = 1; k <= scn.steps; ++k) {
        ctx.set_step(k);
        const auto idx = static_cast<std::size_t>(k - 1);
        try {
            for (std::size_t f = 0; f < filters.size(); ++f) {
                const auto& stream = streams[filter_stream[f]];
                filters[f].step(k == 1 ? empty_scan : stream[idx - 1], stream[idx]);
                ctx.check("predict", filter_names[f], filters[f].predicted());
                ctx.check("update", filter_names[f], filters[f].state());
            }

            std::size_t out = 0;
            if (kind == ExperimentKind::fuse_dependent) {
                record.series[out++].push_back(summarize(filters[0].state()));
            } else {
                for (const auto& f : filters) record.series[out++].push_back(summarize(f.state()));
            }
            if (kind == ExperimentKind::single) continue;

            const auto& a = filters[0].state();
            const auto& b = filters[1].state();
            const auto& red = cfg.filter.reduction;
            auto emit_fused = [&](const char* name, FusionResult fused) {
                auto s = reduced(std::move(fused.state), red);
                ctx.check("fused", name, s);
                record.series[out++].push_back(summarize(s));
            };
            const auto run_independent = [&](const char* name) {
                emit_fused(name, fuse_independent(a, b));
            };
            const auto run_chernoff = [&] {
                const double omega = select_omega(a, b, cfg.fusion.omega_strategy);
                emit_fused("chernoff", fuse_chernoff(a, b, omega));
            };
            if (kind == ExperimentKind::fuse_independent) {
                if (cfg.fusion.wants_independent()) run_independent("centralized");
                if (cfg.fusion.wants_chernoff()) run_chernoff();
            } else {
                if (cfg.fusion.wants_chernoff()) run_chernoff();
                if (cfg.fusion.wants_independent()) run_independent("independent");
            }
        } catch (const NumericalError& e) {
            throw NumericalError("run " + std::to_string(run) + " step " + std::to_string(k) +
                                 ": " + e.what());
        } catch (const InvalidArgument& e) {
            throw NumericalError("run " + std::to_string(run) + " step " + std::to_string(k) +
                                 ": " + e.what());
        }
    }
    return record;
}

ExperimentResult run_experiment(ExperimentKind kind, const ExperimentConfig& cfg,
                                const RunOptions& options) {
    validate(cfg);
    const auto runs = static_cast<std::size_t>(cfg.runs);
    std::vector<RunRecord> records(runs);
    std::vector<std::vector<ScanDumpRow>> dumps(options.keep_scans ? runs : 0);
    std::vector<std::exception_ptr> errors(runs);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < runs; r = next++) {
            try {
                records[r] = simulate_run(kind, cfg, static_cast<int>(r), options.observer,
                                          options.keep_scans ? &dumps[r] : nullptr);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const unsigned nthreads =
        std::min<unsigned>(resolve_thread_count(options.threads), static_cast<unsigned>(runs));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    // Report the lowest failing run so the error is independent of scheduling.
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    ExperimentResult result{kind, aggregate(records, cfg.metrics.ospa, cfg.metrics.trace_position_only),
                            std::move(records), {}};
    for (auto& d : dumps) {
        result.scans.insert(result.scans.end(), d.begin(), d.end());
    }
    return result;
}

// ---- CSV ----

std::string ospa_csv(const Aggregate& agg) {
    std::string out = "step,series,mean_ospa,runs\n";
    for (std::size_t k = 0; k < agg.steps; ++k) {
        for (const auto& s : agg.series) {
            out += std::to_string(k + 1) + "," + s.name + "," + fmt_double(s.mean_ospa[k]) + "," +
                   std::to_string(agg.runs) + "\n";
        }
    }
    return out;
}

std::string trace_csv(const Aggregate& agg) {
    std::string out = "step,series,mean_trace,present_count\n";
    for (std::size_t k = 0; k < agg.steps; ++k) {
        for (const auto& s : agg.series) {
            out += std::to_string(k + 1) + "," + s.name + "," + fmt_double(s.mean_trace[k]) + "," +
                   std::to_string(s.present_count[k]) + "\n";
        }
    }
    return out;
}

std::string presence_csv(const Aggregate& agg) {
    std::string out = "step,series,mean_q_absent,mean_q_present,mean_components\n";
    for (std::size_t k = 0; k < agg.steps; ++k) {
        for (const auto& s : agg.series) {
            out += std::to_string(k + 1) + "," + s.name + "," + fmt_double(s.mean_q_absent[k]) +
                   "," + fmt_double(s.mean_q_present[k]) + "," +
                   fmt_double(s.mean_components[k]) + "\n";
        }
    }
    return out;
}

std::string scans_csv(const std::vector<ScanDumpRow>& rows) {
    std::string out = "run,step,sensor,x_km,y_km,is_clutter\n";
    for (const auto& r : rows) {
        out += std::to_string(r.run) + "," + std::to_string(r.step) + "," +
               std::to_string(r.sensor) + "," + fmt_double(r.x_km) + "," + fmt_double(r.y_km) +
               "," + (r.is_clutter ? "1" : "0") + "\n";
    }
    return out;
}

void write_results(const std::string& dir, const ExperimentResult& result) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw std::runtime_error("cannot create output directory " + dir);
    }
    const fs::path base(dir);
    write_file(base / "ospa.csv", ospa_csv(result.aggregate));
    write_file(base / "trace.csv", trace_csv(result.aggregate));
    write_file(base / "presence.csv", presence_csv(result.aggregate));
    if (!result.scans.empty()) write_file(base / "scans.csv", scans_csv(result.scans));
}

}  // namespace possfuse
