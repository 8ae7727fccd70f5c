#include "possfuse/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

namespace possfuse {

using nlohmann::json;

static_assert(std::is_same_v<std::size_t, std::uint64_t>,
              "ReductionConfig::max_components is read through the uint64 path");

namespace {

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        read_value(j_.at(key), child(key), out);
    }

    template <typename F>
    void read_object(const char* key, F&& f) {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        ObjectReader sub(j_.at(key), child(key));
        f(sub);
        sub.finish();
    }

    template <typename F>
    bool read_array(const char* key, F&& f) {
        seen_.insert(key);
        if (!j_.contains(key)) return false;
        const auto& arr = j_.at(key);
        if (!arr.is_array()) fail(child(key), "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            f(arr[i], child(key) + "[" + std::to_string(i) + "]");
        }
        return true;
    }

    void finish() const {
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) fail(child(key), "unknown key");
        }
    }

    [[nodiscard]] std::string child(const std::string& key) const {
        return path_.empty() ? key : path_ + "." + key;
    }

    [[noreturn]] static void fail(const std::string& path, const std::string& what) {
        throw ConfigError((path.empty() ? std::string("<root>") : path) + ": " + what);
    }

    static void read_value(const json& v, const std::string& path, double& out) {
        if (!v.is_number()) fail(path, "expected a number");
        out = v.get<double>();
    }
    static void read_value(const json& v, const std::string& path, int& out) {
        if (!v.is_number_integer()) fail(path, "expected an integer");
        out = v.get<int>();
    }
    static void read_value(const json& v, const std::string& path, std::uint64_t& out) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            fail(path, "expected a non-negative integer");
        }
        out = v.get<std::uint64_t>();
    }
    static void read_value(const json& v, const std::string& path, bool& out) {
        if (!v.is_boolean()) fail(path, "expected a boolean");
        out = v.get<bool>();
    }
    static void read_value(const json& v, const std::string& path, std::string& out) {
        if (!v.is_string()) fail(path, "expected a string");
        out = v.get<std::string>();
    }
    template <std::size_t N>
    static void read_value(const json& v, const std::string& path, std::array<double, N>& out) {
        if (!v.is_array() || v.size() != N) {
            fail(path, "expected an array of " + std::to_string(N) + " numbers");
        }
        for (std::size_t i = 0; i < N; ++i) {
            read_value(v[i], path + "[" + std::to_string(i) + "]", out[i]);
        }
    }
    static void read_value(const json& v, const std::string& path, std::vector<double>& out) {
        if (!v.is_array()) fail(path, "expected an array of numbers");
        out.resize(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            read_value(v[i], path + "[" + std::to_string(i) + "]", out[i]);
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

const char* mode_name(FusionMode m) {
    switch (m) {
        case FusionMode::chernoff: return "chernoff";
        case FusionMode::independent: return "independent";
        case FusionMode::both: return "both";
    }
    return "both";
}

void parse_region(ObjectReader& r, Region& region) {
    r.read("x_min", region.x_min);
    r.read("x_max", region.x_max);
    r.read("y_min", region.y_min);
    r.read("y_max", region.y_max);
}

void parse_scenario(ObjectReader& r, ScenarioConfig& s) {
    r.read_object("region", [&](ObjectReader& sub) { parse_region(sub, s.region); });
    r.read("steps", s.steps);
    r.read("dt", s.dt);
    r.read("psd", s.psd);
    r.read("initial_state", s.initial_state);
    r.read("birth_step", s.birth_step);
    r.read("death_step", s.death_step);
    r.read("p_birth", s.p_birth);
    r.read("p_survive", s.p_survive);
    std::vector<SensorConfig> sensors;
    const bool have_sensors = r.read_array("sensors", [&](const json& item, const std::string& path) {
        SensorConfig sc;
        sc.seed_stream = static_cast<int>(sensors.size());
        ObjectReader sub(item, path);
        sub.read("pd_true", sc.pd_true);
        sub.read("noise_var", sc.noise_var);
        sub.read("clutter_rate", sc.clutter_rate);
        sub.read("seed_stream", sc.seed_stream);
        sub.finish();
        sensors.push_back(sc);
    });
    if (have_sensors) s.sensors = std::move(sensors);
}

void parse_filter(ObjectReader& r, FilterConfig& f) {
    r.read("detection_interval", f.detection_interval);
    r.read_object("transition", [&](ObjectReader& sub) {
        sub.read("tau00", f.transition.tau00);
        sub.read("tau01", f.transition.tau01);
        sub.read("tau10", f.transition.tau10);
        sub.read("tau11", f.transition.tau11);
    });
    r.read_object("reduction", [&](ObjectReader& sub) {
        sub.read("prune_ratio", f.reduction.prune_ratio);
        sub.read("merge_mahalanobis", f.reduction.merge_mahalanobis);
        sub.read("max_components", f.reduction.max_components);
    });
    r.read_object("birth", [&](ObjectReader& sub) {
        sub.read("position_var_margin", f.birth.position_var_margin);
        sub.read("velocity_var", f.birth.velocity_var);
    });
    r.read("min_clutter_rate", f.min_clutter_rate);
}

void parse_fusion(ObjectReader& r, FusionConfig& f) {
    std::string mode = mode_name(f.mode);
    r.read("mode", mode);
    if (mode == "chernoff") {
        f.mode = FusionMode::chernoff;
    } else if (mode == "independent") {
        f.mode = FusionMode::independent;
    } else if (mode == "both") {
        f.mode = FusionMode::both;
    } else {
        ObjectReader::fail(r.child("mode"), "expected one of chernoff, independent, both");
    }
    r.read_object("omega_strategy", [&](ObjectReader& sub) {
        std::string kind = f.omega_strategy.kind == OmegaStrategy::Kind::fixed ? "fixed"
                                                                               : "min-trace";
        sub.read("kind", kind);
        if (kind == "fixed") {
            f.omega_strategy.kind = OmegaStrategy::Kind::fixed;
        } else if (kind == "min-trace") {
            f.omega_strategy.kind = OmegaStrategy::Kind::min_trace;
        } else {
            ObjectReader::fail(sub.child("kind"), "expected fixed or min-trace");
        }
        sub.read("value", f.omega_strategy.value);
        sub.read("grid", f.omega_strategy.grid);
    });
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("<root>: malformed JSON: ") + e.what());
    }

    ExperimentConfig cfg;
    ObjectReader r(root, "");
    r.read_object("scenario", [&](ObjectReader& sub) { parse_scenario(sub, cfg.scenario); });
    r.read_object("filter", [&](ObjectReader& sub) { parse_filter(sub, cfg.filter); });
    r.read_object("fusion", [&](ObjectReader& sub) { parse_fusion(sub, cfg.fusion); });
    r.read_object("metrics", [&](ObjectReader& sub) {
        sub.read("ospa_cutoff", cfg.metrics.ospa.cutoff);
        sub.read("ospa_order", cfg.metrics.ospa.order);
        sub.read("trace_position_only", cfg.metrics.trace_position_only);
    });
    r.read("runs", cfg.runs);
    r.read("master_seed", cfg.master_seed);
    r.read("output_dir", cfg.output_dir);
    r.finish();

    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& cfg) {
    const auto& s = cfg.scenario;
    json sensors = json::array();
    for (const auto& sc : s.sensors) {
        sensors.push_back({{"pd_true", sc.pd_true},
                           {"noise_var", sc.noise_var},
                           {"clutter_rate", sc.clutter_rate},
                           {"seed_stream", sc.seed_stream}});
    }
    const auto& f = cfg.filter;
    const auto& os = cfg.fusion.omega_strategy;
    json root = {
        {"scenario",
         {{"region",
           {{"x_min", s.region.x_min},
            {"x_max", s.region.x_max},
            {"y_min", s.region.y_min},
            {"y_max", s.region.y_max}}},
          {"steps", s.steps},
          {"dt", s.dt},
          {"psd", s.psd},
          {"initial_state", s.initial_state},
          {"birth_step", s.birth_step},
          {"death_step", s.death_step},
          {"p_birth", s.p_birth},
          {"p_survive", s.p_survive},
          {"sensors", sensors}}},
        {"filter",
         {{"detection_interval", f.detection_interval},
          {"transition",
           {{"tau00", f.transition.tau00},
            {"tau01", f.transition.tau01},
            {"tau10", f.transition.tau10},
            {"tau11", f.transition.tau11}}},
          {"reduction",
           {{"prune_ratio", f.reduction.prune_ratio},
            {"merge_mahalanobis", f.reduction.merge_mahalanobis},
            {"max_components", f.reduction.max_components}}},
          {"birth",
           {{"position_var_margin", f.birth.position_var_margin},
            {"velocity_var", f.birth.velocity_var}}},
          {"min_clutter_rate", f.min_clutter_rate}}},
        {"fusion",
         {{"mode", mode_name(cfg.fusion.mode)},
          {"omega_strategy",
           {{"kind", os.kind == OmegaStrategy::Kind::fixed ? "fixed" : "min-trace"},
            {"value", os.value},
            {"grid", os.grid}}}}},
        {"metrics",
         {{"ospa_cutoff", cfg.metrics.ospa.cutoff},
          {"ospa_order", cfg.metrics.ospa.order},
          {"trace_position_only", cfg.metrics.trace_position_only}}},
        {"runs", cfg.runs},
        {"master_seed", cfg.master_seed},
        {"output_dir", cfg.output_dir},
    };
    return root.dump(2) + "\n";
}

void validate(const ExperimentConfig& cfg) {
    auto guard = [](const char* path, auto&& check) {
        try {
            check();
        } catch (const InvalidArgument& e) {
            throw ConfigError(std::string(path) + ": " + e.what());
        }
    };
    guard("scenario", [&] { cfg.scenario.validate(); });
    guard("filter.detection_interval", [&] { cfg.filter.detection().validate(); });
    guard("filter.transition", [&] { cfg.filter.transition.validate(); });
    guard("filter.reduction", [&] { cfg.filter.reduction.validate(); });
    if (!(cfg.filter.birth.position_var_margin >= 0.0)) {
        throw ConfigError("filter.birth.position_var_margin: must be >= 0");
    }
    if (!(cfg.filter.birth.velocity_var > 0.0)) {
        throw ConfigError("filter.birth.velocity_var: must be > 0");
    }
    if (!(cfg.filter.min_clutter_rate > 0.0)) {
        throw ConfigError("filter.min_clutter_rate: must be > 0");
    }
    const auto& os = cfg.fusion.omega_strategy;
    if (os.kind == OmegaStrategy::Kind::fixed && !(os.value >= 0.0 && os.value <= 1.0)) {
        throw ConfigError("fusion.omega_strategy.value: must lie in [0, 1]");
    }
    if (os.kind == OmegaStrategy::Kind::min_trace && os.grid.empty()) {
        throw ConfigError("fusion.omega_strategy.grid: empty grid");
    }
    for (const double w : os.grid) {
        if (!(w > 0.0 && w < 1.0)) {
            throw ConfigError("fusion.omega_strategy.grid: entries must lie in (0, 1)");
        }
    }
    if (!(cfg.metrics.ospa.cutoff > 0.0)) throw ConfigError("metrics.ospa_cutoff: must be > 0");
    if (!(cfg.metrics.ospa.order >= 1.0)) throw ConfigError("metrics.ospa_order: must be >= 1");
    if (cfg.runs < 1) throw ConfigError("runs: must be >= 1");
    if (cfg.output_dir.empty()) throw ConfigError("output_dir: must not be empty");
}

}  // namespace possfuse
