#include "possfuse/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace possfuse {

namespace {

// Stream labels: each purpose draws from its own generator so that changing
// e.g. the clutter rate never perturbs the trajectory or the detections.
enum StreamLabel : std::uint64_t {
    kTruth = 1,
    kDetection = 2,
    kNoise = 3,
    kClutter = 4,
    kOrder = 5,
};

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t label) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(label), static_cast<std::uint32_t>(label >> 32)};
    return std::mt19937_64(seq);
}

// Symmetric square root; tolerates the singular Q of a zero-noise model.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

void ScenarioConfig::validate() const {
    if (!region.valid()) throw InvalidArgument("scenario.region is empty");
    if (steps < 1) throw InvalidArgument("scenario.steps must be >= 1");
    if (!(dt > 0.0)) throw InvalidArgument("scenario.dt must be > 0");
    if (!(psd >= 0.0)) throw InvalidArgument("scenario.psd must be >= 0");
    if (!(1 <= birth_step && birth_step <= death_step && death_step <= steps)) {
        throw InvalidArgument("scenario requires 1 <= birth_step <= death_step <= steps");
    }
    if (sensors.empty()) throw InvalidArgument("scenario.sensors is empty");
    for (const auto& s : sensors) {
        if (!(s.pd_true >= 0.0 && s.pd_true <= 1.0)) {
            throw InvalidArgument("sensor pd_true must lie in [0, 1]");
        }
        if (!(s.noise_var > 0.0)) throw InvalidArgument("sensor noise_var must be > 0");
        if (!(s.clutter_rate >= 0.0)) throw InvalidArgument("sensor clutter_rate must be >= 0");
    }
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) {
    auto eng = make_engine(parent, label);
    return eng();
}

Trajectory generate_truth(const ScenarioConfig& cfg, std::uint64_t seed) {
    const MotionModel motion = cfg.motion();
    const Eigen::MatrixXd noise_root = psd_sqrt(motion.Q);
    auto eng = make_engine(seed, kTruth);
    std::normal_distribution<double> normal(0.0, 1.0);

    Trajectory truth(static_cast<std::size_t>(cfg.steps));
    Eigen::VectorXd x = Eigen::Map<const Eigen::Vector4d>(cfg.initial_state.data());
    for (int k = cfg.birth_step; k <= cfg.death_step; ++k) {
        if (k > cfg.birth_step) {
            Eigen::VectorXd w(4);
            for (int i = 0; i < 4; ++i) w(i) = normal(eng);
            x = motion.F * x + noise_root * w;
        }
        truth[static_cast<std::size_t>(k - 1)] = x;
    }
    return truth;
}

std::vector<Scan> generate_measurements(const Trajectory& truth, const SensorConfig& sensor,
                                        const Region& region, std::uint64_t seed) {
    auto detect_eng = make_engine(seed, kDetection);
    auto noise_eng = make_engine(seed, kNoise);
    auto clutter_eng = make_engine(seed, kClutter);
    auto order_eng = make_engine(seed, kOrder);

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, std::sqrt(sensor.noise_var));
    std::uniform_real_distribution<double> ux(region.x_min, region.x_max);
    std::uniform_real_distribution<double> uy(region.y_min, region.y_max);

    std::vector<Scan> scans;
    scans.reserve(truth.size());
    for (std::size_t k = 0; k < truth.size(); ++k) {
        Scan scan;
        scan.time_index = static_cast<int>(k) + 1;
        if (truth[k] && unit(detect_eng) < sensor.pd_true) {
            const auto& x = *truth[k];
            const double zx = x(0) + normal(noise_eng);
            const double zy = x(2) + normal(noise_eng);
            scan.points.emplace_back(zx, zy);
            scan.is_clutter.push_back(false);
        }
        if (sensor.clutter_rate > 0.0) {
            std::poisson_distribution<int> count(sensor.clutter_rate);
            const int n = count(clutter_eng);
            for (int c = 0; c < n; ++c) {
                const double cx = ux(clutter_eng);
                const double cy = uy(clutter_eng);
                scan.points.emplace_back(cx, cy);
                scan.is_clutter.push_back(true);
            }
        }
        // Fisher-Yates on both arrays together.
        for (std::size_t i = scan.points.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            const std::size_t j = pick(order_eng);
            std::swap(scan.points[i - 1], scan.points[j]);
            const bool tmp = scan.is_clutter[i - 1];
            scan.is_clutter[i - 1] = scan.is_clutter[j];
            scan.is_clutter[j] = tmp;
        }
        scans.push_back(std::move(scan));
    }
    return scans;
}

GaussianMaxMixture region_prior(const Region& region, double velocity_var) {
    const Eigen::Vector2d c = region.center();
    Eigen::VectorXd mean(4);
    mean << c.x(), 0.0, c.y(), 0.0;
    const double sx = 0.5 * region.width();
    const double sy = 0.5 * region.height();
    Eigen::VectorXd diag(4);
    diag << sx * sx, velocity_var, sy * sy, velocity_var;
    return GaussianMaxMixture({{1.0, GaussianPossibility(mean, diag.asDiagonal().toDenseMatrix())}});
}

GaussianMaxMixture build_birth_mixture(const Scan& previous_scan, const BirthConfig& birth,
                                       double noise_var, const Region& region) {
    if (previous_scan.empty()) return region_prior(region, birth.velocity_var);

    const double pos_var = noise_var + birth.position_var_margin;
    Eigen::VectorXd diag(4);
    diag << pos_var, birth.velocity_var, pos_var, birth.velocity_var;
    const Eigen::MatrixXd cov = diag.asDiagonal().toDenseMatrix();

    std::vector<WeightedComponent> comps;
    comps.reserve(previous_scan.size());
    for (const auto& z : previous_scan.points) {
        Eigen::VectorXd mean(4);
        mean << z.x(), 0.0, z.y(), 0.0;
        comps.push_back({1.0, GaussianPossibility(mean, cov)});
    }
    return GaussianMaxMixture(std::move(comps));
}

}  // namespace possfuse
