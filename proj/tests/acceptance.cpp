// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any
// criterion fails.

#include "possfuse/config.hpp"
#include "possfuse/experiment.hpp"
#include "possfuse/fusion.hpp"
#include "possfuse/metrics.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace possfuse;
using namespace possfuse::testing;

namespace {

struct Outcome {
    bool passed;
    std::string detail;
};

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

BernoulliPossState random_state(std::mt19937_64& eng, Eigen::Index dim) {
    std::uniform_real_distribution<double> q(0.05, 1.0);
    const bool present_top = std::bernoulli_distribution(0.5)(eng);
    const double other = q(eng);
    return {present_top ? other : 1.0, present_top ? 1.0 : other, random_mixture(eng, dim)};
}

const double kOmegas[] = {0.1, 0.3, 0.5, 0.7, 0.9};

Outcome criterion1() {
    std::mt19937_64 eng(2024);
    double worst = 0.0;
    std::size_t points = 0;
    for (const Eigen::Index dim : {1, 2}) {
        const auto pts = grid(dim, dim == 1 ? 401 : 61, 8.0);
        for (int pair = 0; pair < 100; ++pair) {
            const auto a = random_state(eng, dim);
            const auto b = random_state(eng, dim);
            std::vector<double> sa;
            std::vector<double> sb;
            for (const auto& x : pts) {
                sa.push_back(eval_mixture(a.spatial, x));
                sb.push_back(eval_mixture(b.spatial, x));
            }
            for (const double omega : kOmegas) {
                const auto f = fuse_chernoff(a, b, omega);
                for (std::size_t i = 0; i < pts.size(); ++i) {
                    const double expect = std::pow(sa[i], 1.0 - omega) * std::pow(sb[i], omega) / f.alpha;
                    worst = std::max(worst, std::abs(eval_mixture(f.state.spatial, pts[i]) - expect));
                    ++points;
                }
            }
        }
    }
    return {worst <= 1e-9, format("%zu grid points, max abs error %.3e (tol 1e-9)", points, worst)};
}

bool identical(const BernoulliPossState& x, const BernoulliPossState& y) {
    if (x.q_absent != y.q_absent || x.q_present != y.q_present || x.spatial.size() != y.spatial.size())
        return false;
    for (std::size_t i = 0; i < x.spatial.size(); ++i) {
        if (x.spatial[i].weight != y.spatial[i].weight ||
            x.spatial[i].gaussian.mean() != y.spatial[i].gaussian.mean() ||
            x.spatial[i].gaussian.covariance() != y.spatial[i].gaussian.covariance())
            return false;
    }
    return true;
}

Outcome criterion2() {
    std::mt19937_64 eng(2025);
    int endpoint_failures = 0;
    double worst = 0.0;
    double worst_q = 0.0;
    for (const Eigen::Index dim : {1, 2}) {
        const auto pts = grid(dim, dim == 1 ? 401 : 61, 8.0);
        for (int t = 0; t < 50; ++t) {
            const auto a = random_state(eng, dim);
            const auto b = random_state(eng, dim);
            if (!identical(fuse_chernoff(a, b, 0.0).state, a)) ++endpoint_failures;
            if (!identical(fuse_chernoff(a, b, 1.0).state, b)) ++endpoint_failures;
            for (const double omega : kOmegas) {
                const auto f = fuse_chernoff(a, a, omega);
                worst_q = std::max({worst_q, std::abs(f.state.q_absent - a.q_absent),
                                    std::abs(f.state.q_present - a.q_present)});
                for (const auto& x : pts) {
                    worst = std::max(worst, std::abs(eval_mixture(f.state.spatial, x) - eval_mixture(a.spatial, x)));
                }
            }
        }
    }
    return {endpoint_failures == 0 && worst <= 1e-9 && worst_q <= 1e-9,
            format("endpoint mismatches %d; idempotence max abs error %.3e, presence %.3e (tol 1e-9)",
                   endpoint_failures, worst, worst_q)};
}

Outcome criterion3() {
    ExperimentConfig cfg;
    cfg.runs = 50;
    std::atomic<long> states{0};
    std::atomic<long> violations{0};
    RunOptions opts;
    opts.observer = [&](const StateEvent& e) {
        ++states;
        if (!satisfies_invariants(e.state, 1e-12)) ++violations;
    };
    try {
        run_fusion_independent(cfg, opts);
        run_fusion_dependent(cfg, opts);
    } catch (const std::exception& e) {
        return {false, std::string("run aborted: ") + e.what()};
    }
    return {violations.load() == 0 && states.load() > 0,
            format("%ld states checked over 50 seeds x 2 experiments, %ld violations (tol 1e-12)",
                   states.load(), violations.load())};
}

Outcome criterion4() {
    ExperimentConfig cfg;
    cfg.runs = 100;
    const auto result = run_fusion_dependent(cfg);
    const auto& single = result.aggregate.at("single").mean_trace;
    const auto& chernoff = result.aggregate.at("chernoff").mean_trace;
    const auto& indep = result.aggregate.at("independent").mean_trace;
    double worst_rel = 0.0;
    double worst_ratio = 0.0;
    bool missing = false;
    for (int k = 10; k <= 50; ++k) {
        const auto i = static_cast<std::size_t>(k - 1);
        if (std::isnan(single[i]) || std::isnan(chernoff[i]) || std::isnan(indep[i])) {
            missing = true;
            continue;
        }
        worst_rel = std::max(worst_rel, std::abs(chernoff[i] - single[i]) / single[i]);
        worst_ratio = std::max(worst_ratio, indep[i] / single[i]);
    }
    return {!missing && worst_rel <= 0.05 && worst_ratio < 0.7,
            format("steps 10-50: max |chernoff/single - 1| = %.4f (tol 0.05), max independent/single = %.4f "
                   "(< 0.7); window means single %.4f chernoff %.4f independent %.4f",
                   worst_rel, worst_ratio, window_mean(single, 10, 50), window_mean(chernoff, 10, 50),
                   window_mean(indep, 10, 50))};
}

Outcome criterion5() {
    ExperimentConfig cfg;
    cfg.runs = 200;
    const auto result = run_fusion_independent(cfg);
    const auto& agg = result.aggregate;
    const double s1 = window_mean(agg.at("sensor1").mean_ospa, 10, 50);
    const double s2 = window_mean(agg.at("sensor2").mean_ospa, 10, 50);
    const double cen = window_mean(agg.at("centralized").mean_ospa, 10, 50);
    const double che = window_mean(agg.at("chernoff").mean_ospa, 10, 50);
    const double slack = 0.05 * cfg.metrics.ospa.cutoff;
    const double worse = std::max(s1, s2);
    const bool ok = cen <= che && che <= std::min(s1, s2) + slack && worse - cen > 0.0 && worse - che > 0.0;
    return {ok, format("mean OSPA steps 10-50: sensor1 %.4f sensor2 %.4f centralized %.4f chernoff %.4f "
                       "(slack %.2f)",
                       s1, s2, cen, che, slack)};
}

Outcome criterion6() {
    const auto d = probability_interval_to_possibility(0.5, 1.0);
    return {d.d_detect == 1.0 && d.d_nondetect == 0.5,
            format("[0.5, 1] -> d1 = %.17g, d0 = %.17g", d.d_detect, d.d_nondetect)};
}

Outcome criterion7() {
    std::mt19937_64 eng(2027);
    double worst_sup = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Eigen::Index nx = 1 + t % 2;
        const Eigen::Index nz = 1 + (t / 2) % nx;
        const Eigen::MatrixXd H = random_spd(eng, nx).topRows(nz);
        const Eigen::MatrixXd R = random_spd(eng, nz);
        const Eigen::VectorXd m = random_vector(eng, nx, 2.0);
        const Eigen::MatrixXd P = random_spd(eng, nx);
        const Eigen::VectorXd z = H * m + random_vector(eng, nz, 2.0);
        const GaussianPossibility prior(m, P);
        const GaussianPossibility noise(Eigen::VectorXd::Zero(nz), R);
        auto f = [&](const Eigen::VectorXd& x) { return eval_gaussian(noise, z - H * x) * eval_gaussian(prior, x); };
        const double g = grid_maximize(f, Eigen::VectorXd::Constant(nx, -15.0), Eigen::VectorXd::Constant(nx, 15.0),
                                       nx == 1 ? 3001 : 151, 4);
        worst_sup = std::max(worst_sup, std::abs(g - sup_linear_gaussian_product(z, H, R, m, P)));
    }

    int mismatches = 0;
    int cases = 0;
    std::uniform_int_distribution<std::size_t> size(0, 4);
    for (int t = 0; t < 2000; ++t) {
        std::vector<Eigen::VectorXd> X;
        std::vector<Eigen::VectorXd> Y;
        const auto nx = size(eng);
        const auto ny = size(eng);
        for (std::size_t i = 0; i < nx; ++i) X.push_back(random_vector(eng, 2, 10.0));
        for (std::size_t i = 0; i < ny; ++i) Y.push_back(random_vector(eng, 2, 10.0));
        for (const double p : {1.0, 2.0}) {
            ++cases;
            if (ospa(X, Y, 10.0, p) != ospa_bruteforce(X, Y, 10.0, p)) ++mismatches;
        }
    }
    return {worst_sup <= 1e-6 && mismatches == 0,
            format("sup-product max abs error %.3e over 50 instances (tol 1e-6); OSPA %d/%d exact matches",
                   worst_sup, cases - mismatches, cases)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome criterion8() {
    ExperimentConfig cfg;
    cfg.runs = 40;
    const auto root = std::filesystem::temp_directory_path() / "possfuse_acceptance_determinism";
    std::filesystem::remove_all(root);
    int compared = 0;
    int differing = 0;
    for (const auto kind : {ExperimentKind::single, ExperimentKind::fuse_independent, ExperimentKind::fuse_dependent}) {
        std::vector<std::filesystem::path> dirs;
        int idx = 0;
        for (const unsigned threads : {1u, 4u, 4u, 2u}) {
            RunOptions opts;
            opts.threads = threads;
            opts.keep_scans = true;
            const auto dir = root / (std::to_string(static_cast<int>(kind)) + "_" + std::to_string(idx++));
            write_results(dir.string(), run_experiment(kind, cfg, opts));
            dirs.push_back(dir);
        }
        for (const char* file : {"ospa.csv", "trace.csv", "presence.csv", "scans.csv"}) {
            const auto ref = slurp(dirs[0] / file);
            for (std::size_t i = 1; i < dirs.size(); ++i) {
                ++compared;
                if (ref.empty() || slurp(dirs[i] / file) != ref) ++differing;
            }
        }
    }
    std::filesystem::remove_all(root);
    return {differing == 0, format("%d file comparisons across 1/2/4 workers and repeats, %d differ", compared, differing)};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
        double limit_s;
    };
    const Criterion criteria[] = {
        {1, "Chernoff Gaussian-max fusion is pointwise exact", criterion1, 60.0},
        {2, "endpoint recovery and idempotence", criterion2, 0.0},
        {3, "normalization invariants over full runs", criterion3, 0.0},
        {4, "dependent sensors: Chernoff keeps, independent shrinks covariance", criterion4, 300.0},
        {5, "independent sensors: fused OSPA ordering", criterion5, 600.0},
        {6, "detection-possibility transform", criterion6, 0.0},
        {7, "oracle suite (sup-product, OSPA assignment)", criterion7, 0.0},
        {8, "byte-identical outputs across repeats and worker counts", criterion8, 0.0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = c.limit_s <= 0.0 || secs < c.limit_s;
        const bool ok = out.passed && in_time;
        if (!ok) ++failed;
        std::printf("%s criterion %d: %s -- %s [%.2fs%s]\n", ok ? "PASS" : "FAIL", c.id, c.name, out.detail.c_str(),
                    secs, in_time ? "" : ", over time limit");
        std::fflush(stdout);
    }
    std::printf("%d of 8 criteria passed\n", 8 - failed);
    return failed == 0 ? 0 : 1;
}
