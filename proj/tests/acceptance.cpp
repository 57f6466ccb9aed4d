// Acceptance suite: one PASS/FAIL line per criterion.
// Exit status is nonzero only when a criterion outside kExpectedFailures fails.
// Arguments, if any, select criteria by number.

#include "dppphd/config.hpp"
#include "dppphd/dpp_filter.hpp"
#include "dppphd/errors.hpp"
#include "dppphd/exact_oracle.hpp"
#include "dppphd/harness.hpp"
#include "dppphd/metrics.hpp"
#include "dppphd/oracle_check.hpp"
#include "test_util.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

using namespace dppphd;
using namespace dppphd::test;
namespace fs = std::filesystem;

namespace {

const std::set<int> kExpectedFailures{4};

struct Outcome {
    bool passed = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string strf(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---- 3: approximation order ----

double closed_form_error(double eps, bool disjoint) {
    DiscretizedKernel k;
    k.grid = GridSpec::unit(4);
    const Eigen::Vector4d d(0.3, 0.2, 0.25, 0.15);
    k.entries = Eigen::MatrixXd::Constant(4, 4, eps);
    k.entries.diagonal() = d;
    const FiniteProcess prior = FiniteProcess::from_dpp(k);
    ObservationModel obs;
    obs.p_d = Eigen::Vector4d::Constant(disjoint ? 1.0 : 0.8);
    obs.l_d = Eigen::MatrixXd::Zero(2, 4);
    if (disjoint)
        obs.l_d << 0.6, 0.4, 0.0, 0.0, 0.0, 0.0, 0.7, 0.3;
    else
        obs.l_d << 0.4, 0.3, 0.2, 0.1, 0.1, 0.2, 0.3, 0.4;
    obs.l_c = Eigen::Vector2d(0.2, 0.3);
    const IndexSet meas{0, 1};
    const UpdateResult r = update_kernel(k, inputs_from_model(obs, meas));
    const Eigen::VectorXd mu = posterior_intensity_exact(prior, obs, meas, prior.max_size());
    const Eigen::MatrixXd rho = posterior_pair_exact(prior, obs, meas, prior.max_size());
    return std::max((r.intensity - mu).cwiseAbs().maxCoeff(), (r.pair - rho).cwiseAbs().maxCoeff());
}

Outcome approximation_order() {
    const double e1 = closed_form_error(0.02, true), e2 = closed_form_error(0.01, true),
                 e3 = closed_form_error(0.005, true);
    const double r1 = e1 / e2, r2 = e2 / e3;
    const bool ok = r1 >= 3.0 && r1 <= 5.0 && r2 >= 3.0 && r2 <= 5.0;
    const double g1 = closed_form_error(0.02, false), g2 = closed_form_error(0.01, false),
                 g3 = closed_form_error(0.005, false), g0 = closed_form_error(0.0, false);
    return {ok, strf("p_d=1, disjoint likelihoods: err %.2e %.2e %.2e, ratios %.2f %.2f in [3,5]; "
                    "overlapping likelihoods, p_d=0.8: err %.2e %.2e %.2e, error at eps=0 %.2e",
                    e1, e2, e3, r1, r2, g1, g2, g3, g0)};
}

// ---- 4: diagonal-only limit ----

Outcome poisson_limit() {
    ExperimentConfig c = preset("death");
    c.smc.diagonal_only = true;
    c.filter = FilterChoice::both;
    c.steps = 20;
    c.mc_runs = 1;
    const ExperimentResult r = run_experiment(c, false);
    const RunRecord& d = r.runs.at(0);
    const RunRecord& p = r.runs.at(1);
    double worst = 0.0;
    int worst_t = 0, first_t = -1;
    for (size_t t = 0; t < d.steps.size(); ++t) {
        const double diff = std::abs(d.steps[t].metrics.count_estimate - p.steps[t].metrics.count_estimate);
        if (diff > 1e-6 && first_t < 0) first_t = static_cast<int>(t);
        if (diff > worst) {
            worst = diff;
            worst_t = static_cast<int>(t);
        }
    }
    return {worst <= 1e-6, strf("max |count_dpp - count_ppp| = %.3e at t=%d over %zu steps; first step above 1e-6: %d",
                               worst, worst_t, d.steps.size(), first_t)};
}

// ---- 5: negative correlation and domain-A stability ----

Outcome spooky_sign() {
    const ExperimentConfig c = preset("spooky");
    const ExperimentResult r = run_experiment(c, false);
    const auto steps = static_cast<size_t>(c.steps);
    double max_corr = -1.0;
    long long positive = 0, recorded = 0;
    std::vector<double> mean_a(steps, 0.0);
    for (const auto& run : r.runs)
        for (size_t t = 0; t < steps; ++t) {
            const auto& s = run.steps[t];
            mean_a[t] += s.count_a / static_cast<double>(r.runs.size());
            if (!s.metrics.corr_ab) continue;
            ++recorded;
            max_corr = std::max(max_corr, *s.metrics.corr_ab);
            positive += *s.metrics.corr_ab > 0.0;
        }
    const int period = c.scenario.schedule.miss_period;
    double worst_change = 0.0;
    std::string per_cycle;
    for (int tm = period; tm < c.steps; tm += period) {
        double base = 0.0;
        for (int t = tm - period + 1; t < tm; ++t) base += mean_a[static_cast<size_t>(t)];
        base /= period - 1;
        const double change = std::abs(mean_a[static_cast<size_t>(tm)] - base) / base;
        worst_change = std::max(worst_change, change);
        per_cycle += strf(" t=%d: %.1f%%", tm, 100.0 * change);
    }
    const bool ok = recorded > 0 && positive == 0 && worst_change < 0.15;
    return {ok, strf("corr_ab recorded %lld times, max %.3e, positive %lld; domain-A change at B-miss steps vs "
                    "cycle mean:%s (bound 15%%)",
                    recorded, max_corr, positive, per_cycle.c_str())};
}

// ---- 6: repulsion degradation ----

Outcome repulsion_degradation() {
    const ExperimentConfig c = preset("repulsion-bias");
    const ExperimentResult r = run_experiment(c, false);
    std::map<double, std::vector<double>> err;  // zeta -> per-run mean |count error|
    for (const auto& run : r.runs) {
        double e = 0.0;
        for (const auto& s : run.steps) e += std::abs(s.metrics.count_estimate - s.metrics.count_truth);
        err[run.zeta].push_back(e / static_cast<double>(run.steps.size()));
    }
    const auto& e0 = err.at(0.0);
    const auto& e8 = err.at(8.0);
    const auto n = static_cast<double>(e0.size());
    double md = 0.0;
    for (size_t i = 0; i < e0.size(); ++i) md += (e8[i] - e0[i]) / n;
    double var = 0.0;
    for (size_t i = 0; i < e0.size(); ++i) var += std::pow(e8[i] - e0[i] - md, 2) / (n - 1.0);
    const double tstat = md / std::sqrt(var / n);
    const boost::math::students_t dist(n - 1.0);
    const double pval = boost::math::cdf(boost::math::complement(dist, tstat));
    const auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    std::string all;
    for (const auto& [z, v] : err) all += strf(" zeta=%g: %.3f", z, mean(v));
    return {md > 0.0 && pval < 0.05, strf("mean |count error|:%s; paired t=%.2f, one-sided p=%.2e over %zu runs", all.c_str(),
                                         tstat, pval, e0.size())};
}

// ---- 7: kernel invariants over randomized cycles ----

Outcome kernel_invariants() {
    Philox rng = make_rng(2024, 0, Stream::test);
    const KernelOptions opt;
    long long cycles = 0, bad = 0, reinits = 0;
    ClampStats eps_clamps, wide_clamps;
    std::string first_bad;
    const int chains = 100, steps = 101;
    for (int chain = 0; chain < chains; ++chain) {
        ScenarioConfig sc;
        const double side = uniform(rng, 60.0, 200.0);
        sc.sensor.window.rects = {Rect{0.0, side, 0.0, side}};
        sc.sensor.p_d = uniform(rng, 0.5, 0.99);
        sc.sensor.clutter_mean = uniform(rng, 0.0, 3.0);
        sc.sensor.sigma_r = uniform(rng, 1.0, 4.0);
        sc.sensor.sigma_b = uniform(rng, 0.02, 0.3);
        sc.targets_per_rect = {1 + static_cast<int>(rng.uniform01() * 4.0)};
        sc.init_uniform = true;
        sc.dynamics.zeta_x = sc.dynamics.zeta_y = uniform(rng, 0.0, 4.0);
        const bool eps_scale = chain % 2 == 0;
        SmcConfig cfg;
        cfg.n_init = 60 + static_cast<int>(rng.uniform01() * 60.0);
        cfg.p_p = 8 + static_cast<int>(rng.uniform01() * 8.0);
        cfg.p_b = 4 + static_cast<int>(rng.uniform01() * 8.0);
        cfg.cap = 150;
        cfg.gamma0 = uniform(rng, 0.5, 3.0);
        cfg.alpha = eps_scale ? uniform(rng, 0.02, 0.5) : uniform(rng, 0.5, 4.0);
        cfg.eta = uniform(rng, 0.1, 0.3);
        const TruthRun truth = simulate_truth(sc, steps, 5000 + static_cast<std::uint64_t>(chain), 0);
        Philox frng = make_rng(6000 + static_cast<std::uint64_t>(chain), 0, Stream::filter);
        ClampStats& tally = eps_scale ? eps_clamps : wide_clamps;

        const auto check = [&](const FilterState& s, int t, const char* stage) {
            const KernelCheck k = check_kernel(s.kernel, opt);
            const bool ok = k.ok() && s.kernel.size() == s.particles.size() &&
                            s.kernel.grid.size() == s.particles.size();
            if (!ok) {
                ++bad;
                if (first_bad.empty())
                    first_bad = strf(" first failure: chain %d t %d %s (symmetric %d spectrum %d band %d, eig [%.3e, %.3e])",
                                    chain, t, stage, k.symmetric, k.spectrum_ok, k.band_ok, k.min_eigenvalue,
                                    k.max_eigenvalue);
            }
        };
        StepDiagnostics d0;
        FilterState st = dpp_initialize(truth.scans[0], sc.sensor, cfg, frng, &d0, opt);
        tally.merge(d0.sqrt_clamps);
        check(st, 0, "initialize");
        for (int t = 1; t < steps; ++t) {
            StepDiagnostics diag;
            const FilterState pred = dpp_predict(st, sc.dynamics, cfg, sc.sensor.window, frng, &diag, opt);
            check(pred, t, "predict");
            try {
                st = dpp_correct(pred.particles, pred.kernel, truth.scans[static_cast<size_t>(t)], sc.sensor, cfg, frng,
                                 &diag, opt);
            } catch (const DegenerateIntensity&) {
                ++reinits;
                StepDiagnostics fresh;
                st = dpp_initialize(truth.scans[static_cast<size_t>(t)], sc.sensor, cfg, frng, &fresh, opt);
            }
            tally.merge(diag.sqrt_clamps);
            check(st, t, "update");
            ++cycles;
        }
    }
    const auto frac = [](const ClampStats& c) {
        return c.evaluated ? static_cast<double>(c.clamped) / static_cast<double>(c.evaluated) : 0.0;
    };
    const bool ok = cycles >= 10000 && bad == 0 && frac(eps_clamps) < 0.05;
    return {ok, strf("%lld cycles, %lld kernel check failures, %lld re-initializations; sqrt clamps: eps-scale alpha "
                    "%lld/%lld = %.2f%%, alpha in [0.5,4] %lld/%lld = %.2f%%, largest %.2e%s",
                    cycles, bad, reinits, eps_clamps.clamped, eps_clamps.evaluated, 100.0 * frac(eps_clamps),
                    wide_clamps.clamped, wide_clamps.evaluated, 100.0 * frac(wide_clamps),
                    std::max(eps_clamps.largest, wide_clamps.largest), first_bad.c_str())};
}

// ---- 8: metrics against brute force ----

Outcome metric_correctness() {
    Philox rng = make_rng(8, 0, Stream::test);
    double worst_ospa = 0.0, worst_omat = 0.0;
    for (int i = 0; i < 200; ++i) {
        const PointSet x = random_points(rng, 1 + static_cast<size_t>(rng.uniform01() * 5.0), 150.0);
        const PointSet y = random_points(rng, 1 + static_cast<size_t>(rng.uniform01() * 5.0), 150.0);
        worst_ospa = std::max(worst_ospa, std::abs(ospa(x, y) - brute_ospa(x, y, 100.0, 2.0)));
        worst_omat = std::max(worst_omat, std::abs(omat(x, y) - brute_omat(x, y, 2.0)));
    }
    long long violations = 0;
    double worst_triangle = -1e300;
    for (int i = 0; i < 1000; ++i) {
        const auto n = [&] { return static_cast<size_t>(rng.uniform01() * 6.0); };
        const PointSet x = random_points(rng, n(), 150.0), y = random_points(rng, n(), 150.0),
                       z = random_points(rng, n(), 150.0);
        const double xy = ospa(x, y), yx = ospa(y, x), yz = ospa(y, z), xz = ospa(x, z), xx = ospa(x, x);
        worst_triangle = std::max(worst_triangle, xz - xy - yz);
        const bool ok = std::abs(xy - yx) <= 1e-9 && xz <= xy + yz + 1e-9 && xx <= 1e-9 && xy >= 0.0 &&
                        xy <= 100.0 + 1e-9 && (xy > 1e-9 || x.size() == y.size());
        violations += !ok;
    }
    const bool ok = worst_ospa <= 1e-9 && worst_omat <= 1e-9 && violations == 0;
    return {ok, strf("200 instances: max |ospa - brute| %.2e, max |omat - brute| %.2e; 1000 triples: %lld axiom "
                    "violations, max triangle excess %.2e",
                    worst_ospa, worst_omat, violations, worst_triangle)};
}

// ---- 9: determinism ----

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "dppphd_acceptance_determinism";
    fs::remove_all(root);
    std::string detail;
    bool ok = true;
    for (const char* name : {"repulsion-bias", "good-ratio", "spooky"}) {
        ExperimentConfig c = preset(name);
        c.seed = 20240917;
        if (std::string(name) == "spooky") {
            c.mc_runs = 4;
            c.steps = 12;
        }
        std::vector<std::string> outputs;
        for (int threads : {1, 1, 4}) {
            c.threads = threads;
            c.output_dir = (root / (std::string(name) + "_" + std::to_string(outputs.size()))).string();
            (void)run_experiment(c, true);
            outputs.push_back(slurp(fs::path(c.output_dir) / "steps.csv"));
        }
        const bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[0] == outputs[2];
        ok = ok && same;
        detail += strf("%s%s %s (%zu bytes)", detail.empty() ? "" : "; ", name, same ? "identical" : "DIFFERENT",
                      outputs[0].size());
    }
    fs::remove_all(root);
    return {ok, detail + " across two runs with 1 thread and one with 4"};
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
    spdlog::set_level(spdlog::level::err);
    struct Criterion {
        int id;
        const char* name;
        double budget;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "Poisson reduction", 1.0,
         [] {
             const CheckResult r = poisson_reduction_check();
             return Outcome{r.passed, strf("max error %.2e (tol %.0e)", r.max_error, r.tolerance)};
         }},
        {2, "oracle equivalence", 30.0,
         [] {
             const CheckResult r = oracle_equivalence_check();
             return Outcome{r.passed, strf("20 random priors, max error %.2e (tol %.0e)", r.max_error, r.tolerance)};
         }},
        {3, "approximation order", 10.0, approximation_order},
        {4, "diagonal-only DPP equals PPP", 10.0, poisson_limit},
        {5, "negative cross-domain correlation", 300.0, spooky_sign},
        {6, "repulsion degrades the Poisson filter", 300.0, repulsion_degradation},
        {7, "kernel invariants", 120.0, kernel_invariants},
        {8, "metric correctness", 30.0, metric_correctness},
        {9, "determinism", 60.0, determinism},
    };
    int unexpected = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = seconds_since(t0);
        const bool in_time = secs < c.budget;
        const bool passed = o.passed && in_time;
        const bool expected = kExpectedFailures.count(c.id) > 0;
        const char* tag = passed ? "PASS" : (expected ? "FAIL (expected)" : "FAIL");
        std::printf("[%s] %d %s: %s; %.1f s (budget %.0f s)\n", tag, c.id, c.name, o.detail.c_str(), secs, c.budget);
        std::fflush(stdout);
        if (!passed && !expected) ++unexpected;
    }
    return unexpected == 0 ? 0 : 1;
}
