#include "dppphd/harness.hpp"

#include "dppphd/dpp_filter.hpp"
#include "dppphd/errors.hpp"
#include "dppphd/ppp_filter.hpp"

#include <boost/random/normal_distribution.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <ostream>
#include <thread>
#include <tuple>

#ifndef DPPPHD_BUILD_ID
#define DPPPHD_BUILD_ID "unknown"
#endif

namespace dppphd {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double normal(Philox& rng, double sd) {
    if (sd <= 0.0) return 0.0;
    boost::random::normal_distribution<double> nd(0.0, sd);
    return nd(rng);
}

State5 place_in(const Rect& r, const ScenarioConfig& sc, Philox& rng) {
    State5 s = State5::Zero();
    if (sc.init_uniform) {
        s(0) = r.x0 + (r.x1 - r.x0) * rng.uniform01();
        s(2) = r.y0 + (r.y1 - r.y0) * rng.uniform01();
    } else {
        const double cx = 0.5 * (r.x0 + r.x1);
        const double cy = 0.5 * (r.y0 + r.y1);
        s(0) = std::clamp(cx + normal(rng, sc.init_spread * (r.x1 - r.x0)), r.x0, r.x1);
        s(2) = std::clamp(cy + normal(rng, sc.init_spread * (r.y1 - r.y0)), r.y0, r.y1);
    }
    const double speed = sc.init_speed;
    s(1) = normal(rng, speed);
    s(3) = normal(rng, speed);
    return s;
}

SensorConfig sensor_at(const ScenarioConfig& sc, int t) {
    SensorConfig s = sc.sensor;
    if (sc.clutter_switch_t >= 0 && sc.clutter_mean_late >= 0.0 && t > sc.clutter_switch_t)
        s.clutter_mean = sc.clutter_mean_late;
    return s;
}

void put(std::ostream& os, double v) {
    if (std::isnan(v))
        os << "nan";
    else
        os << v;
}

void put(std::ostream& os, const std::optional<double>& v) { put(os, v.value_or(kNaN)); }

std::vector<FilterChoice> filters_of(FilterChoice f) {
    if (f == FilterChoice::both) return {FilterChoice::dpp, FilterChoice::ppp};
    return {f};
}

std::vector<double> zetas_of(const ExperimentConfig& cfg) {
    if (cfg.zeta_values.empty()) return {cfg.scenario.dynamics.zeta_x};
    return cfg.zeta_values;
}

ScenarioConfig with_zeta(const ExperimentConfig& cfg, double zeta) {
    ScenarioConfig sc = cfg.scenario;
    if (!cfg.zeta_values.empty()) sc.dynamics.zeta_x = sc.dynamics.zeta_y = zeta;
    return sc;
}

} // namespace

std::vector<Target> initial_targets(const ScenarioConfig& sc, Philox& rng, std::vector<int>* rect_of) {
    std::vector<Target> out;
    if (rect_of) rect_of->clear();
    int id = 0;
    for (size_t r = 0; r < sc.sensor.window.rects.size(); ++r) {
        const int n = r < sc.targets_per_rect.size() ? sc.targets_per_rect[r] : 0;
        for (int k = 0; k < n; ++k) {
            out.push_back({id++, place_in(sc.sensor.window.rects[r], sc, rng)});
            if (rect_of) rect_of->push_back(static_cast<int>(r));
        }
    }
    return out;
}

std::vector<ScheduleEntry> make_schedule(const ScenarioConfig& sc, const std::vector<Target>& initial,
                                         const std::vector<int>& initial_rect, int steps, Philox& rng) {
    std::vector<ScheduleEntry> out;
    const auto& plan = sc.schedule;
    if (plan.miss_period > 0) {
        std::vector<int> ids;
        for (size_t i = 0; i < initial.size(); ++i)
            if (initial_rect[i] == plan.miss_rect) ids.push_back(initial[i].id);
        for (int t = plan.miss_period; t < steps; t += plan.miss_period)
            if (!ids.empty()) out.push_back({t, ScheduleEntry::Kind::miss, ids, {}});
    }
    if (plan.death_t >= 0 && plan.death_t < steps && plan.death_count > 0) {
        std::vector<int> ids;
        for (const auto& t : initial) ids.push_back(t.id);
        const size_t n = std::min(ids.size(), static_cast<size_t>(plan.death_count));
        for (size_t i = 0; i < n; ++i) {
            const size_t j = i + static_cast<size_t>(rng.uniform01() * static_cast<double>(ids.size() - i));
            std::swap(ids[i], ids[std::min(j, ids.size() - 1)]);
        }
        ids.resize(n);
        std::sort(ids.begin(), ids.end());
        out.push_back({plan.death_t, ScheduleEntry::Kind::death, ids, {}});
    }
    if (plan.birth_t >= 0 && plan.birth_t < steps && plan.birth_count > 0) {
        int next = 0;
        for (const auto& t : initial) next = std::max(next, t.id + 1);
        ScheduleEntry e{plan.birth_t, ScheduleEntry::Kind::birth, {}, {}};
        for (int k = 0; k < plan.birth_count; ++k) {
            e.ids.push_back(next++);
            e.states.push_back(place_in(sc.sensor.window.rects.front(), sc, rng));
        }
        out.push_back(std::move(e));
    }
    return out;
}

TruthRun simulate_truth(const ScenarioConfig& sc, int steps, std::uint64_t seed, int run) {
    const auto r = static_cast<std::uint32_t>(run);
    Philox truth_rng = make_rng(seed, r, Stream::truth);
    Philox sensor_rng = make_rng(seed, r, Stream::sensor);
    Philox schedule_rng = make_rng(seed, r, Stream::schedule);

    TruthRun out;
    std::vector<int> rect_of;
    std::vector<Target> targets = initial_targets(sc, truth_rng, &rect_of);
    out.schedule = make_schedule(sc, targets, rect_of, steps, schedule_rng);
    std::vector<int> ids;
    for (const auto& t : targets) ids.push_back(t.id);
    const auto events = scripted_events(out.schedule, ids);

    for (int t = 0; t < steps; ++t) {
        const auto ev = events.find(t);
        if (t > 0) {
            targets = step_dynamics(targets, sc.dynamics, truth_rng);
            if (ev != events.end()) {
                const auto& deaths = ev->second.deaths;
                targets.erase(std::remove_if(targets.begin(), targets.end(),
                                             [&](const Target& x) { return deaths.count(x.id) > 0; }),
                              targets.end());
                targets.insert(targets.end(), ev->second.births.begin(), ev->second.births.end());
            }
        }
        static const std::set<int> none;
        const std::set<int>& misses = ev != events.end() ? ev->second.misses : none;
        out.scans.push_back(generate_scan(targets, sensor_at(sc, t), misses, t, sensor_rng));
        out.targets.push_back(targets);
    }
    return out;
}

RunRecord run_filter(const ExperimentConfig& cfg, const TruthRun& truth, int run, double zeta, FilterChoice which) {
    if (which == FilterChoice::both) throw std::invalid_argument("run_filter needs a single filter");
    const auto r = static_cast<std::uint32_t>(run);
    Philox filter_rng = make_rng(cfg.seed, r, Stream::filter);
    Philox extraction_rng = make_rng(cfg.seed, r, Stream::extraction);
    const ScenarioConfig sc = with_zeta(cfg, zeta);
    const auto start = std::chrono::steady_clock::now();

    RunRecord rec;
    rec.run = run;
    rec.zeta = zeta;
    rec.filter = which;

    std::optional<Rect> dom_a, dom_b;
    if (cfg.domains) {
        dom_a = sc.sensor.window.rects.at(static_cast<size_t>(cfg.domains->first));
        dom_b = sc.sensor.window.rects.at(static_cast<size_t>(cfg.domains->second));
    }

    FilterState dpp;
    WeightedParticles ppp;
    const int steps = static_cast<int>(truth.scans.size());
    for (int t = 0; t < steps; ++t) {
        const Scan& scan = truth.scans[static_cast<size_t>(t)];
        const SensorConfig sensor = sensor_at(sc, t);
        StepRecord step;
        StepDiagnostics diag;

        if (which == FilterChoice::dpp) {
            try {
                dpp = t == 0 ? dpp_initialize(scan, sensor, cfg.smc, filter_rng, &diag, cfg.kernel)
                             : dpp_step(dpp, scan, sc.dynamics, sensor, cfg.smc, filter_rng, &diag, cfg.kernel);
            } catch (const DegenerateIntensity& e) {
                spdlog::warn("run {} t {}: {}; reinitializing", run, t, e.what());
                diag = {};
                try {
                    dpp = dpp_initialize(scan, sensor, cfg.smc, filter_rng, &diag, cfg.kernel);
                } catch (const DegenerateIntensity&) {
                    spdlog::warn("run {} t {}: scan has zero likelihood under a fresh prior; keeping the prior", run, t);
                    Initialized init = init_particles(cfg.smc, sensor.window, filter_rng, cfg.kernel);
                    dpp.gamma = kernel_mass(init.kernel);
                    dpp.particles = std::move(init.particles);
                    dpp.kernel = std::move(init.kernel);
                }
                step.reinitialized = true;
                ++rec.reinitializations;
            }
        } else {
            try {
                ppp = t == 0 ? ppp_initialize(scan, sensor, cfg.smc, filter_rng)
                             : ppp_step(ppp, scan, sc.dynamics, sensor, cfg.smc, filter_rng);
            } catch (const DegenerateIntensity& e) {
                spdlog::warn("run {} t {}: {}; reinitializing", run, t, e.what());
                try {
                    ppp = ppp_initialize(scan, sensor, cfg.smc, filter_rng);
                } catch (const DegenerateIntensity&) {
                    spdlog::warn("run {} t {}: scan has zero likelihood under a fresh prior; keeping the prior", run, t);
                    ppp.particles = sample_uniform(cfg.smc.n_init, sensor.window, cfg.smc, Origin::birth, filter_rng);
                    ppp.weights = Eigen::VectorXd::Constant(cfg.smc.n_init,
                                                            cfg.smc.gamma0 / static_cast<double>(cfg.smc.n_init));
                }
                step.reinitialized = true;
                ++rec.reinitializations;
            }
        }

        const ParticleSet& particles = which == FilterChoice::dpp ? dpp.particles : ppp.particles;
        Eigen::VectorXd mass;
        double gamma = 0.0;
        if (which == FilterChoice::dpp) {
            mass = dpp.kernel.entries.diagonal().cwiseProduct(dpp.kernel.grid.weights);
            gamma = kernel_mass(dpp.kernel);
        } else {
            mass = ppp.weights;
            gamma = ppp.mass();
        }
        const Eigen::MatrixXd pos = particles.positions();
        const PointSet est = extract_estimates(pos, mass, gamma, extraction_rng);
        const std::vector<Target>& visible = truth.targets[static_cast<size_t>(t)];
        const PointSet truth_pts = target_positions(visible);

        MetricRecord& m = step.metrics;
        m.t = t;
        m.ospa = ospa(truth_pts, est, cfg.ospa_c, cfg.ospa_p);
        if (!truth_pts.empty() && !est.empty()) m.omat = omat(truth_pts, est, cfg.ospa_p);
        const GoodEstimate good = good_estimate_stats(scan, est, visible);
        m.good_ratio = good.ratio;
        m.gain = good.gain;
        m.count_estimate = gamma;
        m.count_truth = static_cast<int>(visible.size());

        step.count_a = step.count_b = kNaN;
        if (dom_a && dom_b) {
            const IndexSet ia = region_indices(particles, *dom_a);
            const IndexSet ib = region_indices(particles, *dom_b);
            step.count_a = step.count_b = 0.0;
            for (int i : ia) step.count_a += mass(i);
            for (int i : ib) step.count_b += mass(i);
            if (which == FilterChoice::dpp) {
                try {
                    m.corr_ab = correlation_estimate(dpp.kernel, ia, ib);
                } catch (const DegenerateVariance&) {
                }
            }
        }
        step.particles = particles.size();
        step.sqrt_clamped = diag.sqrt_clamps.clamped;
        step.sqrt_evaluated = diag.sqrt_clamps.evaluated;
        rec.sqrt_clamps.merge(diag.sqrt_clamps);
        rec.det_clamps.merge(diag.det_clamps);
        spdlog::debug("run {} {} t={} particles={} gamma={:.4f} ospa={:.3f}", run, to_string(which), t,
                      step.particles, gamma, m.ospa);
        rec.steps.push_back(step);
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (rec.sqrt_clamps.above_threshold > 0)
        spdlog::warn("run {} ({}): {} of {} off-diagonal radicands clamped above threshold, largest {:.3g}", run,
                     to_string(which), rec.sqrt_clamps.above_threshold, rec.sqrt_clamps.evaluated,
                     rec.sqrt_clamps.largest);
    return rec;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_outputs) {
    cfg.validate();
    ExperimentResult result;
    result.zetas = zetas_of(cfg);
    const auto filters = filters_of(cfg.filter);
    const size_t jobs = result.zetas.size() * static_cast<size_t>(cfg.mc_runs);

    std::vector<std::vector<RunRecord>> records(jobs);
    result.truths.resize(jobs);
    std::vector<std::exception_ptr> errors(jobs);
    std::atomic<size_t> next{0};

    auto worker = [&]() {
        for (size_t job = next++; job < jobs; job = next++) {
            try {
                const size_t zi = job / static_cast<size_t>(cfg.mc_runs);
                const int run = static_cast<int>(job % static_cast<size_t>(cfg.mc_runs));
                const double zeta = result.zetas[zi];
                result.truths[job] = simulate_truth(with_zeta(cfg, zeta), cfg.steps, cfg.seed, run);
                for (FilterChoice f : filters) records[job].push_back(run_filter(cfg, result.truths[job], run, zeta, f));
                spdlog::debug("job {} done", job);
            } catch (...) {
                errors[job] = std::current_exception();
            }
        }
    };
    const size_t n_threads = std::min(static_cast<size_t>(cfg.threads), std::max<size_t>(jobs, 1));
    std::vector<std::thread> pool;
    for (size_t i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    for (auto& v : records)
        for (auto& r : v) result.runs.push_back(std::move(r));

    if (write_outputs) {
        namespace fs = std::filesystem;
        const fs::path dir(cfg.output_dir);
        fs::create_directories(dir);
        std::ofstream steps(dir / "steps.csv");
        write_steps_csv(steps, result);
        std::ofstream runs(dir / "runs.csv");
        write_runs_csv(runs, result);
        std::ofstream summary(dir / "summary.csv");
        write_summary_csv(summary, result);
        std::ofstream meta(dir / "meta.txt");
        write_meta(meta, cfg);
        for (size_t zi = 0; zi < result.zetas.size(); ++zi) {
            const std::string suffix = cfg.zeta_values.empty() ? "" : "_zeta" + std::to_string(zi);
            std::ofstream truth(dir / ("truth" + suffix + ".csv"));
            write_truth_csv(truth, result, zi);
            std::ofstream scans(dir / ("scans" + suffix + ".csv"));
            write_scans_csv(scans, result, zi);
        }
        if (!steps || !runs || !summary || !meta) throw std::runtime_error("failed writing to " + dir.string());
        spdlog::info("wrote {} runs to {}", result.runs.size(), dir.string());
    }
    return result;
}

void write_steps_csv(std::ostream& os, const ExperimentResult& r) {
    const auto old = os.precision(17);
    os << "run,zeta,filter,t,ospa,omat,good_ratio,gain,count_estimate,count_truth,corr_ab,count_a,count_b,"
          "particles,sqrt_clamped,sqrt_evaluated,reinit\n";
    for (const auto& run : r.runs) {
        for (const auto& s : run.steps) {
            const auto& m = s.metrics;
            os << run.run << ',' << run.zeta << ',' << to_string(run.filter) << ',' << m.t << ',';
            put(os, m.ospa);
            os << ',';
            put(os, m.omat);
            os << ',';
            put(os, m.good_ratio);
            os << ',';
            put(os, m.gain);
            os << ',';
            put(os, m.count_estimate);
            os << ',' << m.count_truth << ',';
            put(os, m.corr_ab);
            os << ',';
            put(os, s.count_a);
            os << ',';
            put(os, s.count_b);
            os << ',' << s.particles << ',' << s.sqrt_clamped << ',' << s.sqrt_evaluated << ','
               << (s.reinitialized ? 1 : 0) << '\n';
        }
    }
    os.precision(old);
}

void write_runs_csv(std::ostream& os, const ExperimentResult& r) {
    const auto old = os.precision(17);
    os << "run,zeta,filter,wall_seconds,sqrt_evaluated,sqrt_clamped,sqrt_above_threshold,sqrt_largest,"
          "det_evaluated,det_clamped,reinitializations\n";
    for (const auto& run : r.runs) {
        os << run.run << ',' << run.zeta << ',' << to_string(run.filter) << ',' << run.wall_seconds << ','
           << run.sqrt_clamps.evaluated << ',' << run.sqrt_clamps.clamped << ',' << run.sqrt_clamps.above_threshold
           << ',' << run.sqrt_clamps.largest << ',' << run.det_clamps.evaluated << ',' << run.det_clamps.clamped
           << ',' << run.reinitializations << '\n';
    }
    os.precision(old);
}

void write_summary_csv(std::ostream& os, const ExperimentResult& r) {
    static const char* names[] = {"ospa",        "omat",  "good_ratio", "gain",   "count_estimate",
                                  "count_truth", "corr_ab", "count_a",  "count_b"};
    constexpr size_t kCols = std::size(names);
    struct Acc {
        std::array<std::vector<double>, kCols> v;
    };
    std::map<std::tuple<double, int, int>, Acc> groups;
    for (const auto& run : r.runs) {
        for (const auto& s : run.steps) {
            const auto& m = s.metrics;
            const double vals[kCols] = {m.ospa,
                                        m.omat.value_or(kNaN),
                                        m.good_ratio.value_or(kNaN),
                                        m.gain.value_or(kNaN),
                                        m.count_estimate,
                                        static_cast<double>(m.count_truth),
                                        m.corr_ab.value_or(kNaN),
                                        s.count_a,
                                        s.count_b};
            auto& acc = groups[{run.zeta, static_cast<int>(run.filter), m.t}];
            for (size_t c = 0; c < kCols; ++c)
                if (!std::isnan(vals[c])) acc.v[c].push_back(vals[c]);
        }
    }
    const auto old = os.precision(17);
    os << "zeta,filter,t";
    for (const char* n : names) os << ",mean_" << n << ",sd_" << n << ",n_" << n;
    os << '\n';
    for (const auto& [key, acc] : groups) {
        os << std::get<0>(key) << ',' << to_string(static_cast<FilterChoice>(std::get<1>(key))) << ','
           << std::get<2>(key);
        for (const auto& v : acc.v) {
            double mean = kNaN, sd = kNaN;
            if (!v.empty()) {
                mean = 0.0;
                for (double x : v) mean += x;
                mean /= static_cast<double>(v.size());
            }
            if (v.size() > 1) {
                double ss = 0.0;
                for (double x : v) ss += (x - mean) * (x - mean);
                sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
            }
            os << ',';
            put(os, mean);
            os << ',';
            put(os, sd);
            os << ',' << v.size();
        }
        os << '\n';
    }
    os.precision(old);
}

void write_meta(std::ostream& os, const ExperimentConfig& cfg) {
    os << "build_id = " << build_id() << "\nseed = " << cfg.seed << '\n';
    if (cfg.scale_notes.empty()) {
        os << "scale = as configured\n";
    } else {
        for (const auto& n : cfg.scale_notes) os << "scale = " << n << '\n';
    }
    os << "\n# config echo\n";
    write_config(os, cfg);
}

void write_truth_csv(std::ostream& os, const ExperimentResult& r, size_t zeta_index) {
    write_truth_header(os);
    const size_t runs = r.zetas.empty() ? 0 : r.truths.size() / r.zetas.size();
    for (size_t k = 0; k < runs; ++k) {
        const TruthRun& tr = r.truths[zeta_index * runs + k];
        for (size_t t = 0; t < tr.targets.size(); ++t)
            write_truth_rows(os, static_cast<int>(k), static_cast<int>(t), tr.targets[t]);
    }
}

void write_scans_csv(std::ostream& os, const ExperimentResult& r, size_t zeta_index) {
    write_scan_header(os);
    const size_t runs = r.zetas.empty() ? 0 : r.truths.size() / r.zetas.size();
    for (size_t k = 0; k < runs; ++k) {
        const TruthRun& tr = r.truths[zeta_index * runs + k];
        for (const auto& scan : tr.scans) write_scan_rows(os, static_cast<int>(k), scan);
    }
}

std::string build_id() { return DPPPHD_BUILD_ID; }

} // namespace dppphd
