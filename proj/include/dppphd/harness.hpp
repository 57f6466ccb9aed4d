#pragma once

#include "dppphd/config.hpp"
#include "dppphd/kernel_core.hpp"
#include "dppphd/metrics.hpp"
#include "dppphd/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace dppphd {

/// Ground truth and scans of one Monte Carlo run.
struct TruthRun {
    std::vector<std::vector<Target>> targets;  ///< alive targets per step
    std::vector<Scan> scans;
    std::vector<ScheduleEntry> schedule;
};

/// Expands the compact schedule for one run; deaths are drawn from `rng`.
[[nodiscard]] std::vector<ScheduleEntry> make_schedule(const ScenarioConfig& sc, const std::vector<Target>& initial,
                                                       const std::vector<int>& initial_rect, int steps, Philox& rng);

/// Initial targets plus the rectangle each one was placed in.
[[nodiscard]] std::vector<Target> initial_targets(const ScenarioConfig& sc, Philox& rng,
                                                  std::vector<int>* rect_of = nullptr);

[[nodiscard]] TruthRun simulate_truth(const ScenarioConfig& sc, int steps, std::uint64_t seed, int run);

struct StepRecord {
    MetricRecord metrics;
    double count_a = 0.0;  ///< estimated mass in domain A (NaN without domains)
    double count_b = 0.0;
    Index particles = 0;
    long long sqrt_clamped = 0;
    long long sqrt_evaluated = 0;
    bool reinitialized = false;
};

struct RunRecord {
    int run = 0;
    double zeta = 0.0;
    FilterChoice filter = FilterChoice::dpp;  ///< dpp or ppp, never both
    std::vector<StepRecord> steps;
    double wall_seconds = 0.0;
    ClampStats sqrt_clamps;
    ClampStats det_clamps;
    int reinitializations = 0;
};

/// Runs one filter over a simulated truth.
[[nodiscard]] RunRecord run_filter(const ExperimentConfig& cfg, const TruthRun& truth, int run, double zeta,
                                   FilterChoice which);

struct ExperimentResult {
    std::vector<RunRecord> runs;  ///< ordered by (zeta, run, filter)
    std::vector<double> zetas;
    std::vector<TruthRun> truths;  ///< index zeta_index * mc_runs + run
};

/// Runs every (zeta, run) job on a worker pool; writes outputs to cfg.output_dir when `write_outputs`.
[[nodiscard]] ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_outputs = true);

void write_steps_csv(std::ostream& os, const ExperimentResult& r);
void write_runs_csv(std::ostream& os, const ExperimentResult& r);
/// Mean and s.d. across runs per (zeta, filter, t); missing values are skipped.
void write_summary_csv(std::ostream& os, const ExperimentResult& r);
void write_meta(std::ostream& os, const ExperimentConfig& cfg);
/// Truth and scan exports for the runs of one zeta value.
void write_truth_csv(std::ostream& os, const ExperimentResult& r, size_t zeta_index);
void write_scans_csv(std::ostream& os, const ExperimentResult& r, size_t zeta_index);

[[nodiscard]] std::string build_id();

} // namespace dppphd
