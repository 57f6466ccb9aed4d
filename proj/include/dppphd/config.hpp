#pragma once

#include "dppphd/kernel_core.hpp"
#include "dppphd/scenario.hpp"
#include "dppphd/smc_engine.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dppphd {

enum class FilterChoice { dpp, ppp, both };

/// Event script in compact form; expanded per run by make_schedule.
struct ScheduleSpec {
    int miss_period = 0;        ///< forced misses at every t > 0 with t % period == 0
    int miss_rect = -1;         ///< targets initialized in this rectangle are missed
    int death_t = -1;
    int death_count = 0;        ///< randomly chosen survivors removed at death_t
    int birth_t = -1;
    int birth_count = 0;        ///< newborns placed like the initial targets of rectangle 0
};

struct ScenarioConfig {
    DynamicsConfig dynamics;
    SensorConfig sensor;
    std::vector<int> targets_per_rect{3};
    /// Initial positions: rectangle center plus Gaussian offset with s.d. spread * side, clipped.
    double init_spread = 0.1;
    /// Uniform initial positions within each rectangle instead.
    bool init_uniform = false;
    /// Initial velocity component s.d.
    double init_speed = 0.0;
    /// Clutter mean after `clutter_switch_t` (negative: unchanged).
    double clutter_mean_late = -1.0;
    int clutter_switch_t = -1;
    ScheduleSpec schedule;
};

struct ExperimentConfig {
    std::string name = "custom";
    ScenarioConfig scenario;
    FilterChoice filter = FilterChoice::dpp;
    SmcConfig smc;
    KernelOptions kernel;
    int mc_runs = 1;
    int steps = 10;
    std::uint64_t seed = 1;
    std::optional<std::pair<int, int>> domains;  ///< rectangle indices of A and B
    std::string output_dir = "out";
    int threads = 1;
    double ospa_c = 100.0;
    double ospa_p = 2.0;
    /// Repulsion values swept with ζ_x = ζ_y; empty runs the dynamics config as is.
    std::vector<double> zeta_values;
    /// Free-form notes on how a preset was scaled down, echoed to meta.txt.
    std::vector<std::string> scale_notes;

    void validate() const;
};

/// Flat INI text with sections experiment, dynamics, sensor, window, schedule, smc, kernel, domains.
[[nodiscard]] ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {});
[[nodiscard]] ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});
void write_config(std::ostream& os, const ExperimentConfig& cfg);

/// Names: spooky, death, birth, repulsion-bias, good-ratio.
[[nodiscard]] ExperimentConfig preset(const std::string& name, bool full = false);
[[nodiscard]] std::vector<std::string> preset_names();

[[nodiscard]] std::string to_string(FilterChoice f);

} // namespace dppphd
