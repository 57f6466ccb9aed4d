#include "dppphd/config.hpp"
#include "dppphd/errors.hpp"
#include "dppphd/harness.hpp"
#include "dppphd/oracle_check.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"DPP and PPP intensity filters: experiments and oracle checks"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, preset_name, filter, out_dir, log_level = "info";
    std::uint64_t seed = 0;
    int runs = 0, threads = 0;
    bool full = false;
    app.add_option("--log-level", log_level, "trace, debug, info, warn, error");

    auto* run = app.add_subcommand("run", "Run a Monte Carlo experiment");
    run->add_option("--config", config_path, "INI config file");
    run->add_option("--preset", preset_name, "spooky, death, birth, repulsion-bias, good-ratio");
    run->add_option("--seed", seed, "Master seed");
    run->add_option("--runs", runs, "Monte Carlo runs");
    run->add_option("--filter", filter, "dpp, ppp or both")->check(CLI::IsMember({"dpp", "ppp", "both"}));
    run->add_option("--out", out_dir, "Output directory");
    run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--full", full, "Preset at full published scale");

    auto* oracle = app.add_subcommand("oracle-check", "Validate the corrector formulas against enumeration");
    auto* version = app.add_subcommand("version", "Print the build id");

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(spdlog::level::from_str(log_level));

    try {
        if (*version) {
            std::cout << "dppphd " << dppphd::build_id() << '\n';
            return 0;
        }
        if (*oracle) {
            bool ok = true;
            for (const auto& r : {dppphd::poisson_reduction_check(), dppphd::oracle_equivalence_check()}) {
                std::printf("%s %s max_error=%.3e tol=%.1e (%.2fs)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                            r.max_error, r.tolerance, r.seconds);
                ok = ok && r.passed;
            }
            return ok ? 0 : 1;
        }
        if (config_path.empty() && preset_name.empty()) {
            std::cerr << "run: --config or --preset is required\n";
            return 2;
        }
        dppphd::ExperimentConfig cfg;
        if (!preset_name.empty()) cfg = dppphd::preset(preset_name, full);
        if (!config_path.empty()) cfg = dppphd::load_config(config_path, cfg);
        if (run->count("--seed")) cfg.seed = seed;
        if (runs > 0) cfg.mc_runs = runs;
        if (!filter.empty()) cfg.filter = filter == "dpp" ? dppphd::FilterChoice::dpp
                                          : filter == "ppp" ? dppphd::FilterChoice::ppp
                                                            : dppphd::FilterChoice::both;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (threads > 0) cfg.threads = threads;
        cfg.validate();
        const auto result = dppphd::run_experiment(cfg);
        spdlog::info("{} filter runs finished", result.runs.size());
        return 0;
    } catch (const dppphd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const dppphd::UnknownPreset& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
