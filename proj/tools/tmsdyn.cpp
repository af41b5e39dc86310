// Command-line front end: run scenarios and sweeps, run the acceptance suite,
// list the built-in presets.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tmsdyn/tmsdyn.hpp"

namespace {

std::filesystem::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("TMSDYN_OUT"); env && *env) return env;
    return std::filesystem::current_path();
}

std::string show(const std::optional<double>& v) { return v ? tmsdyn::format_double(*v) : "n/a"; }

void print_report(const tmsdyn::RunReport& r) {
    std::printf("scenario      %s (mode %s)\n", r.name.c_str(), r.mode.c_str());
    std::printf("chi           %.6g%s\n", r.chi, r.chi_below_resonance_bound ? "  [below resonance bound chi >= 1]" : "");
    std::printf("switch-off    eta_f = %.10g\n", r.switch_off_eta);
    std::printf("energy bound  %.6e\n", r.energy_input_bound);
    std::printf("stability     %s (sup |h| = %.6g at eta = %.6g)\n", r.stability.ok ? "ok" : "VIOLATED",
                r.stability.sup_abs_h, r.stability.eta_at_sup);
    if (r.extracted)
        std::printf("extracted     A = %.10g, phi = %.10g\n", r.extracted->amplitude, r.extracted->phase);
    if (r.weak_coupling)
        std::printf("weak coupling A = %.10g, phi = %.10g\n", r.weak_coupling->amplitude, r.weak_coupling->phase);
    std::printf("deviations    cross-path %s, tail F %s, perturbative F+ %s, F- %s\n",
                show(r.max_cross_path_deviation).c_str(), show(r.max_tail_F_deviation).c_str(),
                show(r.perturbative_F_plus_rel_deviation).c_str(), show(r.perturbative_F_minus_rel_deviation).c_str());
    std::printf("samples       %zu in %.3f s\n", r.samples, r.runtime_seconds);
    if (!r.csv_path.empty()) std::printf("csv           %s\n", r.csv_path.c_str());
    if (!r.summary_path.empty()) std::printf("summary       %s\n", r.summary_path.c_str());
}

int run_validate(std::uint64_t seed) {
    tmsdyn::AcceptanceOptions opt;
    opt.seed = seed;
    const auto report = tmsdyn::run_acceptance(opt);
    std::cout << tmsdyn::format_report(report);
    return report.all_passed() ? 0 : 1;
}

int run_sweep(const tmsdyn::ScenarioConfig& cfg, const std::filesystem::path& out, unsigned threads) {
    const auto result = tmsdyn::run_sweep_to_files(cfg, out, threads);
    std::size_t failed = 0;
    for (const auto& row : result.rows) failed += row.error.empty() ? 0 : 1;
    std::printf("sweep %s: %zu points, %zu failed\n", cfg.name.c_str(), result.rows.size(), failed);
    if (!cfg.output.csv.empty()) std::printf("csv   %s\n", (out / cfg.output.csv).string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-mode squeezing dynamics: ODE integration, closed forms and observables"};
    app.require_subcommand(1);

    std::string out_flag;
    std::uint64_t seed = tmsdyn::AcceptanceOptions{}.seed;
    unsigned threads = 0;
    app.add_option("--out", out_flag, "Output directory (default: $TMSDYN_OUT, else current directory)");
    app.add_option("--seed", seed, "Seed for the random parameter draws of the acceptance suite");
    app.add_option("--threads", threads, "Worker threads for sweeps (0 = hardware concurrency)");

    std::string run_target;
    auto* run = app.add_subcommand("run", "Run a scenario from a JSON config file or a preset name");
    run->add_option("config", run_target, "Config file or preset name")->required();

    std::string sweep_target;
    auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep config");
    sweep->add_option("config", sweep_target, "Config file with mode 'sweep'")->required();

    auto* validate = app.add_subcommand("validate", "Run the acceptance suite");

    auto* presets_cmd = app.add_subcommand("presets", "Built-in presets");
    presets_cmd->require_subcommand(1);
    auto* list = presets_cmd->add_subcommand("list", "List preset names");
    std::string show_name;
    auto* show_cmd = presets_cmd->add_subcommand("show", "Print a preset config");
    show_cmd->add_option("name", show_name, "Preset name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*validate) return run_validate(seed);
        if (*list) {
            for (const auto& p : tmsdyn::presets::all()) std::printf("%s\n", std::string(p.name).c_str());
            return 0;
        }
        if (*show_cmd) {
            std::cout << tmsdyn::presets::get(show_name);
            return 0;
        }
        const auto out = output_dir(out_flag);
        if (*sweep) {
            const auto cfg = tmsdyn::load_config(sweep_target);
            if (cfg.mode != tmsdyn::RunMode::Sweep) throw tmsdyn::ConfigError("mode", "sweep needs mode 'sweep'");
            return run_sweep(cfg, out, threads);
        }
        if (*run) {
            const auto cfg = tmsdyn::load_config(run_target);
            if (cfg.mode == tmsdyn::RunMode::Sweep) return run_sweep(cfg, out, threads);
            if (cfg.mode == tmsdyn::RunMode::Validate) {
                const auto rep = tmsdyn::run_scenario(cfg, out);
                std::cout << tmsdyn::format_report(*rep.acceptance);
                return rep.acceptance->all_passed() ? 0 : 1;
            }
            print_report(tmsdyn::run_scenario(cfg, out));
            return 0;
        }
    } catch (const tmsdyn::ConfigError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
