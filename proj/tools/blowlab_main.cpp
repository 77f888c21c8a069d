// blowlab command line: dispatches closed-form and Monte Carlo experiments
// from flat key-value config files and writes CSV/JSON reports.
//
// Exit codes: 0 all checks pass, 1 any check fails, 2 configuration error.

#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "blowlab/config.hpp"
#include "blowlab/experiments.hpp"
#include "blowlab/parallel.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> overrides;
    unsigned workers = 0;
    bool seed_set = false;
    std::uint64_t seed = 0;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--workers", args.workers,
                    "worker threads (default: BLOWLAB_WORKERS or hardware)");
    cmd->add_option("--override", args.overrides, "config override key=value (repeatable)");
    cmd->add_option("--seed", args.seed, "master seed (overrides the config)")
        ->each([&args](const std::string&) { args.seed_set = true; });
}

blowlab::RunConfig load_config(const CommonArgs& args) {
    blowlab::RunConfig cfg = blowlab::RunConfig::from_file(args.config_path);
    for (const auto& ov : args.overrides) cfg.apply_override(ov);
    if (args.seed_set) cfg.apply_override("seed=" + std::to_string(args.seed));
    return cfg;
}

int run_family(const CommonArgs& args, unsigned allowed_families, const char* subcommand) {
    blowlab::RunConfig cfg = load_config(args);
    // peek at the experiment name without consuming it twice
    blowlab::RunConfig probe = cfg;
    const std::string name = probe.get_string("experiment");
    const auto& entry = blowlab::find_experiment(name);
    if (allowed_families != 0 && (entry.families & allowed_families) == 0) {
        throw blowlab::ConfigurationError("experiment '" + name + "' does not belong to the '" +
                                          subcommand + "' family");
    }
    const unsigned workers =
        args.workers > 0 ? args.workers : blowlab::default_worker_count();
    const auto result = blowlab::run_experiment(cfg, args.out_dir, workers);
    std::printf("%s: %s (%s = %.17g)\n", result.name.c_str(),
                result.all_pass ? "PASS" : "FAIL", result.headline_name.c_str(),
                result.headline);
    for (const auto& f : result.files_written) std::printf("  wrote %s\n", f.c_str());
    return result.all_pass ? 0 : 1;
}

int run_sweep(const CommonArgs& args) {
    blowlab::RunConfig base = load_config(args);
    blowlab::RunConfig probe = base;
    const std::string name = probe.get_string("experiment");
    const std::string sweep_key = probe.get_string("sweep.key");
    const std::vector<double> values = probe.get_double_list("sweep.values");
    blowlab::find_experiment(name);

    const unsigned workers =
        args.workers > 0 ? args.workers : blowlab::default_worker_count();
    blowlab::CsvTable plot({sweep_key, "headline"});
    bool all_pass = true;
    std::string headline_name;
    for (double v : values) {
        blowlab::RunConfig cfg = base;
        // the sweep bookkeeping keys are not part of the experiment schema
        cfg.apply_override("sweep.key=" + sweep_key);
        cfg.apply_override("sweep.values=swept");
        (void)cfg.get_string("sweep.key");
        (void)cfg.get_string("sweep.values");
        cfg.apply_override(sweep_key + "=" + blowlab::format_number(v));
        const auto run_dir =
            std::filesystem::path(args.out_dir) / (sweep_key + "=" + blowlab::format_number(v));
        const auto result = blowlab::run_experiment(cfg, run_dir, workers);
        all_pass = all_pass && result.all_pass;
        headline_name = result.headline_name;
        plot.new_row().add(v).add(result.headline);
    }
    const auto plot_path = std::filesystem::path(args.out_dir) / (name + "_sweep_plot.csv");
    std::filesystem::create_directories(args.out_dir);
    plot.write(plot_path);
    std::printf("sweep %s over %s: %s (%zu runs, headline %s)\n", name.c_str(),
                sweep_key.c_str(), all_pass ? "PASS" : "FAIL", values.size(),
                headline_name.c_str());
    std::printf("  wrote %s\n", plot_path.string().c_str());
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for stochastic parabolic blowup"};
    app.require_subcommand(1);

    CommonArgs analytic_args, additive_args, multiplicative_args, blowup_args, sweep_args,
        report_args;

    auto* analytic = app.add_subcommand("analytic", "closed-form quantities only");
    attach_common(analytic, analytic_args);
    auto* additive = app.add_subcommand("simulate-additive", "additive-noise experiments");
    attach_common(additive, additive_args);
    auto* multiplicative =
        app.add_subcommand("simulate-multiplicative", "multiplicative-noise experiments");
    attach_common(multiplicative, multiplicative_args);
    auto* blowup = app.add_subcommand("blowup-time", "bounded-domain blowup time experiments");
    attach_common(blowup, blowup_args);
    auto* sweep = app.add_subcommand("sweep", "run an experiment over a parameter list");
    attach_common(sweep, sweep_args);
    auto* report = app.add_subcommand("report", "run any experiment and write its reports");
    attach_common(report, report_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (analytic->parsed()) return run_family(analytic_args, blowlab::kFamilyAnalytic, "analytic");
        if (additive->parsed())
            return run_family(additive_args, blowlab::kFamilyAdditive, "simulate-additive");
        if (multiplicative->parsed())
            return run_family(multiplicative_args, blowlab::kFamilyMultiplicative,
                              "simulate-multiplicative");
        if (blowup->parsed())
            return run_family(blowup_args, blowlab::kFamilyBlowupTime, "blowup-time");
        if (sweep->parsed()) return run_sweep(sweep_args);
        if (report->parsed()) return run_family(report_args, 0, "report");
    } catch (const blowlab::ConfigurationError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        // precondition violations surface before any sampling starts
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
