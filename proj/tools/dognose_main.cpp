// Command-line front end: run presets or config files, sweep and optimize
// design parameters, analyze traces. Exit codes: 0 success, 2 bad arguments
// or config, 3 simulation error, 4 sweep budget exceeded.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dognose/config.hpp"
#include "dognose/io.hpp"
#include "dognose/metrics.hpp"
#include "dognose/optimizer.hpp"
#include "dognose/par.hpp"
#include "dognose/scenarios.hpp"

namespace fs = std::filesystem;
using namespace dognose;

namespace {

int exit_code_for(const SimError& e) {
    switch (e.code()) {
        case ErrorCode::BadConfig: return 2;
        case ErrorCode::BudgetExceeded: return 4;
        default: return 3;
    }
}

ScenarioSpec resolve_spec(const std::string& preset_name, const std::string& config_path,
                          const std::vector<std::string>& overrides) {
    ScenarioSpec spec;
    if (!preset_name.empty() && !config_path.empty())
        throw_sim_error(ErrorCode::BadConfig, "give either --preset or --config, not both");
    if (!preset_name.empty())
        spec = preset(preset_name);
    else if (!config_path.empty())
        spec = load_scenario_file(config_path);
    else
        throw_sim_error(ErrorCode::BadConfig, "one of --preset or --config is required");
    if (!overrides.empty()) spec = apply_overrides(spec, overrides);
    return spec;
}

ParamSpace parse_params(const std::vector<std::string>& defs, bool need_step) {
    ParamSpace space;
    for (const std::string& d : defs) {
        const size_t eq = d.find('=');
        if (eq == std::string::npos)
            throw_sim_error(ErrorCode::BadConfig, "--param needs name=lo:hi[:step], got '" + d + "'");
        ParamDef p;
        p.name = d.substr(0, eq);
        const std::string rest = d.substr(eq + 1);
        double lo = 0, hi = 0, step = 0;
        const int n = std::sscanf(rest.c_str(), "%lf:%lf:%lf", &lo, &hi, &step);
        if (n < 2 || (need_step && n < 3))
            throw_sim_error(ErrorCode::BadConfig,
                            need_step ? "--param needs name=lo:hi:step for sweeps"
                                      : "--param needs name=lo:hi");
        p.lower = lo;
        p.upper = hi;
        p.step = n >= 3 ? step : 0.0;
        p.validate();
        space.params.push_back(p);
    }
    if (space.params.empty()) throw_sim_error(ErrorCode::BadConfig, "at least one --param is required");
    return space;
}

Objective parse_objective(const std::string& name, double threshold) {
    Objective obj;
    obj.threshold = threshold;
    if (name == "peak")
        obj.kind = ObjectiveKind::PeakConcentration;
    else if (name == "auc")
        obj.kind = ObjectiveKind::Auc;
    else if (name == "duration_above")
        obj.kind = ObjectiveKind::DurationAbove;
    else
        throw_sim_error(ErrorCode::BadConfig, "objective must be peak, auc or duration_above");
    return obj;
}

double default_threshold(const ScenarioSpec& spec, const SensorTrace& trace) {
    double peak = 0.0;
    for (const TraceRow& r : trace.rows) peak = std::max(peak, r.reading);
    return spec.transport.background + 0.1 * (peak - spec.transport.background);
}

int cmd_simulate(const std::string& preset_name, const std::string& config_path,
                 const std::vector<std::string>& overrides, const std::string& out_dir,
                 const std::string& command) {
    ScenarioSpec spec = resolve_spec(preset_name, config_path, overrides);
    fs::create_directories(out_dir);

    SnapshotSink sink;
    int frame = 0;
    if (spec.snapshot_cadence) {
        fs::create_directories(out_dir + "/snapshots");
        sink = [&](double t, const Field2d& speed, const Field2d& pressure, const Field2d& conc) {
            auto dump = [&](const Field2d& f, const std::string& what) {
                std::string csv;
                for (int j = 0; j < f.ny; ++j) {
                    for (int i = 0; i < f.nx; ++i) {
                        csv += format_double(f(i, j));
                        csv += (i + 1 < f.nx) ? ',' : '\n';
                    }
                }
                char name[64];
                std::snprintf(name, sizeof name, "snapshots/frame%04d_%s.csv", frame, what.c_str());
                write_file(out_dir + "/" + name, csv);
            };
            dump(speed, "speed");
            dump(pressure, "pressure");
            dump(conc, "concentration");
            (void)t;
            ++frame;
        };
    }

    const RunResult run = run_scenario(spec, sink);

    write_file(out_dir + "/trace.csv", trace_to_csv(run.trace));
    write_file(out_dir + "/ledger.json", ledger_to_json(run.ledger).dump(2) + "\n");
    MetricsReport rep =
        compute_metrics(run.trace, default_threshold(spec, run.trace), spec.motor_off_time);
    nlohmann::json jm = metrics_to_json(rep);
    jm["run_stats"] = stats_to_json(run.stats);
    write_file(out_dir + "/metrics.json", jm.dump(2) + "\n");
    write_manifest(out_dir, &spec, {"trace.csv", "ledger.json", "metrics.json"}, run.stats.wall_seconds,
                   command);
    std::cout << "wrote " << out_dir << "/trace.csv (" << run.trace.rows.size() << " rows), ledger.json, "
              << "metrics.json, manifest.json\n";
    return 0;
}

int cmd_sweep(const std::string& preset_name, const std::string& config_path,
              const std::vector<std::string>& overrides, const std::vector<std::string>& param_defs,
              const std::string& objective_name, double threshold, int budget,
              const std::string& out_dir, const std::string& command) {
    ScenarioSpec spec = resolve_spec(preset_name, config_path, overrides);
    const ParamSpace space = parse_params(param_defs, true);
    const Objective obj = parse_objective(objective_name, threshold);
    const SweepResult sweep = grid_sweep(space, spec, obj, budget);
    fs::create_directories(out_dir);
    write_file(out_dir + "/sweep.csv", sweep_to_csv(sweep));
    write_manifest(out_dir, &spec, {"sweep.csv"}, 0.0, command);
    std::cout << "wrote " << out_dir << "/sweep.csv (" << sweep.rows.size() << " rows)\n";
    return 0;
}

int cmd_optimize(const std::string& preset_name, const std::string& config_path,
                 const std::vector<std::string>& overrides, const std::vector<std::string>& param_defs,
                 const std::string& objective_name, double threshold, int budget, unsigned seed,
                 const std::string& out_dir, const std::string& command) {
    ScenarioSpec spec = resolve_spec(preset_name, config_path, overrides);
    const ParamSpace space = parse_params(param_defs, false);
    const Objective obj = parse_objective(objective_name, threshold);
    const OptResult opt = nelder_mead(space, spec, obj, budget, seed);
    fs::create_directories(out_dir);
    write_file(out_dir + "/opt.json", opt_to_json(opt).dump(2) + "\n");
    std::string log = "evaluation,";
    for (const std::string& n : opt.param_names) log += n + ",";
    log += "objective\n";
    for (size_t k = 0; k < opt.log.size(); ++k) {
        log += std::to_string(k) + ",";
        for (double v : opt.log[k].values) log += format_double(v) + ",";
        log += format_double(opt.log[k].objective) + "\n";
    }
    write_file(out_dir + "/opt_log.csv", log);
    write_manifest(out_dir, &spec, {"opt.json", "opt_log.csv"}, 0.0, command);
    std::cout << "best objective " << format_double(opt.best_objective) << " after " << opt.evaluations
              << " evaluations" << (opt.converged ? "" : " (not converged)") << "\n";
    return 0;
}

int cmd_analyze(const std::vector<std::string>& traces, std::optional<double> threshold,
                std::optional<double> off_time, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::vector<std::pair<std::string, MetricsReport>> reports;
    for (const std::string& path : traces) {
        const SensorTrace trace = trace_from_csv_file(path);
        double thr;
        if (threshold)
            thr = *threshold;
        else {
            double peak = 0.0;
            for (const TraceRow& r : trace.rows) peak = std::max(peak, r.reading);
            thr = 0.1 * peak;
        }
        std::optional<double> off = off_time;
        const MetricsReport rep = compute_metrics(trace, thr, off);
        const std::string stem = fs::path(path).stem().string();
        write_file(out_dir + "/" + stem + "_metrics.json", metrics_to_json(rep).dump(2) + "\n");
        reports.emplace_back(stem, rep);
    }
    if (reports.size() >= 2)
        write_file(out_dir + "/comparison.csv", comparisons_to_csv(compare_schemes(reports)));
    std::cout << "analyzed " << reports.size() << " trace(s) into " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dog-nose aerosol sampler simulator"};
    app.require_subcommand(1);

    int threads = 1;
    app.add_option("--threads", threads, "worker threads for grid kernels (0 = all cores)");

    std::string preset_name, config_path, out_dir = "out";
    std::vector<std::string> overrides, param_defs, trace_paths;
    std::string objective_name = "peak";
    double threshold = 0.0;
    int budget = 1000;
    unsigned seed = 1;
    std::optional<double> an_threshold, an_off_time;

    CLI::App* sim = app.add_subcommand("simulate", "run one scenario and write trace/ledger/metrics");
    sim->add_option("--preset", preset_name, "preset name (see list-presets)");
    sim->add_option("--config", config_path, "scenario config JSON");
    sim->add_option("--set", overrides, "override config keys, e.g. inhale_schedule.duty=0.6");
    sim->add_option("--out", out_dir, "output directory")->required();

    CLI::App* swp = app.add_subcommand("sweep", "grid sweep over design parameters");
    swp->add_option("--preset", preset_name, "base preset");
    swp->add_option("--config", config_path, "base config JSON");
    swp->add_option("--set", overrides, "override base config keys");
    swp->add_option("--param", param_defs, "name=lo:hi:step (repeatable)")->required();
    swp->add_option("--objective", objective_name, "peak | auc | duration_above");
    swp->add_option("--threshold", threshold, "threshold for duration_above");
    swp->add_option("--budget", budget, "max grid points");
    swp->add_option("--out", out_dir, "output directory")->required();

    CLI::App* opt = app.add_subcommand("optimize", "Nelder-Mead search over design parameters");
    opt->add_option("--preset", preset_name, "base preset");
    opt->add_option("--config", config_path, "base config JSON");
    opt->add_option("--set", overrides, "override base config keys");
    opt->add_option("--param", param_defs, "name=lo:hi (repeatable)")->required();
    opt->add_option("--objective", objective_name, "peak | auc | duration_above");
    opt->add_option("--threshold", threshold, "threshold for duration_above");
    opt->add_option("--budget", budget, "max evaluations");
    opt->add_option("--seed", seed, "initial simplex seed");
    opt->add_option("--out", out_dir, "output directory")->required();

    CLI::App* ana = app.add_subcommand("analyze", "metrics (and comparison) from trace CSVs");
    ana->add_option("traces", trace_paths, "trace.csv files")->required();
    ana->add_option("--threshold", [&](const std::vector<std::string>& v) {
        an_threshold = std::stod(v[0]);
        return true;
    }, "duration threshold (default: 10% of each trace's peak)");
    ana->add_option("--off-time", [&](const std::vector<std::string>& v) {
        an_off_time = std::stod(v[0]);
        return true;
    }, "motor-off time for post-off peak detection");
    ana->add_option("--out", out_dir, "output directory")->required();

    CLI::App* lst = app.add_subcommand("list-presets", "print available preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    par::set_threads(threads);

    std::string command;
    for (int k = 0; k < argc; ++k) {
        if (k) command += ' ';
        command += argv[k];
    }

    try {
        if (lst->parsed()) {
            for (const std::string& name : list_presets()) std::cout << name << "\n";
            return 0;
        }
        if (sim->parsed()) return cmd_simulate(preset_name, config_path, overrides, out_dir, command);
        if (swp->parsed())
            return cmd_sweep(preset_name, config_path, overrides, param_defs, objective_name, threshold,
                             budget, out_dir, command);
        if (opt->parsed())
            return cmd_optimize(preset_name, config_path, overrides, param_defs, objective_name, threshold,
                                budget, seed, out_dir, command);
        if (ana->parsed()) return cmd_analyze(trace_paths, an_threshold, an_off_time, out_dir);
    } catch (const SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
