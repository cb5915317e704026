#include "dognose/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace dognose {

void ParamDef::validate() const {
    if (!is_known_param(name)) throw_sim_error(ErrorCode::BadConfig, "unknown parameter '" + name + "'");
    if (!(lower < upper)) throw_sim_error(ErrorCode::BadConfig, "parameter '" + name + "' needs lower < upper");
    if (step < 0) throw_sim_error(ErrorCode::BadConfig, "grid step must be >= 0");
}

void ParamSpace::validate() const {
    if (params.empty()) throw_sim_error(ErrorCode::BadConfig, "parameter space is empty");
    for (const ParamDef& p : params) p.validate();
}

bool is_known_param(const std::string& name) {
    static const char* known[] = {"exhale_angle", "snout_height", "elevation", "inhale_duty",
                                  "pulse_period", "inhale_vmax",  "exhale_vmax"};
    for (const char* k : known)
        if (name == k) return true;
    return false;
}

void apply_param(ScenarioSpec& spec, const std::string& name, double value) {
    if (name == "exhale_angle")
        spec.geometry.exhale_angle = value;
    else if (name == "snout_height")
        spec.geometry.snout_height = value;
    else if (name == "elevation")
        spec.pose.elevation = value;
    else if (name == "inhale_duty") {
        if (spec.inhale_schedule.mode == ScheduleMode::Off) spec.inhale_schedule.mode = ScheduleMode::Continuous;
        spec.inhale_schedule.duty = value;
    } else if (name == "pulse_period") {
        spec.inhale_schedule.mode = ScheduleMode::Pulsed;
        spec.inhale_schedule.period = value;
    } else if (name == "inhale_vmax")
        spec.inhale_motor.v_max = value;
    else if (name == "exhale_vmax")
        spec.exhale_motor.v_max = value;
    else
        throw_sim_error(ErrorCode::BadConfig, "unknown parameter '" + name + "'");
}

double objective_value(const RunResult& run, const Objective& obj) {
    const MetricsReport rep = compute_metrics(run.trace, obj.threshold, run.spec.motor_off_time);
    switch (obj.kind) {
        case ObjectiveKind::PeakConcentration: return rep.peak;
        case ObjectiveKind::Auc: return rep.auc;
        case ObjectiveKind::DurationAbove: return rep.duration_above;
    }
    return 0.0;
}

double evaluate_objective(const ScenarioSpec& base, const ParamSpace& space,
                          const std::vector<double>& values, const Objective& obj) {
    ScenarioSpec spec = base;
    for (size_t k = 0; k < space.params.size(); ++k) apply_param(spec, space.params[k].name, values[k]);
    return objective_value(run_scenario(spec), obj);
}

SweepResult grid_sweep(const ParamSpace& space, const ScenarioSpec& base, const Objective& obj, int budget) {
    space.validate();
    std::vector<std::vector<double>> axes;
    for (const ParamDef& p : space.params) {
        if (p.step <= 0)
            throw_sim_error(ErrorCode::BadConfig, "parameter '" + p.name + "' needs a grid step for sweeps");
        std::vector<double> axis;
        for (double v = p.lower; v <= p.upper + 1e-12 * std::max(1.0, std::abs(p.upper)); v += p.step)
            axis.push_back(std::min(v, p.upper));
        axes.push_back(std::move(axis));
    }
    long total = 1;
    for (const auto& axis : axes) total *= static_cast<long>(axis.size());
    if (total > budget)
        throw_sim_error(ErrorCode::BudgetExceeded,
                        "grid has " + std::to_string(total) + " points, budget " + std::to_string(budget));

    SweepResult out;
    for (const ParamDef& p : space.params) out.param_names.push_back(p.name);
    std::vector<size_t> idx(axes.size(), 0);
    while (true) {
        std::vector<double> values(axes.size());
        for (size_t k = 0; k < axes.size(); ++k) values[k] = axes[k][idx[k]];
        ScenarioSpec spec = base;
        for (size_t k = 0; k < axes.size(); ++k) apply_param(spec, space.params[k].name, values[k]);
        const RunResult run = run_scenario(spec);
        const MetricsReport rep = compute_metrics(run.trace, obj.threshold, spec.motor_off_time);
        SweepRow row;
        row.values = values;
        row.peak = rep.peak;
        row.auc = rep.auc;
        row.duration_above = rep.duration_above;
        row.steps = run.stats.steps;
        row.objective = obj.kind == ObjectiveKind::PeakConcentration ? rep.peak
                        : obj.kind == ObjectiveKind::Auc             ? rep.auc
                                                                     : rep.duration_above;
        out.rows.push_back(std::move(row));
        // lexicographic advance, last axis fastest
        size_t k = axes.size();
        while (k > 0) {
            --k;
            if (++idx[k] < axes[k].size()) break;
            idx[k] = 0;
            if (k == 0) return out;
        }
    }
}

OptResult nelder_mead_fn(const std::vector<ParamDef>& params,
                         const std::function<double(const std::vector<double>&)>& f, bool maximize,
                         int budget, unsigned seed) {
    const int dim = static_cast<int>(params.size());
    if (dim < 1) throw_sim_error(ErrorCode::BadConfig, "parameter space is empty");
    if (budget < 3 * (dim + 1))
        throw_sim_error(ErrorCode::BadConfig, "budget must be at least 3*(dim+1)");

    OptResult out;
    for (const ParamDef& p : params) out.param_names.push_back(p.name);

    auto clampv = [&](std::vector<double>& x) {
        for (int k = 0; k < dim; ++k) x[static_cast<size_t>(k)] = std::clamp(x[static_cast<size_t>(k)],
                                                                             params[static_cast<size_t>(k)].lower,
                                                                             params[static_cast<size_t>(k)].upper);
    };
    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        out.log.push_back({x, v});
        ++out.evaluations;
        return maximize ? -v : v;  // minimize internally
    };

    // seeded initial simplex: a random interior point plus 10 %-of-box steps
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> unit(0.15, 0.85);
    std::vector<std::vector<double>> x(static_cast<size_t>(dim + 1), std::vector<double>(static_cast<size_t>(dim)));
    for (int k = 0; k < dim; ++k) {
        const ParamDef& p = params[static_cast<size_t>(k)];
        x[0][static_cast<size_t>(k)] = p.lower + unit(rng) * (p.upper - p.lower);
    }
    for (int m = 1; m <= dim; ++m) {
        x[static_cast<size_t>(m)] = x[0];
        const ParamDef& p = params[static_cast<size_t>(m - 1)];
        double stepv = 0.1 * (p.upper - p.lower);
        if (x[static_cast<size_t>(m)][static_cast<size_t>(m - 1)] + stepv > p.upper) stepv = -stepv;
        x[static_cast<size_t>(m)][static_cast<size_t>(m - 1)] += stepv;
    }

    std::vector<double> fx(static_cast<size_t>(dim + 1));
    for (int m = 0; m <= dim; ++m) fx[static_cast<size_t>(m)] = eval(x[static_cast<size_t>(m)]);

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    auto diameter = [&]() {
        double d = 0.0;
        for (int m = 1; m <= dim; ++m)
            for (int k = 0; k < dim; ++k) {
                const ParamDef& p = params[static_cast<size_t>(k)];
                d = std::max(d, std::abs(x[static_cast<size_t>(m)][static_cast<size_t>(k)] - x[0][static_cast<size_t>(k)]) /
                                    (p.upper - p.lower));
            }
        return d;
    };

    while (out.evaluations < budget) {
        // order ascending by internal value
        std::vector<int> ord(static_cast<size_t>(dim + 1));
        std::iota(ord.begin(), ord.end(), 0);
        std::stable_sort(ord.begin(), ord.end(),
                         [&](int a, int b) { return fx[static_cast<size_t>(a)] < fx[static_cast<size_t>(b)]; });
        std::vector<std::vector<double>> xs(static_cast<size_t>(dim + 1));
        std::vector<double> fs(static_cast<size_t>(dim + 1));
        for (int m = 0; m <= dim; ++m) {
            xs[static_cast<size_t>(m)] = x[static_cast<size_t>(ord[static_cast<size_t>(m)])];
            fs[static_cast<size_t>(m)] = fx[static_cast<size_t>(ord[static_cast<size_t>(m)])];
        }
        x = xs;
        fx = fs;
        if (diameter() < 1e-3) {
            out.converged = true;
            break;
        }

        std::vector<double> centroid(static_cast<size_t>(dim), 0.0);
        for (int m = 0; m < dim; ++m)
            for (int k = 0; k < dim; ++k) centroid[static_cast<size_t>(k)] += x[static_cast<size_t>(m)][static_cast<size_t>(k)] / dim;

        auto blend = [&](double coef) {
            std::vector<double> p(static_cast<size_t>(dim));
            for (int k = 0; k < dim; ++k)
                p[static_cast<size_t>(k)] =
                    centroid[static_cast<size_t>(k)] + coef * (centroid[static_cast<size_t>(k)] - x[static_cast<size_t>(dim)][static_cast<size_t>(k)]);
            clampv(p);
            return p;
        };

        const std::vector<double> xr = blend(alpha);
        const double fr = eval(xr);
        if (fr < fx[0]) {
            if (out.evaluations >= budget) {
                if (fr < fx[static_cast<size_t>(dim)]) {
                    x[static_cast<size_t>(dim)] = xr;
                    fx[static_cast<size_t>(dim)] = fr;
                }
                break;
            }
            const std::vector<double> xe = blend(gamma);
            const double fe = eval(xe);
            if (fe < fr) {
                x[static_cast<size_t>(dim)] = xe;
                fx[static_cast<size_t>(dim)] = fe;
            } else {
                x[static_cast<size_t>(dim)] = xr;
                fx[static_cast<size_t>(dim)] = fr;
            }
            continue;
        }
        if (fr < fx[static_cast<size_t>(dim - 1)]) {
            x[static_cast<size_t>(dim)] = xr;
            fx[static_cast<size_t>(dim)] = fr;
            continue;
        }
        if (out.evaluations >= budget) break;
        const bool outside = fr < fx[static_cast<size_t>(dim)];
        std::vector<double> xc(static_cast<size_t>(dim));
        if (outside) {
            for (int k = 0; k < dim; ++k)
                xc[static_cast<size_t>(k)] = centroid[static_cast<size_t>(k)] +
                                             rho * (xr[static_cast<size_t>(k)] - centroid[static_cast<size_t>(k)]);
        } else {
            for (int k = 0; k < dim; ++k)
                xc[static_cast<size_t>(k)] = centroid[static_cast<size_t>(k)] +
                                             rho * (x[static_cast<size_t>(dim)][static_cast<size_t>(k)] - centroid[static_cast<size_t>(k)]);
        }
        clampv(xc);
        const double fc = eval(xc);
        if (fc < std::min(fr, fx[static_cast<size_t>(dim)])) {
            x[static_cast<size_t>(dim)] = xc;
            fx[static_cast<size_t>(dim)] = fc;
            continue;
        }
        // shrink toward the best vertex
        for (int m = 1; m <= dim; ++m) {
            for (int k = 0; k < dim; ++k)
                x[static_cast<size_t>(m)][static_cast<size_t>(k)] =
                    x[0][static_cast<size_t>(k)] +
                    sigma * (x[static_cast<size_t>(m)][static_cast<size_t>(k)] - x[0][static_cast<size_t>(k)]);
            clampv(x[static_cast<size_t>(m)]);
            if (out.evaluations >= budget) break;
            fx[static_cast<size_t>(m)] = eval(x[static_cast<size_t>(m)]);
        }
    }

    int best = 0;
    for (int m = 1; m <= dim; ++m)
        if (fx[static_cast<size_t>(m)] < fx[static_cast<size_t>(best)]) best = m;
    out.best_values = x[static_cast<size_t>(best)];
    out.best_objective = maximize ? -fx[static_cast<size_t>(best)] : fx[static_cast<size_t>(best)];
    if (diameter() < 1e-3) out.converged = true;
    return out;
}

OptResult nelder_mead(const ParamSpace& space, const ScenarioSpec& base, const Objective& obj, int budget,
                      unsigned seed) {
    space.validate();
    return nelder_mead_fn(
        space.params,
        [&](const std::vector<double>& v) { return evaluate_objective(base, space, v, obj); },
        obj.maximize, budget, seed);
}

}  // namespace dognose
