#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dognose/metrics.hpp"
#include "dognose/scenarios.hpp"

namespace dognose {

// Tunable scenario knobs addressable by name.
struct ParamDef {
    std::string name;  // exhale_angle | snout_height | elevation | inhale_duty |
                       // pulse_period | inhale_vmax | exhale_vmax
    double lower = 0.0;
    double upper = 1.0;
    double step = 0.0;  // grid step for sweeps; 0 = not sweepable

    void validate() const;
};

struct ParamSpace {
    std::vector<ParamDef> params;

    void validate() const;
};

bool is_known_param(const std::string& name);
void apply_param(ScenarioSpec& spec, const std::string& name, double value);

enum class ObjectiveKind : uint8_t { PeakConcentration, Auc, DurationAbove };

struct Objective {
    ObjectiveKind kind = ObjectiveKind::PeakConcentration;
    bool maximize = true;
    double threshold = 0.0;  // for DurationAbove
};

double objective_value(const RunResult& run, const Objective& obj);
double evaluate_objective(const ScenarioSpec& base, const ParamSpace& space,
                          const std::vector<double>& values, const Objective& obj);

struct SweepRow {
    std::vector<double> values;  // parameter values in space order
    double objective = 0.0;
    double peak = 0.0;
    double auc = 0.0;
    double duration_above = 0.0;
    long steps = 0;
};

struct SweepResult {
    std::vector<std::string> param_names;
    std::vector<SweepRow> rows;  // lexicographic order over the grid
};

SweepResult grid_sweep(const ParamSpace& space, const ScenarioSpec& base, const Objective& obj,
                       int budget = 1000);

struct OptEvaluation {
    std::vector<double> values;
    double objective = 0.0;
};

struct OptResult {
    std::vector<std::string> param_names;
    std::vector<double> best_values;
    double best_objective = 0.0;
    bool converged = false;
    int evaluations = 0;
    std::vector<OptEvaluation> log;
};

// Bounded Nelder-Mead over an arbitrary function (minimizes when
// maximize=false objective semantics are folded in by the caller).
OptResult nelder_mead_fn(const std::vector<ParamDef>& params,
                         const std::function<double(const std::vector<double>&)>& f, bool maximize,
                         int budget, unsigned seed);

OptResult nelder_mead(const ParamSpace& space, const ScenarioSpec& base, const Objective& obj, int budget,
                      unsigned seed);

}  // namespace dognose
