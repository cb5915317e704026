#include <map>

#include "dognose/scenarios.hpp"

namespace dognose {

namespace {

ScenarioSpec base_spec() {
    ScenarioSpec s;
    s.source.emission_rate = 1.0;
    s.source.start_time = 10.0;
    s.duration = 300.0;
    s.motor_off_time = 240.0;
    return s;
}

Schedule off() { return Schedule{ScheduleMode::Off, 0.0, 20.0, 0.5, 0.0}; }
Schedule continuous(double duty) { return Schedule{ScheduleMode::Continuous, duty, 20.0, 0.5, 0.0}; }
Schedule pulsed(double period, double on_fraction, double duty) {
    return Schedule{ScheduleMode::Pulsed, duty, period, on_fraction, 0.0};
}

std::string height_tag(double m) {
    if (m == 0.0) return "h0cm";
    if (m == 0.0127) return "h1.27cm";
    if (m == 0.0508) return "h5.08cm";
    return "h?";
}

const std::map<std::string, ScenarioSpec>& catalog() {
    static const std::map<std::string, ScenarioSpec> presets = [] {
        std::map<std::string, ScenarioSpec> m;
        const double heights[] = {0.0, 0.0127, 0.0508};

        for (double hgt : heights) {
            ScenarioSpec s = base_spec();
            s.pose.elevation = hgt;
            s.inhale_schedule = off();
            s.exhale_schedule = off();
            s.name = "passive_" + height_tag(hgt);
            m[s.name] = s;

            s.inhale_schedule = continuous(1.0);
            s.name = "inhale_" + height_tag(hgt);
            m[s.name] = s;

            s.exhale_schedule = continuous(1.0);
            s.name = "dognose_" + height_tag(hgt);
            m[s.name] = s;
        }

        for (int duty : {60, 80, 100}) {
            ScenarioSpec s = base_spec();
            s.pose.elevation = 0.0508;
            s.inhale_schedule = continuous(duty / 100.0);
            s.exhale_schedule = continuous(1.0);
            s.name = "dognose_duty" + std::to_string(duty);
            m[s.name] = s;
        }

        {
            ScenarioSpec s = base_spec();
            s.pose.orientation = Orientation::Horizontal90;
            s.pose.elevation = 0.0;
            s.inhale_schedule = continuous(1.0);
            s.exhale_schedule = off();
            s.name = "ninety_inhale";
            m[s.name] = s;
            s.exhale_schedule = continuous(1.0);
            s.name = "ninety_dognose";
            m[s.name] = s;
        }

        {
            ScenarioSpec s = base_spec();
            s.pose.elevation = 0.0508;
            s.inhale_schedule = pulsed(20.0, 0.5, 1.0);
            s.exhale_schedule = continuous(1.0);
            s.name = "pulsed_20s";
            m[s.name] = s;
        }

        {
            ScenarioSpec s = base_spec();
            s.pose.elevation = 0.0508;
            s.inhale_schedule = continuous(1.0);
            s.exhale_schedule = continuous(1.0);
            s.source.emission_rate = 0.0;
            s.outgassing.enabled = true;
            s.outgassing.rate = 0.002;
            s.name = "no_source_outgassing";
            m[s.name] = s;
        }
        return m;
    }();
    return presets;
}

}  // namespace

std::vector<std::string> list_presets() {
    std::vector<std::string> names;
    for (const auto& [name, spec] : catalog()) names.push_back(name);
    return names;
}

bool is_preset(const std::string& name) {
    const auto& m = catalog();
    return m.count(name) > 0 || m.count(name + "cm") > 0;
}

ScenarioSpec preset(const std::string& name) {
    const auto& m = catalog();
    auto it = m.find(name);
    if (it == m.end()) it = m.find(name + "cm");  // accept e.g. passive_h0 for passive_h0cm
    if (it == m.end()) throw_sim_error(ErrorCode::BadConfig, "unknown preset '" + name + "'");
    return it->second;
}

}  // namespace dognose
