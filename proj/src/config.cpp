#include "dognose/config.hpp"

#include <fstream>

namespace dognose {

using nlohmann::json;

namespace {

const char* orientation_name(Orientation o) {
    return o == Orientation::FaceDown ? "face_down" : "horizontal90";
}
Orientation orientation_from(const std::string& s) {
    if (s == "face_down") return Orientation::FaceDown;
    if (s == "horizontal90") return Orientation::Horizontal90;
    throw_sim_error(ErrorCode::BadConfig, "unknown orientation '" + s + "'");
}

const char* boundary_name(BoundaryClass b) { return b == BoundaryClass::Solid ? "solid" : "open"; }
BoundaryClass boundary_from(const std::string& s) {
    if (s == "solid") return BoundaryClass::Solid;
    if (s == "open") return BoundaryClass::Open;
    throw_sim_error(ErrorCode::BadConfig, "unknown boundary class '" + s + "'");
}

const char* schedule_name(ScheduleMode m) {
    switch (m) {
        case ScheduleMode::Off: return "off";
        case ScheduleMode::Continuous: return "continuous";
        case ScheduleMode::Pulsed: return "pulsed";
    }
    return "off";
}
ScheduleMode schedule_from(const std::string& s) {
    if (s == "off") return ScheduleMode::Off;
    if (s == "continuous") return ScheduleMode::Continuous;
    if (s == "pulsed") return ScheduleMode::Pulsed;
    throw_sim_error(ErrorCode::BadConfig, "unknown schedule mode '" + s + "'");
}

json schedule_to_json(const Schedule& s) {
    return {{"mode", schedule_name(s.mode)},
            {"duty", s.duty},
            {"period", s.period},
            {"on_fraction", s.on_fraction},
            {"phase", s.phase}};
}
Schedule schedule_from_json(const json& j) {
    Schedule s;
    s.mode = schedule_from(j.at("mode").get<std::string>());
    s.duty = j.at("duty").get<double>();
    s.period = j.at("period").get<double>();
    s.on_fraction = j.at("on_fraction").get<double>();
    s.phase = j.at("phase").get<double>();
    return s;
}

json motor_to_json(const MotorSpec& m) {
    return {{"v_max", m.v_max}, {"stall_duty", m.stall_duty}, {"tau_on", m.tau_on}, {"tau_off", m.tau_off}};
}
MotorSpec motor_from_json(const json& j) {
    MotorSpec m;
    m.v_max = j.at("v_max").get<double>();
    m.stall_duty = j.at("stall_duty").get<double>();
    m.tau_on = j.at("tau_on").get<double>();
    m.tau_off = j.at("tau_off").get<double>();
    return m;
}

}  // namespace

json scenario_to_json(const ScenarioSpec& s) {
    json j;
    j["name"] = s.name;
    j["geometry"] = {{"snout_height", s.geometry.snout_height},
                     {"nostril_spacing", s.geometry.nostril_spacing},
                     {"inhale_diameter", s.geometry.inhale_diameter},
                     {"exhale_diameter", s.geometry.exhale_diameter},
                     {"exhale_angle", s.geometry.exhale_angle},
                     {"chamber_width", s.geometry.chamber_width},
                     {"chamber_depth", s.geometry.chamber_depth}};
    j["pose"] = {{"orientation", orientation_name(s.pose.orientation)}, {"elevation", s.pose.elevation}};
    j["domain"] = {{"width", s.domain.width},
                   {"height", s.domain.height},
                   {"cell_size", s.domain.cell_size},
                   {"left", boundary_name(s.domain.left)},
                   {"right", boundary_name(s.domain.right)},
                   {"top", boundary_name(s.domain.top)},
                   {"bottom", boundary_name(s.domain.bottom)}};
    j["inhale_schedule"] = schedule_to_json(s.inhale_schedule);
    j["exhale_schedule"] = schedule_to_json(s.exhale_schedule);
    j["inhale_motor"] = motor_to_json(s.inhale_motor);
    j["exhale_motor"] = motor_to_json(s.exhale_motor);
    j["source"] = {{"offset", s.source.offset},
                   {"emission_rate", s.source.emission_rate},
                   {"start_time", s.source.start_time},
                   {"radius", s.source.radius}};
    j["outgassing"] = {{"enabled", s.outgassing.enabled},
                       {"rate", s.outgassing.rate},
                       {"active_below_fraction", s.outgassing.active_below_fraction}};
    j["transport"] = {{"diffusivity", s.transport.diffusivity}, {"background", s.transport.background}};
    j["sensor"] = {{"region_depth", s.sensor.region_depth},
                   {"region_width", s.sensor.region_width},
                   {"response_time", s.sensor.response_time},
                   {"sample_period", s.sensor.sample_period}};
    j["flow"] = {{"kinematic_viscosity", s.flow.kinematic_viscosity},
                 {"dt_max", s.flow.dt_max},
                 {"cfl_target", s.flow.cfl_target},
                 {"div_tol", s.flow.div_tol},
                 {"max_projection_iters", s.flow.max_projection_iters}};
    j["duration"] = s.duration;
    j["motor_off_time"] = s.motor_off_time ? json(*s.motor_off_time) : json(nullptr);
    j["snapshot_cadence"] = s.snapshot_cadence ? json(*s.snapshot_cadence) : json(nullptr);
    return j;
}

ScenarioSpec scenario_from_json(const json& j) {
    try {
        ScenarioSpec s;
        s.name = j.value("name", std::string("custom"));
        const json& g = j.at("geometry");
        s.geometry.snout_height = g.at("snout_height").get<double>();
        s.geometry.nostril_spacing = g.at("nostril_spacing").get<double>();
        s.geometry.inhale_diameter = g.at("inhale_diameter").get<double>();
        s.geometry.exhale_diameter = g.at("exhale_diameter").get<double>();
        s.geometry.exhale_angle = g.at("exhale_angle").get<double>();
        s.geometry.chamber_width = g.at("chamber_width").get<double>();
        s.geometry.chamber_depth = g.at("chamber_depth").get<double>();
        const json& p = j.at("pose");
        s.pose.orientation = orientation_from(p.at("orientation").get<std::string>());
        s.pose.elevation = p.at("elevation").get<double>();
        const json& d = j.at("domain");
        s.domain.width = d.at("width").get<double>();
        s.domain.height = d.at("height").get<double>();
        s.domain.cell_size = d.at("cell_size").get<double>();
        s.domain.left = boundary_from(d.at("left").get<std::string>());
        s.domain.right = boundary_from(d.at("right").get<std::string>());
        s.domain.top = boundary_from(d.at("top").get<std::string>());
        s.domain.bottom = boundary_from(d.at("bottom").get<std::string>());
        s.inhale_schedule = schedule_from_json(j.at("inhale_schedule"));
        s.exhale_schedule = schedule_from_json(j.at("exhale_schedule"));
        s.inhale_motor = motor_from_json(j.at("inhale_motor"));
        s.exhale_motor = motor_from_json(j.at("exhale_motor"));
        const json& src = j.at("source");
        s.source.offset = src.at("offset").get<double>();
        s.source.emission_rate = src.at("emission_rate").get<double>();
        s.source.start_time = src.at("start_time").get<double>();
        s.source.radius = src.at("radius").get<double>();
        const json& og = j.at("outgassing");
        s.outgassing.enabled = og.at("enabled").get<bool>();
        s.outgassing.rate = og.at("rate").get<double>();
        s.outgassing.active_below_fraction = og.at("active_below_fraction").get<double>();
        const json& tr = j.at("transport");
        s.transport.diffusivity = tr.at("diffusivity").get<double>();
        s.transport.background = tr.at("background").get<double>();
        const json& sn = j.at("sensor");
        s.sensor.region_depth = sn.at("region_depth").get<double>();
        s.sensor.region_width = sn.at("region_width").get<double>();
        s.sensor.response_time = sn.at("response_time").get<double>();
        s.sensor.sample_period = sn.at("sample_period").get<double>();
        const json& f = j.at("flow");
        s.flow.kinematic_viscosity = f.at("kinematic_viscosity").get<double>();
        s.flow.dt_max = f.at("dt_max").get<double>();
        s.flow.cfl_target = f.at("cfl_target").get<double>();
        s.flow.div_tol = f.at("div_tol").get<double>();
        s.flow.max_projection_iters = f.at("max_projection_iters").get<int>();
        s.duration = j.at("duration").get<double>();
        if (!j.at("motor_off_time").is_null()) s.motor_off_time = j.at("motor_off_time").get<double>();
        else s.motor_off_time.reset();
        if (!j.at("snapshot_cadence").is_null()) s.snapshot_cadence = j.at("snapshot_cadence").get<double>();
        else s.snapshot_cadence.reset();
        return s;
    } catch (const json::exception& e) {
        throw_sim_error(ErrorCode::BadConfig, std::string("config parse error: ") + e.what());
    }
}

ScenarioSpec load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_sim_error(ErrorCode::BadConfig, "cannot open config '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw_sim_error(ErrorCode::BadConfig, std::string("config parse error: ") + e.what());
    }
    return scenario_from_json(j);
}

void save_scenario_file(const ScenarioSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw_sim_error(ErrorCode::BadConfig, "cannot write config '" + path + "'");
    out << scenario_to_json(spec).dump(2) << "\n";
}

ScenarioSpec apply_overrides(const ScenarioSpec& spec, const std::vector<std::string>& overrides) {
    json j = scenario_to_json(spec);
    for (const std::string& ov : overrides) {
        const size_t eq = ov.find('=');
        if (eq == std::string::npos)
            throw_sim_error(ErrorCode::BadConfig, "override '" + ov + "' is not key=value");
        const std::string path = ov.substr(0, eq);
        const std::string value = ov.substr(eq + 1);
        json* node = &j;
        size_t pos = 0;
        std::string last;
        while (true) {
            const size_t dot = path.find('.', pos);
            const std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
            if (dot == std::string::npos) {
                last = key;
                break;
            }
            if (!node->contains(key))
                throw_sim_error(ErrorCode::BadConfig, "unknown config section '" + key + "'");
            node = &(*node)[key];
            pos = dot + 1;
        }
        if (!node->contains(last))
            throw_sim_error(ErrorCode::BadConfig, "unknown config key '" + path + "'");
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::exception&) {
            parsed = value;  // bare strings (e.g. orientation names)
        }
        (*node)[last] = parsed;
    }
    return scenario_from_json(j);
}

}  // namespace dognose
