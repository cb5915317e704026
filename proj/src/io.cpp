#include "dognose/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dognose/config.hpp"

namespace dognose {

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    for (int prec : {15, 16, 17}) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

std::string trace_to_csv(const SensorTrace& trace) {
    std::string out = kTraceHeader;
    out += '\n';
    for (const TraceRow& r : trace.rows) {
        out += format_double(r.t);
        out += ',';
        out += format_double(r.reading);
        out += ',';
        out += format_double(r.inhale_f);
        out += ',';
        out += format_double(r.exhale_f);
        out += '\n';
    }
    return out;
}

SensorTrace trace_from_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw_sim_error(ErrorCode::BadConfig, "cannot open trace '" + path + "'");
    std::string line;
    int lineno = 0;
    SensorTrace trace;
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno == 1) {
            if (line != kTraceHeader)
                throw_sim_error(ErrorCode::BadConfig,
                                path + ":1: expected header '" + std::string(kTraceHeader) + "'");
            continue;
        }
        if (line.empty()) continue;
        double vals[4];
        const char* s = line.c_str();
        char* end = nullptr;
        for (int k = 0; k < 4; ++k) {
            vals[k] = std::strtod(s, &end);
            if (end == s)
                throw_sim_error(ErrorCode::BadConfig,
                                path + ":" + std::to_string(lineno) + ": malformed trace row");
            s = end;
            if (k < 3) {
                if (*s != ',')
                    throw_sim_error(ErrorCode::BadConfig,
                                    path + ":" + std::to_string(lineno) + ": expected 4 comma-separated fields");
                ++s;
            }
        }
        if (*s != '\0' && *s != '\r')
            throw_sim_error(ErrorCode::BadConfig,
                            path + ":" + std::to_string(lineno) + ": trailing characters in trace row");
        trace.rows.push_back({vals[0], vals[1], vals[2], vals[3]});
    }
    if (trace.rows.size() >= 2) trace.sample_period = trace.rows[1].t - trace.rows[0].t;
    return trace;
}

std::string sweep_to_csv(const SweepResult& sweep) {
    std::string out;
    for (const std::string& name : sweep.param_names) {
        out += name;
        out += ',';
    }
    out += "objective,peak_ugm3,auc_ugsm3,duration_above_s,steps\n";
    for (const SweepRow& r : sweep.rows) {
        for (double v : r.values) {
            out += format_double(v);
            out += ',';
        }
        out += format_double(r.objective);
        out += ',';
        out += format_double(r.peak);
        out += ',';
        out += format_double(r.auc);
        out += ',';
        out += format_double(r.duration_above);
        out += ',';
        out += std::to_string(r.steps);
        out += '\n';
    }
    return out;
}

json ledger_to_json(const MassLedger& l) {
    return {{"emitted_ug", l.emitted},
            {"in_domain_ug", l.in_domain},
            {"removed_tube_ug", l.removed_tube},
            {"removed_open_ug", l.removed_open},
            {"outgassed_ug", l.outgassed},
            {"residual_ug", l.residual}};
}

json metrics_to_json(const MetricsReport& r) {
    json j = {{"peak_ugm3", r.peak},
              {"time_to_peak_s", r.time_to_peak},
              {"duration_above_s", r.duration_above},
              {"threshold_ugm3", r.threshold},
              {"auc_ugsm3", r.auc}};
    j["post_off_peak"] =
        r.post_off_peak ? json{{"time_s", r.post_off_peak->time}, {"value_ugm3", r.post_off_peak->value}}
                        : json(nullptr);
    j["cycle_count"] = r.cycle_count ? json(*r.cycle_count) : json(nullptr);
    j["cycle_period_estimate_s"] = r.cycle_period_estimate ? json(*r.cycle_period_estimate) : json(nullptr);
    return j;
}

// wall clock goes to the manifest only, keeping these outputs byte-stable
json stats_to_json(const RunStats& s) {
    return {{"steps", s.steps},
            {"max_divergence_per_s", s.max_divergence},
            {"min_concentration_ugm3", s.min_concentration},
            {"max_projection_cycles", s.max_projection_cycles}};
}

json comparisons_to_json(const std::vector<SchemeComparison>& comps) {
    json out = json::array();
    for (const SchemeComparison& c : comps) {
        json jc;
        jc["metric"] = c.metric;
        jc["ordering"] = c.ordering;
        jc["tie"] = c.tie;
        json ratios = json::array();
        for (const auto& [a, b, v] : c.ratios) ratios.push_back({{"a", a}, {"b", b}, {"ratio", v}});
        jc["ratios"] = ratios;
        out.push_back(jc);
    }
    return out;
}

std::string comparisons_to_csv(const std::vector<SchemeComparison>& comps) {
    std::string out = "metric,a,b,ratio_a_over_b,tie\n";
    for (const SchemeComparison& c : comps)
        for (const auto& [a, b, v] : c.ratios) {
            out += c.metric;
            out += ',';
            out += a;
            out += ',';
            out += b;
            out += ',';
            out += format_double(v);
            out += ',';
            out += (c.tie ? "1" : "0");
            out += '\n';
        }
    return out;
}

json opt_to_json(const OptResult& o) {
    json j;
    j["param_names"] = o.param_names;
    j["best_values"] = o.best_values;
    j["best_objective"] = o.best_objective;
    j["converged"] = o.converged;
    j["evaluations"] = o.evaluations;
    return j;
}

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_sim_error(ErrorCode::BadConfig, "cannot write '" + path + "'");
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_sim_error(ErrorCode::BadConfig, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_manifest(const std::string& out_dir, const ScenarioSpec* config_echo,
                    const std::vector<std::string>& files, double wall_seconds,
                    const std::string& command) {
    json j;
    j["tool_version"] = kToolVersion;
    j["command"] = command;
    j["wall_seconds"] = wall_seconds;
    if (config_echo) j["config"] = scenario_to_json(*config_echo);
    json jf = json::array();
    for (const std::string& name : files) {
        const std::string bytes = read_file(out_dir + "/" + name);
        char hex[20];
        std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
        jf.push_back({{"name", name}, {"bytes", bytes.size()}, {"fnv1a64", hex}});
    }
    j["files"] = jf;
    write_file(out_dir + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace dognose
