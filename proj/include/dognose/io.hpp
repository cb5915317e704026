#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "dognose/metrics.hpp"
#include "dognose/optimizer.hpp"
#include "dognose/scenarios.hpp"

namespace dognose {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kTraceHeader = "t_s,reading_ugm3,inhale_f,exhale_f";

std::string format_double(double v);  // shortest round-trip decimal

std::string trace_to_csv(const SensorTrace& trace);
// Throws BadConfig with the 1-based line number on malformed rows.
SensorTrace trace_from_csv_file(const std::string& path);

std::string sweep_to_csv(const SweepResult& sweep);

nlohmann::json ledger_to_json(const MassLedger& ledger);
nlohmann::json metrics_to_json(const MetricsReport& rep);
nlohmann::json stats_to_json(const RunStats& stats);
nlohmann::json comparisons_to_json(const std::vector<SchemeComparison>& comps);
std::string comparisons_to_csv(const std::vector<SchemeComparison>& comps);
nlohmann::json opt_to_json(const OptResult& opt);

uint64_t fnv1a64(const std::string& bytes);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

// manifest.json: tool version, config echo, wall clock, per-file checksums
void write_manifest(const std::string& out_dir, const ScenarioSpec* config_echo,
                    const std::vector<std::string>& files, double wall_seconds,
                    const std::string& command);

}  // namespace dognose
