#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dognose/common.hpp"

namespace dognose {

struct TraceRow {
    double t = 0.0;        // s
    double reading = 0.0;  // ug/m^3
    double inhale_f = 0.0;
    double exhale_f = 0.0;
};

struct SensorTrace {
    std::vector<TraceRow> rows;
    double sample_period = 1.0;
};

struct PostOffPeak {
    double time = 0.0;
    double value = 0.0;
};

struct MetricsReport {
    double peak = 0.0;
    double time_to_peak = 0.0;
    double duration_above = 0.0;  // s, at the threshold used
    double threshold = 0.0;
    double auc = 0.0;  // ug*s/m^3, trapezoidal
    std::optional<PostOffPeak> post_off_peak;
    std::optional<int> cycle_count;
    std::optional<double> cycle_period_estimate;
};

MetricsReport compute_metrics(const SensorTrace& trace, double threshold,
                              std::optional<double> motor_off_time = std::nullopt);

// Largest reading after off_time, if it is an interior local maximum and
// exceeds the reading at off_time by at least 10 %.
std::optional<PostOffPeak> detect_post_off_peak(const SensorTrace& trace, double off_time);

// Counts local maxima separated by at least half the expected period;
// period estimate is the mean gap between consecutive accepted maxima.
std::pair<int, double> detect_cycles(const SensorTrace& trace, double expected_period);

struct SchemeComparison {
    std::string metric;
    std::vector<std::string> ordering;                              // names, best first
    std::vector<std::tuple<std::string, std::string, double>> ratios;  // a, b, value_a/value_b
    bool tie = false;
};

std::vector<SchemeComparison> compare_schemes(const std::vector<std::pair<std::string, MetricsReport>>& reports);

}  // namespace dognose
