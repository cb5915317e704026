#include "dognose/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dognose {

MetricsReport compute_metrics(const SensorTrace& trace, double threshold,
                              std::optional<double> motor_off_time) {
    if (trace.rows.empty()) throw_sim_error(ErrorCode::EmptyTrace, "trace has no rows");
    MetricsReport r;
    r.threshold = threshold;
    r.peak = trace.rows.front().reading;
    r.time_to_peak = trace.rows.front().t;
    for (const TraceRow& row : trace.rows) {
        if (row.reading > r.peak) {
            r.peak = row.reading;
            r.time_to_peak = row.t;
        }
        if (row.reading > threshold) r.duration_above += trace.sample_period;
    }
    for (size_t k = 1; k < trace.rows.size(); ++k) {
        const TraceRow& a = trace.rows[k - 1];
        const TraceRow& b = trace.rows[k];
        r.auc += 0.5 * (a.reading + b.reading) * (b.t - a.t);
    }
    if (motor_off_time) r.post_off_peak = detect_post_off_peak(trace, *motor_off_time);
    return r;
}

std::optional<PostOffPeak> detect_post_off_peak(const SensorTrace& trace, double off_time) {
    const auto& rows = trace.rows;
    if (rows.empty() || off_time < rows.front().t || off_time > rows.back().t) return std::nullopt;

    // reading at off_time: last sample at or before it
    double at_off = rows.front().reading;
    for (const TraceRow& row : rows) {
        if (row.t > off_time) break;
        at_off = row.reading;
    }

    std::optional<size_t> best;
    for (size_t k = 0; k < rows.size(); ++k) {
        if (rows[k].t <= off_time) continue;
        if (!best || rows[k].reading > rows[*best].reading) best = k;
    }
    if (!best || *best == 0) return std::nullopt;
    // local maximum among the existing samples; a trace still rising at the
    // end of the run counts (the secondary peak just was not over yet)
    const double v = rows[*best].reading;
    if (v < rows[*best - 1].reading) return std::nullopt;
    if (*best + 1 < rows.size() && v < rows[*best + 1].reading) return std::nullopt;
    if (!(v >= 1.1 * at_off)) return std::nullopt;
    return PostOffPeak{rows[*best].t, v};
}

std::pair<int, double> detect_cycles(const SensorTrace& trace, double expected_period) {
    const auto& rows = trace.rows;
    if (expected_period <= 2.0 * trace.sample_period)
        throw_sim_error(ErrorCode::BadConfig, "expected_period must exceed 2 sample periods");
    // local maximum over a window of a quarter expected period each side
    const int w = std::max(1, static_cast<int>(std::floor(0.25 * expected_period / trace.sample_period)));
    std::vector<double> maxima_t;
    double last_t = -1e300;
    for (int k = w; k + w < static_cast<int>(rows.size()); ++k) {
        const double v = rows[static_cast<size_t>(k)].reading;
        bool is_max = true;
        bool strictly_above = false;
        for (int d = -w; d <= w && is_max; ++d) {
            if (d == 0) continue;
            const double o = rows[static_cast<size_t>(k + d)].reading;
            if (o > v) is_max = false;
            if (v > o) strictly_above = true;
        }
        if (!is_max || !strictly_above) continue;
        if (rows[static_cast<size_t>(k)].t - last_t < 0.5 * expected_period) continue;
        maxima_t.push_back(rows[static_cast<size_t>(k)].t);
        last_t = rows[static_cast<size_t>(k)].t;
    }
    const int count = static_cast<int>(maxima_t.size());
    double est = 0.0;
    if (count >= 2) {
        // mean gap, with gaps from occasional missed crests filtered out
        std::vector<double> gaps;
        for (size_t k = 1; k < maxima_t.size(); ++k) gaps.push_back(maxima_t[k] - maxima_t[k - 1]);
        std::vector<double> sorted = gaps;
        std::sort(sorted.begin(), sorted.end());
        const double median = sorted[sorted.size() / 2];
        double sum = 0.0;
        int n = 0;
        for (double g : gaps)
            if (g <= 1.5 * median) {
                sum += g;
                ++n;
            }
        est = n > 0 ? sum / n : 0.0;
    }
    return {count, est};
}

std::vector<SchemeComparison> compare_schemes(
    const std::vector<std::pair<std::string, MetricsReport>>& reports) {
    if (reports.size() < 2) throw_sim_error(ErrorCode::BadConfig, "compare_schemes needs at least 2 reports");
    std::vector<SchemeComparison> out;
    struct MetricDef {
        const char* name;
        double (*get)(const MetricsReport&);
    };
    const MetricDef defs[] = {
        {"peak", [](const MetricsReport& r) { return r.peak; }},
        {"duration_above", [](const MetricsReport& r) { return r.duration_above; }},
        {"auc", [](const MetricsReport& r) { return r.auc; }},
        {"time_to_peak", [](const MetricsReport& r) { return r.time_to_peak; }},
    };
    for (const MetricDef& def : defs) {
        SchemeComparison c;
        c.metric = def.name;
        std::vector<std::pair<std::string, double>> vals;
        for (const auto& [name, rep] : reports) vals.emplace_back(name, def.get(rep));
        std::stable_sort(vals.begin(), vals.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        for (const auto& [name, v] : vals) c.ordering.push_back(name);
        for (size_t a = 0; a < vals.size(); ++a)
            for (size_t b = a + 1; b < vals.size(); ++b) {
                const double denom = vals[b].second;
                const double ratio = denom != 0.0 ? vals[a].second / denom
                                                  : std::numeric_limits<double>::infinity();
                c.ratios.emplace_back(vals[a].first, vals[b].first, ratio);
                if (vals[a].second == vals[b].second) c.tie = true;
            }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace dognose
