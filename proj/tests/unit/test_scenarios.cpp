#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "dognose/scenarios.hpp"

using namespace dognose;

namespace {

// coarse sideways scene: the source sits right in front of the snout, so
// tracer reaches the sensor within seconds of simulated time
ScenarioSpec quick_scenario() {
    ScenarioSpec s;
    s.name = "quick";
    s.pose.orientation = Orientation::Horizontal90;
    s.pose.elevation = 0.0;
    s.domain.width = s.domain.height = 0.25;
    s.domain.cell_size = 0.25 / 64;
    s.inhale_schedule = {ScheduleMode::Continuous, 1.0, 20.0, 0.5, 0.0};
    s.exhale_schedule = {ScheduleMode::Continuous, 1.0, 20.0, 0.5, 0.0};
    s.source.offset = 0.03;
    s.source.radius = 0.004;
    s.source.emission_rate = 1.0;
    s.source.start_time = 0.5;
    s.sensor.sample_period = 0.5;
    s.duration = 8.0;
    s.motor_off_time = 6.0;
    return s;
}

double trace_peak(const RunResult& r) {
    double p = 0.0;
    for (const TraceRow& row : r.trace.rows) p = std::max(p, row.reading);
    return p;
}

}  // namespace

TEST_CASE("run_scenario: determinism, sampling, stability bounds, ledger") {
    ScenarioSpec spec = quick_scenario();
    RunResult a = run_scenario(spec);
    RunResult b = run_scenario(spec);

    // bit-identical reproducibility
    REQUIRE(a.trace.rows.size() == b.trace.rows.size());
    for (size_t k = 0; k < a.trace.rows.size(); ++k) {
        CHECK(a.trace.rows[k].t == b.trace.rows[k].t);
        CHECK(a.trace.rows[k].reading == b.trace.rows[k].reading);
        CHECK(a.trace.rows[k].inhale_f == b.trace.rows[k].inhale_f);
    }
    CHECK(a.ledger.residual == b.ledger.residual);

    // row count = floor(duration / sample_period) + 1
    CHECK(a.trace.rows.size() == static_cast<size_t>(std::floor(8.0 / 0.5)) + 1);
    // strictly increasing sample times
    for (size_t k = 1; k < a.trace.rows.size(); ++k)
        CHECK(a.trace.rows[k].t == doctest::Approx(a.trace.rows[k - 1].t + 0.5));

    // tracer actually reached the sensor
    CHECK(trace_peak(a) > 0.0);

    // physical bounds the spec demands of every run
    CHECK(a.stats.max_divergence <= 1e-6);
    CHECK(a.stats.min_concentration >= 0.0);
    CHECK(std::abs(a.ledger.residual) <= 0.005 * std::max(a.ledger.emitted, 1e-30));

    // motor-off forces the command to zero and the lag decays
    double f_at_off = 0.0, f_end = 1.0;
    for (const TraceRow& row : a.trace.rows) {
        if (row.t == doctest::Approx(6.0)) f_at_off = row.inhale_f;
        if (row.t == doctest::Approx(8.0)) f_end = row.inhale_f;
    }
    CHECK(f_end < f_at_off);
}

TEST_CASE("sensor readings scale linearly with the emission rate") {
    ScenarioSpec spec = quick_scenario();
    RunResult r1 = run_scenario(spec);
    spec.source.emission_rate = 3.0;
    RunResult r3 = run_scenario(spec);
    REQUIRE(r1.trace.rows.size() == r3.trace.rows.size());
    for (size_t k = 0; k < r1.trace.rows.size(); ++k) {
        const double a = r1.trace.rows[k].reading, b = r3.trace.rows[k].reading;
        if (a > 1e-14) CHECK(b == doctest::Approx(3.0 * a).epsilon(1e-6));
    }
}

TEST_CASE("calibrate_emission scales by linearity") {
    ScenarioSpec spec = quick_scenario();
    RunResult ref = run_scenario(spec);
    const double p0 = trace_peak(ref);
    REQUIRE(p0 > 0.0);
    CHECK(calibrate_emission(spec, p0) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(calibrate_emission(spec, 2.0 * p0) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("calibrate_emission reports a degenerate run when nothing reaches the sensor") {
    ScenarioSpec spec = quick_scenario();
    spec.inhale_schedule.mode = ScheduleMode::Off;
    spec.exhale_schedule.mode = ScheduleMode::Off;
    spec.duration = 2.0;
    spec.motor_off_time.reset();
    CHECK_THROWS_AS(calibrate_emission(spec, 100.0), SimError);
}

TEST_CASE("passive run keeps motor columns at zero") {
    ScenarioSpec spec = quick_scenario();
    spec.inhale_schedule.mode = ScheduleMode::Off;
    spec.exhale_schedule.mode = ScheduleMode::Off;
    spec.duration = 3.0;
    spec.motor_off_time.reset();
    RunResult r = run_scenario(spec);
    for (const TraceRow& row : r.trace.rows) {
        CHECK(row.inhale_f == 0.0);
        CHECK(row.exhale_f == 0.0);
    }
}

TEST_CASE("preset catalog matches the documented experiments") {
    auto names = list_presets();
    auto has = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
    for (const char* n :
         {"passive_h0cm", "passive_h1.27cm", "passive_h5.08cm", "inhale_h0cm", "inhale_h1.27cm",
          "inhale_h5.08cm", "dognose_h0cm", "dognose_h1.27cm", "dognose_h5.08cm", "dognose_duty60",
          "dognose_duty80", "dognose_duty100", "ninety_inhale", "ninety_dognose", "pulsed_20s",
          "no_source_outgassing"})
        CHECK(has(n));

    ScenarioSpec duty60 = preset("dognose_duty60");
    CHECK(duty60.inhale_schedule.mode == ScheduleMode::Continuous);
    CHECK(duty60.inhale_schedule.duty == doctest::Approx(0.6));
    CHECK(duty60.exhale_schedule.mode == ScheduleMode::Continuous);
    CHECK(duty60.exhale_schedule.duty == doctest::Approx(1.0));
    CHECK(duty60.pose.elevation == doctest::Approx(0.0508));

    ScenarioSpec pulsed = preset("pulsed_20s");
    CHECK(pulsed.inhale_schedule.mode == ScheduleMode::Pulsed);
    CHECK(pulsed.inhale_schedule.period == doctest::Approx(20.0));
    CHECK(pulsed.inhale_schedule.on_fraction == doctest::Approx(0.5));
    CHECK(pulsed.exhale_schedule.mode == ScheduleMode::Continuous);

    ScenarioSpec nosrc = preset("no_source_outgassing");
    CHECK(nosrc.source.emission_rate == 0.0);
    CHECK(nosrc.outgassing.enabled);
    CHECK(nosrc.outgassing.rate > 0.0);

    ScenarioSpec ninety = preset("ninety_inhale");
    CHECK(ninety.pose.orientation == Orientation::Horizontal90);
    CHECK(ninety.exhale_schedule.mode == ScheduleMode::Off);

    // height aliases without the unit suffix resolve
    CHECK(preset("passive_h0").name == "passive_h0cm");
    CHECK(is_preset("dognose_h5.08cm"));
    CHECK_FALSE(is_preset("nope"));
    CHECK_THROWS_AS(preset("nope"), SimError);
}

TEST_CASE("scenario errors carry context") {
    ScenarioSpec spec = quick_scenario();
    spec.domain.width = spec.domain.height = 0.1;
    spec.domain.cell_size = 0.1 / 16;
    CHECK_THROWS_AS(run_scenario(spec), SimError);
}
