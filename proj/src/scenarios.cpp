#include "dognose/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace dognose {

void ScenarioSpec::validate() const {
    geometry.validate();
    pose.validate();
    domain.validate();
    inhale_schedule.validate();
    exhale_schedule.validate();
    inhale_motor.validate();
    exhale_motor.validate();
    source.validate();
    outgassing.validate();
    transport.validate();
    sensor.validate();
    flow.validate();
    if (duration <= 0) throw_sim_error(ErrorCode::BadConfig, "duration must be positive");
    if (motor_off_time && !(*motor_off_time < duration))
        throw_sim_error(ErrorCode::BadConfig, "motor_off_time must precede the end of the run");
    if (snapshot_cadence && *snapshot_cadence <= 0)
        throw_sim_error(ErrorCode::BadConfig, "snapshot_cadence must be positive");
}

namespace {

void cell_speed_field(const GridMask& mask, const FlowState& s, Field2d& out) {
    out.resize(mask.nx, mask.ny);
    for (int j = 0; j < mask.ny; ++j)
        for (int i = 0; i < mask.nx; ++i) {
            const double uc = 0.5 * (s.u(i, j) + s.u(i + 1, j));
            const double vc = 0.5 * (s.v(i, j) + s.v(i, j + 1));
            out(i, j) = std::sqrt(uc * uc + vc * vc);
        }
}

}  // namespace

RunResult run_scenario(const ScenarioSpec& spec, const SnapshotSink& snapshots) {
    spec.validate();
    const auto wall_start = std::chrono::steady_clock::now();

    GridMask mask = build_scene(spec.geometry, spec.pose, spec.domain);
    std::vector<int> source_cells;
    if (spec.source.emission_rate > 0) source_cells = mask.source_cells(spec.source);
    std::vector<int> sensor_cells = mask.sensor_region_cells(spec.sensor.region_depth, spec.sensor.region_width);
    if (sensor_cells.empty()) throw_sim_error(ErrorCode::BadConfig, "sensor region contains no chamber cells");

    FlowSolver fsolver(mask, spec.flow);
    TransportSolver tsolver(mask, spec.transport);
    FlowState state = fsolver.make_state();
    Field2d c = tsolver.make_field();

    MotorState inhale_motor, exhale_motor;
    RunResult res;
    res.preset = spec.name;
    res.spec = spec;
    res.trace.sample_period = spec.sensor.sample_period;

    double reading = spec.transport.background;  // relaxed state starts at zero
    res.trace.rows.push_back({0.0, reading, 0.0, 0.0});

    MassLedger total;
    RunStats& stats = res.stats;
    const double h = mask.h;
    const double inf = std::numeric_limits<double>::infinity();
    const double moff = spec.motor_off_time ? *spec.motor_off_time : inf;
    const double tube_ratio = std::max(1.0, mask.tube_area_ratio);

    double t = 0.0;
    double next_sample = spec.sensor.sample_period;
    double next_snap = spec.snapshot_cadence ? *spec.snapshot_cadence : inf;

    if (snapshots && spec.snapshot_cadence) {
        Field2d speed;
        cell_speed_field(mask, state, speed);
        snapshots(0.0, speed, state.p, c);
    }

    long step = 0;
    while (t < spec.duration - 1e-9) {
        const bool off = t >= moff;
        const double duty_i = off ? 0.0 : command_at(spec.inhale_schedule, t);
        const double duty_e = off ? 0.0 : command_at(spec.exhale_schedule, t);

        // dt: CFL on the current field and on the speeds the motors could
        // reach this step, snapped to the next event time
        const double fi_hi = std::max(inhale_motor.effective_speed_fraction, duty_i);
        const double fe_hi = std::max(exhale_motor.effective_speed_fraction, duty_e);
        const double si_hi = port_speed({duty_i, fi_hi}, spec.inhale_motor) * tube_ratio;
        const double se_hi = port_speed({duty_e, fe_hi}, spec.exhale_motor);
        const double vbound = std::max({fsolver.max_speed(state), si_hi, se_hi, 1e-9});
        double dt = std::min(spec.flow.cfl_target * h / vbound, spec.flow.dt_max);

        double t_event = std::min(next_sample, spec.duration);
        if (moff > t) t_event = std::min(t_event, moff);
        if (spec.source.start_time > t) t_event = std::min(t_event, spec.source.start_time);
        t_event = std::min(t_event, next_schedule_edge(spec.inhale_schedule, t));
        t_event = std::min(t_event, next_schedule_edge(spec.exhale_schedule, t));
        if (snapshots && next_snap > t) t_event = std::min(t_event, next_snap);

        bool lands_on_event = false;
        if (t + dt >= t_event - 1e-12) {
            dt = t_event - t;
            lands_on_event = true;
        }

        inhale_motor = motor_response(inhale_motor, duty_i, spec.inhale_motor, dt);
        exhale_motor = motor_response(exhale_motor, duty_e, spec.exhale_motor, dt);
        const double si = port_speed(inhale_motor, spec.inhale_motor);
        const double se = port_speed(exhale_motor, spec.exhale_motor);

        try {
            fsolver.apply_jet_bcs(state, si, se);
            fsolver.params().dt = dt;
            const FlowStepStats fst = fsolver.step_flow(state);
            stats.max_divergence = std::max(stats.max_divergence, fst.max_divergence);
            stats.max_projection_cycles = std::max(stats.max_projection_cycles, fst.projection.cycles);

            const MassLedger delta =
                tsolver.step_scalar(c, state, source_cells, spec.source.emission_rate,
                                    spec.source.start_time, spec.outgassing,
                                    inhale_motor.effective_speed_fraction, dt, t);
            total.emitted += delta.emitted;
            total.outgassed += delta.outgassed;
            total.removed_tube += delta.removed_tube;
            total.removed_open += delta.removed_open;
        } catch (const SimError& e) {
            throw SimError(e.code(), std::string(e.what()) + " [scenario '" + spec.name + "' step " +
                                         std::to_string(step) + ", t = " + std::to_string(t) + " s]");
        }

        t = lands_on_event ? t_event : t + dt;
        ++step;

        const double minc = tsolver.min_concentration(c);
        stats.min_concentration = std::min(stats.min_concentration, minc);

        if (t >= next_sample - 1e-9 && next_sample <= spec.duration + 1e-9) {
            const double avg = tsolver.region_average(c, sensor_cells);
            reading = sample_sensor(avg, spec.transport.background, spec.sensor.response_time, reading,
                                    spec.sensor.sample_period);
            res.trace.rows.push_back(
                {next_sample, reading, inhale_motor.effective_speed_fraction,
                 exhale_motor.effective_speed_fraction});
            next_sample += spec.sensor.sample_period;
        }
        if (snapshots && t >= next_snap - 1e-9) {
            Field2d speed;
            cell_speed_field(mask, state, speed);
            snapshots(t, speed, state.p, c);
            next_snap += *spec.snapshot_cadence;
        }
    }

    total.in_domain = tsolver.total_mass(c);
    total.residual =
        total.emitted + total.outgassed - total.in_domain - total.removed_tube - total.removed_open;
    res.ledger = total;
    stats.steps = step;
    res.final_concentration = std::move(c);
    res.final_flow = std::move(state);
    stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return res;
}

double calibrate_emission(const ScenarioSpec& base, double target_peak) {
    if (target_peak <= 0) throw_sim_error(ErrorCode::BadConfig, "target peak must be positive");
    ScenarioSpec ref = base;
    if (ref.source.emission_rate <= 0) ref.source.emission_rate = 1.0;
    const double s0 = ref.source.emission_rate;
    const double bg = ref.transport.background;
    const RunResult r = run_scenario(ref);
    double p0 = 0.0;
    for (const TraceRow& row : r.trace.rows) p0 = std::max(p0, row.reading);
    // explicit diffusion leaves astronomically small tails everywhere, so
    // "nothing reached the sensor" means below any physical signal
    if (!(p0 - bg > 1e-12))
        throw_sim_error(ErrorCode::DegenerateRun, "no tracer reached the sensor in the reference run");
    return s0 * (target_peak - bg) / (p0 - bg);
}

double calibrate_emission(const std::string& preset_name, double target_peak) {
    return calibrate_emission(preset(preset_name), target_peak);
}

}  // namespace dognose
