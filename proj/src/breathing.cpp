#include "dognose/breathing.hpp"

#include <cmath>
#include <limits>

namespace dognose {

void Schedule::validate() const {
    if (duty < 0 || duty > 1) throw_sim_error(ErrorCode::BadConfig, "duty must lie in [0,1]");
    if (mode == ScheduleMode::Pulsed) {
        if (period <= 0) throw_sim_error(ErrorCode::BadConfig, "pulse period must be positive");
        if (!(on_fraction > 0 && on_fraction < 1))
            throw_sim_error(ErrorCode::BadConfig, "on_fraction must lie in (0,1)");
    }
}

void MotorSpec::validate() const {
    if (v_max <= 0) throw_sim_error(ErrorCode::BadConfig, "v_max must be positive");
    if (stall_duty < 0 || stall_duty >= 1) throw_sim_error(ErrorCode::BadConfig, "stall_duty must lie in [0,1)");
    if (tau_on <= 0 || tau_off <= 0) throw_sim_error(ErrorCode::BadConfig, "motor time constants must be positive");
}

double command_at(const Schedule& s, double t) {
    switch (s.mode) {
        case ScheduleMode::Off: return 0.0;
        case ScheduleMode::Continuous: return s.duty;
        case ScheduleMode::Pulsed: {
            double ph = std::fmod(t - s.phase, s.period);
            if (ph < 0) ph += s.period;
            return ph < s.on_fraction * s.period ? s.duty : 0.0;
        }
    }
    return 0.0;
}

MotorState motor_response(const MotorState& state, double duty, const MotorSpec& spec, double dt) {
    if (dt <= 0) throw_sim_error(ErrorCode::BadConfig, "motor dt must be positive");
    const double f = state.effective_speed_fraction;
    const double tau = duty > f ? spec.tau_on : spec.tau_off;
    MotorState out;
    out.commanded_duty = duty;
    out.effective_speed_fraction = duty + (f - duty) * std::exp(-dt / tau);
    return out;
}

double port_speed(const MotorState& state, const MotorSpec& spec) {
    const double f = state.effective_speed_fraction;
    if (f <= spec.stall_duty) return 0.0;
    return spec.v_max * (f - spec.stall_duty) / (1.0 - spec.stall_duty);
}

double next_schedule_edge(const Schedule& s, double t) {
    if (s.mode != ScheduleMode::Pulsed) return std::numeric_limits<double>::infinity();
    const double local = t - s.phase;
    const double k = std::floor(local / s.period);
    const double in = local - k * s.period;
    const double on_len = s.on_fraction * s.period;
    const double edge = (in < on_len - 1e-12) ? (k * s.period + on_len) : ((k + 1) * s.period);
    return edge + s.phase;
}

}  // namespace dognose
