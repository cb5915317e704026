#pragma once

#include "dognose/common.hpp"

namespace dognose {

enum class ScheduleMode : uint8_t { Off, Continuous, Pulsed };

// Commanded duty waveform. Pulsed: duty for the first on_fraction of each
// period (shifted by phase), zero otherwise.
struct Schedule {
    ScheduleMode mode = ScheduleMode::Off;
    double duty = 1.0;
    double period = 20.0;
    double on_fraction = 0.5;
    double phase = 0.0;

    void validate() const;
};

// DC motor abstraction: affine duty-to-speed map above a stall threshold,
// asymmetric first-order lag (shutoff slower than spin-up).
struct MotorSpec {
    double v_max = 2.0;      // m/s jet face speed at duty 1
    double stall_duty = 0.2;
    double tau_on = 0.5;   // s
    double tau_off = 2.0;  // s

    void validate() const;
};

struct MotorState {
    double commanded_duty = 0.0;
    double effective_speed_fraction = 0.0;
};

double command_at(const Schedule& s, double t);
MotorState motor_response(const MotorState& state, double duty, const MotorSpec& spec, double dt);
double port_speed(const MotorState& state, const MotorSpec& spec);

// Next time > t at which the commanded duty changes (pulse edge); infinity
// for Off/Continuous. Lets the runner land steps exactly on edges.
double next_schedule_edge(const Schedule& s, double t);

}  // namespace dognose
