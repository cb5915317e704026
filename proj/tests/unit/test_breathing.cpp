#include "doctest.h"

#include <cmath>

#include "dognose/breathing.hpp"

using namespace dognose;

TEST_CASE("command_at covers the three modes") {
    Schedule cont{ScheduleMode::Continuous, 1.0, 20.0, 0.5, 0.0};
    CHECK(command_at(cont, 0.0) == 1.0);
    CHECK(command_at(cont, 123.4) == 1.0);

    Schedule pulsed{ScheduleMode::Pulsed, 1.0, 20.0, 0.5, 0.0};
    CHECK(command_at(pulsed, 5.0) == 1.0);
    CHECK(command_at(pulsed, 15.0) == 0.0);

    Schedule fast{ScheduleMode::Pulsed, 1.0, 0.2, 0.5, 0.0};
    CHECK(command_at(fast, 0.05) == 1.0);
    CHECK(command_at(fast, 0.15) == 0.0);

    Schedule off;
    CHECK(command_at(off, 7.0) == 0.0);
}

TEST_CASE("pulsed command is exactly periodic") {
    Schedule s{ScheduleMode::Pulsed, 0.8, 20.0, 0.3, 2.5};
    for (double t : {0.0, 1.0, 5.9, 6.1, 8.4999, 8.5001, 13.7, 19.99}) {
        CHECK(command_at(s, t) == command_at(s, t + 20.0));
        CHECK(command_at(s, t) == command_at(s, t + 200.0));
    }
}

TEST_CASE("motor_response follows the exact exponential") {
    MotorSpec spec{2.0, 0.2, 0.5, 2.0};
    MotorState st{1.0, 1.0};
    st = motor_response(st, 0.0, spec, 2.0);  // falling: tau_off = 2
    CHECK(st.effective_speed_fraction == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));

    MotorState zero{0.0, 0.0};
    zero = motor_response(zero, 0.0, spec, 0.7);
    CHECK(zero.effective_speed_fraction == 0.0);

    MotorState held{0.5, 0.5};
    for (double dt : {1e-3, 0.1, 10.0}) {
        MotorState out = motor_response(held, 0.5, spec, dt);
        CHECK(out.effective_speed_fraction == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("motor_response is a contraction") {
    MotorSpec spec{2.0, 0.2, 0.4, 1.7};
    for (double duty : {0.0, 0.3, 1.0}) {
        for (double dt : {0.01, 0.5, 3.0}) {
            MotorState a{duty, 0.9}, b{duty, 0.1};
            const double after = std::abs(motor_response(a, duty, spec, dt).effective_speed_fraction -
                                          motor_response(b, duty, spec, dt).effective_speed_fraction);
            CHECK(after <= std::abs(a.effective_speed_fraction - b.effective_speed_fraction) + 1e-15);
        }
    }
}

TEST_CASE("port_speed: stall threshold and affine map") {
    MotorSpec spec{2.0, 0.2, 0.5, 2.0};
    CHECK(port_speed({1.0, 1.0}, spec) == doctest::Approx(2.0));
    CHECK(port_speed({0.15, 0.15}, spec) == 0.0);
    CHECK(port_speed({0.6, 0.6}, spec) == doctest::Approx(1.0));
    CHECK(port_speed({0.2, 0.2}, spec) == 0.0);  // exactly at stall

    // monotone and continuous on [0, 1]
    double prev = -1.0;
    for (int k = 0; k <= 200; ++k) {
        const double f = k / 200.0;
        const double v = port_speed({f, f}, spec);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
}

TEST_CASE("next_schedule_edge lands on pulse transitions") {
    Schedule s{ScheduleMode::Pulsed, 1.0, 20.0, 0.5, 0.0};
    CHECK(next_schedule_edge(s, 0.0) == doctest::Approx(10.0));
    CHECK(next_schedule_edge(s, 9.999999) == doctest::Approx(10.0));
    CHECK(next_schedule_edge(s, 10.0) == doctest::Approx(20.0));
    CHECK(next_schedule_edge(s, 15.0) == doctest::Approx(20.0));
    CHECK(std::isinf(next_schedule_edge(Schedule{}, 3.0)));
}

TEST_CASE("schedule and motor validation") {
    Schedule bad{ScheduleMode::Pulsed, 1.5, 20.0, 0.5, 0.0};
    CHECK_THROWS_AS(bad.validate(), SimError);
    Schedule bad2{ScheduleMode::Pulsed, 1.0, -1.0, 0.5, 0.0};
    CHECK_THROWS_AS(bad2.validate(), SimError);
    MotorSpec bad3{2.0, 1.0, 0.5, 2.0};
    CHECK_THROWS_AS(bad3.validate(), SimError);
}
