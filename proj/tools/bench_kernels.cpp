// Times the grid kernels on the default scene, serial vs OpenMP rows, and
// checks the two paths produce bit-identical fields.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "dognose/flow.hpp"
#include "dognose/par.hpp"
#include "dognose/scenarios.hpp"
#include "dognose/transport.hpp"

using namespace dognose;
using clock_t_ = std::chrono::steady_clock;

namespace {

struct BenchResult {
    double step_ms = 0.0;
    double advect_proxy_ms = 0.0;
    FlowState state;
    Field2d c;
    long proj_cycles = 0;
};

BenchResult run_case(int threads, int steps) {
    par::set_threads(threads);
    ScenarioSpec spec = preset("dognose_h5.08cm");
    GridMask mask = build_scene(spec.geometry, spec.pose, spec.domain);
    FlowSolver fs(mask, spec.flow);
    TransportSolver ts(mask, spec.transport);
    FlowState st = fs.make_state();
    Field2d c = ts.make_field();
    std::vector<int> src = mask.source_cells(spec.source);

    // ramp the jets the way the motor lag would
    for (int k = 0; k < 40; ++k) {
        const double f = std::min(1.0, k / 30.0);
        fs.apply_jet_bcs(st, 2.0 * f, 1.0 * f);
        fs.params().dt = std::min(fs.cfl_dt(st), 0.9 * mask.h / 2.0);
        fs.step_flow(st);
    }
    BenchResult r;
    const auto t0 = clock_t_::now();
    for (int k = 0; k < steps; ++k) {
        fs.apply_jet_bcs(st, 2.0, 1.0);
        fs.params().dt = fs.cfl_dt(st);
        const FlowStepStats fst = fs.step_flow(st);
        r.proj_cycles += fst.projection.cycles;
        ts.step_scalar(c, st, src, 1.0, 0.0, spec.outgassing, 1.0, fs.params().dt, k * fs.params().dt);
    }
    const auto t1 = clock_t_::now();
    r.step_ms = std::chrono::duration<double, std::milli>(t1 - t0).count() / steps;
    r.state = st;
    r.c = c;
    return r;
}

}  // namespace

int main(int argc, char** argv) {
    const int steps = argc > 1 ? std::atoi(argv[1]) : 300;
    int threads = argc > 2 ? std::atoi(argv[2]) : 0;
    par::set_threads(threads <= 0 ? 0 : threads);
    threads = par::threads();

    std::printf("coupled step benchmark, 128x128 default scene, %d steps\n", steps);
    const BenchResult serial = run_case(1, steps);
    std::printf("  serial      : %7.3f ms/step  (%.1f projection cycles/step)\n", serial.step_ms,
                double(serial.proj_cycles) / steps);
    if (threads > 1) {
        const BenchResult par_r = run_case(threads, steps);
        std::printf("  omp %2d rows : %7.3f ms/step  (speedup %.2fx)\n", threads, par_r.step_ms,
                    serial.step_ms / par_r.step_ms);
        const bool same = serial.state.u.a == par_r.state.u.a && serial.state.v.a == par_r.state.v.a &&
                          serial.state.p.a == par_r.state.p.a && serial.c.a == par_r.c.a;
        std::printf("  parity      : fields %s\n", same ? "bit-identical" : "MISMATCH");
        return same ? 0 : 1;
    }
    std::printf("  (run with a second argument > 1 to compare OpenMP row parallelism)\n");
    return 0;
}
