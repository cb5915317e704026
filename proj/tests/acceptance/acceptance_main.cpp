// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Report-style criteria (8, 9) print
// their findings and do not gate the exit code. Heavy preset runs are cached
// and shared between criteria; independent runs execute two at a time.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <future>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "dognose/io.hpp"
#include "dognose/metrics.hpp"
#include "dognose/optimizer.hpp"
#include "dognose/par.hpp"
#include "dognose/scenarios.hpp"
#include "dognose/transport.hpp"

using namespace dognose;

namespace {

int failures = 0;

void gate(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s  (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void report(int id, const std::string& name, const std::string& detail) {
    std::printf("[REPORT] criterion %2d: %s  (%s)\n", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
}

std::map<std::string, RunResult> g_runs;
std::mutex g_runs_mutex;

const RunResult& cached_run(const std::string& key, const ScenarioSpec& spec) {
    {
        std::lock_guard<std::mutex> lock(g_runs_mutex);
        auto it = g_runs.find(key);
        if (it != g_runs.end()) return it->second;
    }
    RunResult r = run_scenario(spec);
    std::lock_guard<std::mutex> lock(g_runs_mutex);
    return g_runs.emplace(key, std::move(r)).first->second;
}

const RunResult& cached_preset(const std::string& name) { return cached_run(name, preset(name)); }

double trace_peak(const RunResult& r) {
    double p = 0.0;
    for (const TraceRow& row : r.trace.rows) p = std::max(p, row.reading);
    return p;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// ---------------------------------------------------------------------------
// criterion 4: advected-diffused Gaussian, observed order between h and h/2

GridMask open_box(int n, double h) {
    GridMask m;
    m.nx = m.ny = n;
    m.h = h;
    m.cls.assign(static_cast<size_t>(n) * n, CellClass::Fluid);
    m.sampler.assign(m.cls.size(), 0);
    return m;
}

double gaussian_l2_error(int n) {
    const double width = 0.256;
    const double h = width / n;
    const double D = 8e-6, ux = 0.25, uy = 0.1;
    GridMask m = open_box(n, h);
    TransportParams tp;
    tp.diffusivity = D;
    TransportSolver ts(m, tp);
    FlowState flow;
    flow.u.resize(n + 1, n, ux);
    flow.v.resize(n, n + 1, uy);
    flow.p.resize(n, n);

    // wide enough (sigma ~ 9 cells at h = 2 mm) to sit in the upwind
    // scheme's asymptotic range
    const double x0 = 0.08, y0 = 0.10, t0 = 20.0, mass = 1.0;
    auto kernel = [&](double x, double y, double t) {
        const double xc = x0 + ux * (t - t0), yc = y0 + uy * (t - t0);
        return mass / (4.0 * kPi * D * t) *
               std::exp(-((x - xc) * (x - xc) + (y - yc) * (y - yc)) / (4.0 * D * t));
    };
    Field2d c = ts.make_field();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) c(i, j) = kernel((i + 0.5) * h, (j + 0.5) * h, t0);

    const double T = 0.3;
    const double dt = 0.25 * h / std::max(ux, uy);
    const int steps = static_cast<int>(std::ceil(T / dt));
    const double dts = T / steps;
    OutgassingSpec og;
    for (int k = 0; k < steps; ++k) ts.step_scalar(c, flow, {}, 0.0, 0.0, og, 1.0, dts, t0 + k * dts);

    double num = 0.0, den = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double exact = kernel((i + 0.5) * h, (j + 0.5) * h, t0 + T);
            num += (c(i, j) - exact) * (c(i, j) - exact) * h * h;
            den += exact * exact * h * h;
        }
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// criterion 12: brute-force explicit scalar reference on a 16x16 grid

bool scalar_oracle_match(double* worst_out) {
    const int n = 16;
    const double h = 0.004, D = 8e-6;
    GridMask m = open_box(n, h);
    for (int j = 6; j <= 8; ++j)
        for (int i = 7; i <= 9; ++i) m.cls[static_cast<size_t>(m.idx(i, j))] = CellClass::Solid;
    TransportParams tp;
    tp.diffusivity = D;
    TransportSolver ts(m, tp);
    FlowState flow;
    flow.u.resize(n + 1, n);
    flow.v.resize(n, n + 1);
    flow.p.resize(n, n);
    unsigned state = 123456789u;
    auto rnd = [&]() {
        state = state * 1664525u + 1013904223u;
        return (state / 4294967296.0 - 0.5) * 0.5;  // [-0.25, 0.25)
    };
    for (double& u : flow.u.a) u = rnd();
    for (double& v : flow.v.a) v = rnd();
    auto solid = [&](int i, int j) { return i >= 0 && i < n && j >= 0 && j < n && m.at(i, j) == CellClass::Solid; };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i <= n; ++i)
            if (solid(i - 1, j) || solid(i, j)) flow.u(i, j) = 0.0;
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i < n; ++i)
            if (solid(i, j - 1) || solid(i, j)) flow.v(i, j) = 0.0;

    Field2d c = ts.make_field();
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            c(i, j) = m.is_fluid(i, j) ? 1.0 + std::sin(0.9 * i) * std::cos(0.7 * j) : 0.0;
    Field2d ref = c;

    const double dt = 0.5 * h;  // max |u| <= 0.25, single substep regime
    OutgassingSpec og;
    std::vector<int> src = {m.idx(3, 3)};
    const double rate = 0.2, start = 10 * dt;
    auto carrier = [&](int i, int j) { return i >= 0 && i < n && j >= 0 && j < n && m.is_fluid(i, j); };

    double worst = 0.0;
    for (int step = 0; step < 50; ++step) {
        const double t = step * dt;
        ts.step_scalar(c, flow, src, rate, start, og, 1.0, dt, t);
        Field2d next(n, n, 0.0);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (!carrier(i, j)) continue;
                auto cv = [&](int ii, int jj) { return carrier(ii, jj) ? ref(ii, jj) : 0.0; };
                const double ue = flow.u(i + 1, j), uw = flow.u(i, j);
                const double vn = flow.v(i, j + 1), vs = flow.v(i, j);
                const double fe = (ue > 0 ? ue * cv(i, j) : ue * cv(i + 1, j));
                const double fw = (uw > 0 ? uw * cv(i - 1, j) : uw * cv(i, j));
                const double fn = (vn > 0 ? vn * cv(i, j) : vn * cv(i, j + 1));
                const double fs = (vs > 0 ? vs * cv(i, j - 1) : vs * cv(i, j));
                double dif = 0.0;
                if (carrier(i + 1, j)) dif += D * (ref(i + 1, j) - ref(i, j)) / h;
                if (carrier(i - 1, j)) dif -= D * (ref(i, j) - ref(i - 1, j)) / h;
                if (carrier(i, j + 1)) dif += D * (ref(i, j + 1) - ref(i, j)) / h;
                if (carrier(i, j - 1)) dif -= D * (ref(i, j) - ref(i, j - 1)) / h;
                next(i, j) = std::max(ref(i, j) + dt / h * (fw - fe + fs - fn) + dt / h * dif, 0.0);
            }
        if (t >= start) next(3, 3) += rate * dt / (h * h);
        ref = next;
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(c(i, j) - ref(i, j)));
    }
    *worst_out = worst;
    return worst <= 1e-12;
}

}  // namespace

int main() {
    par::set_threads(1);
    std::printf("acceptance suite, tool version %s\n", kToolVersion);
    std::fflush(stdout);

    // ---- criterion 1 first and alone: it is wall-clock timed --------------
    {
        const RunResult& run = cached_preset("dognose_h5.08cm");
        const double rel =
            std::abs(run.ledger.residual) / std::max(run.ledger.emitted + run.ledger.outgassed, 1e-30);
        const bool mass_ok = rel <= 0.005;
        const bool time_ok = run.stats.wall_seconds <= 120.0;
        gate(1, "conservation and wall-clock on dognose_h5.08cm", mass_ok && time_ok,
             fmt("|residual| = %.3g of emitted (<= 0.5%%); wall = %.0f s (<= 120 s), %ld steps", rel,
                 run.stats.wall_seconds, run.stats.steps));
    }

    // ---- remaining heavy presets, two at a time ----------------------------
    // dognose_duty100 is the same scenario as dognose_h5.08cm (duty 1.0), so
    // the run above provides the calibration reference peak and the scaled
    // verification run can join the parallel batches
    const double ref_peak = trace_peak(cached_preset("dognose_h5.08cm"));
    const double calibrated_rate = ref_peak > 1e-12 ? 325.0 / ref_peak : 0.0;
    {
        auto launch = [](const std::string& name) {
            return std::async(std::launch::async, [name] { cached_preset(name); });
        };
        {
            auto a = launch("inhale_h5.08cm");
            auto b = launch("pulsed_20s");
            a.get();
            b.get();
        }
        {
            auto a = launch("no_source_outgassing");
            std::future<void> b;
            if (calibrated_rate > 0.0)
                b = std::async(std::launch::async, [&] {
                    ScenarioSpec verify = preset("dognose_duty100");
                    verify.source.emission_rate = calibrated_rate;
                    cached_run("duty100_calibrated", verify);
                });
            a.get();
            if (b.valid()) b.get();
        }
        {
            auto a = launch("dognose_duty60");
            auto b = launch("dognose_duty80");
            a.get();
            b.get();
        }
        cached_preset("passive_h5.08cm");
    }

    // ---- criterion 5: calibration anchor -----------------------------------
    {
        bool ok = false;
        std::string detail = "reference run saw no tracer";
        if (calibrated_rate > 0.0) {
            ScenarioSpec verify = preset("dognose_duty100");
            verify.source.emission_rate = calibrated_rate;
            const double peak = trace_peak(cached_run("duty100_calibrated", verify));
            ok = std::abs(peak - 325.0) <= 3.25;
            detail = fmt("calibrated rate %.4g ug/s, verification peak %.2f (target 325 +- 3.25)",
                         calibrated_rate, peak);
        }
        gate(5, "emission calibration to 325 ug/m^3 on dognose_duty100", ok, detail);
    }

    // ---- criterion 6: trend gate T1 -----------------------------------------
    {
        const RunResult& dog = cached_preset("dognose_h5.08cm");
        const RunResult& inh = cached_preset("inhale_h5.08cm");
        const RunResult& pas = cached_preset("passive_h5.08cm");
        const double pd = trace_peak(dog), pi = trace_peak(inh), pp = trace_peak(pas);
        // one common threshold for the duration comparison: 10% of the
        // largest peak among the compared schemes
        const double thr = 0.1 * std::max({pd, pi, pp});
        const double dd = compute_metrics(dog.trace, thr).duration_above;
        const double di = compute_metrics(inh.trace, thr).duration_above;
        const bool ok = (pd > pi) && (pi > pp) && (dd > di);
        gate(6, "trend: peak dognose > inhale > passive, duration dognose > inhale", ok,
             fmt("peaks %.2f / %.2f / %.4f ug/m^3; duration above %.2f: %.0f s vs %.0f s", pd, pi, pp, thr,
                 dd, di));
    }

    // ---- criterion 7: pulsed periodicity -------------------------------------
    {
        const RunResult& run = cached_preset("pulsed_20s");
        auto [count, est] = detect_cycles(run.trace, 20.0);
        const bool ok = count >= 3 && std::abs(est - 20.0) <= 0.2 * 20.0;
        gate(7, "pulsed_20s yields cyclical readings", ok,
             fmt("%d cycles, period estimate %.2f s (20 +- 20%%)", count, est));
    }

    // ---- criterion 8 (gate on outgassing, report on channeling) -------------
    {
        const RunResult& og = cached_preset("no_source_outgassing");
        auto hit = detect_post_off_peak(og.trace, 240.0);
        gate(8, "outgassing with no source peaks after motor-off", hit.has_value(),
             hit ? fmt("secondary peak %.3f ug/m^3 at t = %.0f s", hit->value, hit->time)
                 : std::string("no post-off peak detected"));
        const RunResult& dog = cached_preset("dognose_h5.08cm");
        auto chan = detect_post_off_peak(dog.trace, 240.0);
        report(8, "tube-channeling alone (source on, outgassing off)",
               chan ? fmt("also fires: secondary peak %.2f ug/m^3 at t = %.0f s", chan->value, chan->time)
                    : std::string("does not fire on its own in this configuration"));
    }

    // ---- criterion 9 (report): duty sweep ------------------------------------
    {
        const double p60 = trace_peak(cached_preset("dognose_duty60"));
        const double p80 = trace_peak(cached_preset("dognose_duty80"));
        const double p100 = trace_peak(cached_preset("dognose_h5.08cm"));
        std::vector<std::pair<std::string, double>> peaks = {{"60", p60}, {"80", p80}, {"100", p100}};
        std::stable_sort(peaks.begin(), peaks.end(),
                         [](const auto& a, const auto& b) { return a.second > b.second; });
        const bool bimodal = (p80 < p60 && p80 < p100);
        report(9, "duty sweep 60/80/100 ordering",
               fmt("peaks: 60%% = %.2f, 80%% = %.2f, 100%% = %.2f; order %s > %s > %s; ratios %.3f, %.3f; "
                   "80%% below both neighbors: %s",
                   p60, p80, p100, peaks[0].first.c_str(), peaks[1].first.c_str(), peaks[2].first.c_str(),
                   peaks[0].second / std::max(peaks[1].second, 1e-30),
                   peaks[1].second / std::max(peaks[2].second, 1e-30), bimodal ? "yes" : "no"));
    }

    // ---- criteria 2 and 3 over every preset run performed --------------------
    {
        double worst_div = 0.0, worst_min = 0.0;
        size_t nruns = 0;
        {
            std::lock_guard<std::mutex> lock(g_runs_mutex);
            for (const auto& [name, run] : g_runs) {
                worst_div = std::max(worst_div, run.stats.max_divergence);
                worst_min = std::min(worst_min, run.stats.min_concentration);
                ++nruns;
            }
        }
        gate(2, "post-projection divergence <= 1e-6 1/s on every step", worst_div <= 1e-6,
             fmt("worst across %zu preset runs: %.3e 1/s", nruns, worst_div));
        gate(3, "concentration never goes negative", worst_min >= 0.0,
             fmt("worst minimum across %zu preset runs: %.3e ug/m^3", nruns, worst_min));
    }

    // ---- criterion 10: bit-identical determinism -----------------------------
    {
        const RunResult& first = cached_preset("passive_h5.08cm");
        const RunResult second = run_scenario(preset("passive_h5.08cm"));
        const std::string csv1 = trace_to_csv(first.trace);
        const std::string csv2 = trace_to_csv(second.trace);
        gate(10, "rerunning a preset reproduces trace.csv byte for byte", csv1 == csv2,
             fmt("fnv1a64 %016llx vs %016llx", static_cast<unsigned long long>(fnv1a64(csv1)),
                 static_cast<unsigned long long>(fnv1a64(csv2))));
    }

    // ---- criterion 4: grid convergence ---------------------------------------
    {
        const double e1 = gaussian_l2_error(128);  // h = 2 mm
        const double e2 = gaussian_l2_error(256);  // h = 1 mm
        const double order = std::log2(e1 / e2);
        gate(4, "advected-diffused Gaussian converges with order >= 0.8", order >= 0.8,
             fmt("L2 errors %.4f (h) and %.4f (h/2), observed order %.2f", e1, e2, order));
    }

    // ---- criterion 11: optimizer on analytic objectives -----------------------
    {
        std::vector<ParamDef> p1 = {{"inhale_duty", 0.0, 1.0, 0.0}};
        OptResult r1 = nelder_mead_fn(
            p1, [](const std::vector<double>& x) { return -(x[0] - 0.3) * (x[0] - 0.3); }, true, 200, 1);
        std::vector<ParamDef> p2 = {{"inhale_duty", 0.0, 1.0, 0.0}, {"exhale_angle", 0.0, 1.0, 0.0}};
        OptResult r2 = nelder_mead_fn(
            p2,
            [](const std::vector<double>& x) {
                return -((x[0] - 0.5) * (x[0] - 0.5) + (x[1] - 0.25) * (x[1] - 0.25));
            },
            true, 200, 3);
        const bool ok = std::abs(r1.best_values[0] - 0.3) <= 1e-3 && r1.evaluations <= 200 &&
                        std::abs(r2.best_values[0] - 0.5) <= 1e-3 &&
                        std::abs(r2.best_values[1] - 0.25) <= 1e-3 && r2.evaluations <= 200;
        gate(11, "Nelder-Mead reaches analytic optima within 1e-3", ok,
             fmt("1D: x = %.5f in %d evals; 2D: (%.5f, %.5f) in %d evals", r1.best_values[0],
                 r1.evaluations, r2.best_values[0], r2.best_values[1], r2.evaluations));
    }

    // ---- criterion 12: scalar step vs brute-force reference -------------------
    {
        double worst = 0.0;
        const bool ok = scalar_oracle_match(&worst);
        gate(12, "step_scalar matches the 16x16 brute-force reference", ok,
             fmt("max cell difference over 50 steps: %.3e (<= 1e-12)", worst));
    }

    std::printf("%s: %d criterion gate(s) failed\n",
                failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", failures);
    return failures == 0 ? 0 : 1;
}
