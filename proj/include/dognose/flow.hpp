#pragma once

#include <memory>
#include <vector>

#include "dognose/geometry.hpp"
#include "dognose/grid.hpp"
#include "dognose/poisson.hpp"

namespace dognose {

struct FlowParams {
    double kinematic_viscosity = 1.5e-5;  // air, m^2/s
    double dt = 1e-3;                     // step size used by step_flow
    double dt_max = 0.02;                 // cap for cfl_dt
    double cfl_target = 0.9;
    double div_tol = 1e-6;     // 1/s, post-projection divergence bound
    int max_projection_iters = 10000;

    void validate() const;
};

// MAC-staggered velocity + cell pressure. u is (nx+1) x ny, v is nx x (ny+1),
// p is nx x ny and doubles as the projection warm start.
struct FlowState {
    Field2d u, v, p;
};

struct FlowStepStats {
    PoissonStats projection;
    double max_divergence = 0.0;  // recomputed from faces after the step
};

// Advances the incompressible field on a fixed scene: semi-Lagrangian
// advection, explicit viscosity (substepped if dt exceeds the explicit
// limit), jet/no-slip boundary re-application, multigrid pressure projection.
class FlowSolver {
  public:
    FlowSolver(const GridMask& mask, const FlowParams& params);

    FlowState make_state() const;

    // Imposes jet faces: inhale ports pull at inhale_speed, exhale ports blow
    // at exhale_speed along their jet direction, the tube outlet balances the
    // total inhale influx.
    void apply_jet_bcs(FlowState& s, double inhale_speed, double exhale_speed);

    FlowStepStats step_flow(FlowState& s);  // uses params().dt
    void project(FlowState& s, FlowStepStats* stats = nullptr);

    double cfl_dt(const FlowState& s) const;
    double max_speed(const FlowState& s) const;
    double max_divergence(const FlowState& s) const;
    double kinetic_energy(const FlowState& s) const;

    FlowParams& params() { return params_; }
    const FlowParams& params() const { return params_; }
    const GridMask& mask() const { return *mask_; }

  private:
    void advect(FlowState& s, double dt);
    void diffuse(FlowState& s, double dt);
    void enforce_bcs(FlowState& s) const;
    void compute_divergence(const FlowState& s, Field2d& out) const;

    const GridMask* mask_;
    FlowParams params_;
    PressureSolver psolver_;

    std::vector<int> solid_u_, solid_v_;   // face indices pinned to zero
    Field2d gu_, gv_;                      // 1 on faces the projection updates
    Field2d rhs_, un_, vn_;
    Field2d phi_prev_;                     // for the extrapolated warm start
    bool have_prev_ = false;
    double inhale_speed_ = 0.0, exhale_speed_ = 0.0;
};

}  // namespace dognose
