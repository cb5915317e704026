#pragma once

#include <vector>

#include "dognose/flow.hpp"
#include "dognose/geometry.hpp"
#include "dognose/grid.hpp"

namespace dognose {

struct TransportParams {
    double diffusivity = 8e-6;  // m^2/s, solvent vapor in air
    double background = 0.0;    // ug/m^3 added to sensor readings

    void validate() const;
};

struct SensorSpec {
    double region_depth = 0.006;  // m along the axis from the chamber back wall
    double region_width = 0.0;    // m across; 0 = full interior width
    double response_time = 1.0;   // s
    double sample_period = 1.0;   // s

    void validate() const;
};

struct OutgassingSpec {
    bool enabled = false;
    double rate = 0.0;                   // ug/s released at the tube mouth
    double active_below_fraction = 0.1;  // active while inhale motor fraction < this

    void validate() const;
};

// Tracer mass accounting in ug (2D fields use a 1 m out-of-plane depth).
// For per-step entries in_domain holds the change of resident mass during
// the step; summed entries hold the final resident mass.
struct MassLedger {
    double emitted = 0.0;
    double in_domain = 0.0;
    double removed_tube = 0.0;
    double removed_open = 0.0;
    double outgassed = 0.0;
    double residual = 0.0;
};

MassLedger mass_budget(const std::vector<MassLedger>& deltas);

// First-order relaxation of the previous reading toward the current region
// average, reported with the background offset added.
double sample_sensor(double region_average, double background, double response_time, double prev_reading,
                     double dt);

// Advances the concentration field: upwind advection + explicit diffusion in
// flux form (internally substepped for positivity), disc source, tube
// removal, open-boundary escape, optional tube outgassing.
class TransportSolver {
  public:
    TransportSolver(const GridMask& mask, const TransportParams& params);

    Field2d make_field() const { return Field2d(mask_->nx, mask_->ny, 0.0); }

    MassLedger step_scalar(Field2d& c, const FlowState& flow, const std::vector<int>& source_cells,
                           double emission_rate, double source_start, const OutgassingSpec& og,
                           double inhale_fraction, double dt, double t);

    double region_average(const Field2d& c, const std::vector<int>& cells) const;
    double total_mass(const Field2d& c) const;
    double min_concentration(const Field2d& c) const;

    const TransportParams& params() const { return params_; }

  private:
    const GridMask* mask_;
    TransportParams params_;
    std::vector<uint8_t> carrier_;
    Field2d du_, dv_;  // 1 on faces with diffusive exchange (carrier-carrier)
    Field2d fu_, fv_, cn_;
    std::vector<std::pair<int, double>> tube_faces_;  // v- or u-face index with outward sign
    bool tube_faces_are_u_ = false;
    std::vector<int> outgas_cells_;  // fluid cells facing the tube mouth
};

}  // namespace dognose
