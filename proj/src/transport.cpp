#include "dognose/transport.hpp"

#include <algorithm>
#include <cmath>

#include "dognose/par.hpp"

namespace dognose {

void TransportParams::validate() const {
    if (diffusivity <= 0) throw_sim_error(ErrorCode::BadConfig, "diffusivity must be positive");
    if (background < 0) throw_sim_error(ErrorCode::BadConfig, "background must be >= 0");
}

void SensorSpec::validate() const {
    if (response_time <= 0 || sample_period <= 0)
        throw_sim_error(ErrorCode::BadConfig, "sensor times must be positive");
    if (region_depth <= 0 || region_width < 0)
        throw_sim_error(ErrorCode::BadConfig, "sensor region must have positive depth");
}

void OutgassingSpec::validate() const {
    if (rate < 0) throw_sim_error(ErrorCode::BadConfig, "outgassing rate must be >= 0");
}

MassLedger mass_budget(const std::vector<MassLedger>& deltas) {
    MassLedger total;
    for (const MassLedger& d : deltas) {
        total.emitted += d.emitted;
        total.in_domain += d.in_domain;
        total.removed_tube += d.removed_tube;
        total.removed_open += d.removed_open;
        total.outgassed += d.outgassed;
    }
    total.residual =
        total.emitted + total.outgassed - total.in_domain - total.removed_tube - total.removed_open;
    return total;
}

double sample_sensor(double region_average, double background, double response_time, double prev_reading,
                     double dt) {
    if (dt <= 0) throw_sim_error(ErrorCode::BadConfig, "sensor dt must be positive");
    const double decay = std::exp(-dt / response_time);
    const double state = region_average + ((prev_reading - background) - region_average) * decay;
    return background + state;
}

TransportSolver::TransportSolver(const GridMask& mask, const TransportParams& params)
    : mask_(&mask), params_(params) {
    params_.validate();
    const int nx = mask.nx, ny = mask.ny;
    carrier_.assign(static_cast<size_t>(nx) * ny, 0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const CellClass c = mask.at(i, j);
            carrier_[static_cast<size_t>(mask.idx(i, j))] =
                (c == CellClass::Fluid || c == CellClass::InhalePort) ? 1 : 0;
        }
    du_.resize(nx + 1, ny);
    dv_.resize(nx, ny + 1);
    auto carr = [&](int i, int j) {
        return i >= 0 && i < nx && j >= 0 && j < ny && carrier_[static_cast<size_t>(j) * nx + i];
    };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i <= nx; ++i) du_(i, j) = (carr(i - 1, j) && carr(i, j)) ? 1.0 : 0.0;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i < nx; ++i) dv_(i, j) = (carr(i, j - 1) && carr(i, j)) ? 1.0 : 0.0;
    fu_.resize(nx + 1, ny);
    fv_.resize(nx, ny + 1);
    cn_.resize(nx, ny);

    // tube mouth faces and the chamber cells that receive outgassing
    for (const PrescribedFace& f : mask.faces) {
        if (f.role != FaceRole::TubeOut) continue;
        if (f.comp == FaceComp::V) {
            tube_faces_are_u_ = false;
            tube_faces_.emplace_back(dv_.idx(f.i, f.j), f.scale);
            const int jc = (f.scale > 0) ? f.j - 1 : f.j;  // fluid side of the face
            if (jc >= 0 && jc < ny && carr(f.i, jc)) outgas_cells_.push_back(mask.idx(f.i, jc));
        } else {
            tube_faces_are_u_ = true;
            tube_faces_.emplace_back(du_.idx(f.i, f.j), f.scale);
            const int ic = (f.scale > 0) ? f.i - 1 : f.i;
            if (ic >= 0 && ic < nx && carr(ic, f.j)) outgas_cells_.push_back(mask.idx(ic, f.j));
        }
    }
}

double TransportSolver::region_average(const Field2d& c, const std::vector<int>& cells) const {
    if (cells.empty()) return 0.0;
    double s = 0.0;
    for (int id : cells) s += c.a[static_cast<size_t>(id)];
    return s / static_cast<double>(cells.size());
}

double TransportSolver::total_mass(const Field2d& c) const {
    const double h2 = mask_->h * mask_->h;
    const int nx = mask_->nx;
    const double* C = c.a.data();
    const uint8_t* K = carrier_.data();
    return h2 * par::sum_over_rows(c.ny, [&](int j) {
               const double* crow = C + static_cast<size_t>(j) * nx;
               const uint8_t* krow = K + static_cast<size_t>(j) * nx;
               double s = 0.0;
               for (int i = 0; i < nx; ++i) s += krow[i] ? crow[i] : 0.0;
               return s;
           });
}

double TransportSolver::min_concentration(const Field2d& c) const {
    const int nx = mask_->nx;
    const double* C = c.a.data();
    const uint8_t* K = carrier_.data();
    return -par::max_over_rows(c.ny, [&](int j) {
        const double* crow = C + static_cast<size_t>(j) * nx;
        const uint8_t* krow = K + static_cast<size_t>(j) * nx;
        double m = -1e300;
        for (int i = 0; i < nx; ++i)
            if (krow[i]) m = std::max(m, -crow[i]);
        return m;
    });
}

MassLedger TransportSolver::step_scalar(Field2d& c, const FlowState& flow,
                                        const std::vector<int>& source_cells, double emission_rate,
                                        double source_start, const OutgassingSpec& og,
                                        double inhale_fraction, double dt, double t) {
    const int nx = mask_->nx, ny = mask_->ny;
    const double h = mask_->h, h2 = h * h, inv_h = 1.0 / h;
    const double D = params_.diffusivity;
    if (dt <= 0 || !std::isfinite(dt)) throw_sim_error(ErrorCode::StabilityViolation, "invalid dt");

    // stated stability preconditions on the caller's dt
    const double vmax = std::max({1e-300, std::abs(*std::max_element(flow.u.a.begin(), flow.u.a.end(),
                                                                     [](double a, double b) {
                                                                         return std::abs(a) < std::abs(b);
                                                                     })),
                                  std::abs(*std::max_element(flow.v.a.begin(), flow.v.a.end(),
                                                             [](double a, double b) {
                                                                 return std::abs(a) < std::abs(b);
                                                             }))});
    if (vmax * dt * inv_h > 1.0 + 1e-9)
        throw_sim_error(ErrorCode::StabilityViolation, "advective CFL exceeds 1");
    if (D * dt / h2 > 0.25 + 1e-9)
        throw_sim_error(ErrorCode::StabilityViolation, "diffusive stability D*dt/h^2 exceeds 0.25");

    // positivity needs the per-cell outflux sum below 1 per substep
    const double* U = flow.u.a.data();
    const double* V = flow.v.a.data();
    const uint8_t* K = carrier_.data();
    const double out_max = par::max_over_rows(ny, [&](int j) {
        const double* urow = U + static_cast<size_t>(j) * (nx + 1);
        const double* vrow0 = V + static_cast<size_t>(j) * nx;
        const double* vrow1 = vrow0 + nx;
        const uint8_t* krow = K + static_cast<size_t>(j) * nx;
        double m = 0.0;
        for (int i = 0; i < nx; ++i) {
            if (!krow[i]) continue;
            const double s = std::max(urow[i + 1], 0.0) - std::min(urow[i], 0.0) + std::max(vrow1[i], 0.0) -
                             std::min(vrow0[i], 0.0);
            m = std::max(m, s);
        }
        return m;
    });
    const double lambda = dt * (out_max * inv_h + 4.0 * D / h2);
    const int nsub = std::max(1, static_cast<int>(std::ceil(lambda / 0.95)));
    const double dts = dt / nsub;

    MassLedger delta;
    const double mass_before = total_mass(c);

    const bool outgas_now = og.enabled && og.rate > 0 && !outgas_cells_.empty() &&
                            inhale_fraction < og.active_below_fraction;

    for (int sub = 0; sub < nsub; ++sub) {
        const double t_sub = t + sub * dts;
        double* FU = fu_.a.data();
        double* FV = fv_.a.data();
        const double* C = c.a.data();
        // face fluxes: upwind advection + gated diffusion; outside the domain
        // the ambient concentration is zero
        par::for_rows(ny, [&](int j) {
            const double* crow = C + static_cast<size_t>(j) * nx;
            const double* urow = U + static_cast<size_t>(j) * (nx + 1);
            const double* gd = du_.a.data() + static_cast<size_t>(j) * (nx + 1);
            double* f = FU + static_cast<size_t>(j) * (nx + 1);
            f[0] = std::min(urow[0], 0.0) * crow[0];
            for (int i = 1; i < nx; ++i)
                f[i] = std::max(urow[i], 0.0) * crow[i - 1] + std::min(urow[i], 0.0) * crow[i] -
                       gd[i] * D * (crow[i] - crow[i - 1]) * inv_h;
            f[nx] = std::max(urow[nx], 0.0) * crow[nx - 1];
        });
        par::for_rows(ny + 1, [&](int j) {
            const double* crow0 = (j > 0) ? C + static_cast<size_t>(j - 1) * nx : nullptr;
            const double* crow1 = (j < ny) ? C + static_cast<size_t>(j) * nx : nullptr;
            const double* vrow = V + static_cast<size_t>(j) * nx;
            const double* gd = dv_.a.data() + static_cast<size_t>(j) * nx;
            double* f = FV + static_cast<size_t>(j) * nx;
            for (int i = 0; i < nx; ++i) {
                const double cl = crow0 ? crow0[i] : 0.0;
                const double cr = crow1 ? crow1[i] : 0.0;
                f[i] = std::max(vrow[i], 0.0) * cl + std::min(vrow[i], 0.0) * cr -
                       gd[i] * D * (cr - cl) * inv_h;
            }
        });

        // removal tallies before the update touches c
        double tube_out = 0.0;
        const double* TF = tube_faces_are_u_ ? FU : FV;
        for (const auto& [fid, sgn] : tube_faces_) tube_out += sgn * TF[static_cast<size_t>(fid)];
        delta.removed_tube += tube_out * h * dts;

        double open_out = 0.0;
        for (int j = 0; j < ny; ++j) open_out += -FU[static_cast<size_t>(j) * (nx + 1)];
        for (int j = 0; j < ny; ++j) open_out += FU[static_cast<size_t>(j) * (nx + 1) + nx];
        for (int i = 0; i < nx; ++i) open_out += -FV[i];
        for (int i = 0; i < nx; ++i) open_out += FV[static_cast<size_t>(ny) * nx + i];
        delta.removed_open += open_out * h * dts;

        double* CN = cn_.a.data();
        par::for_rows(ny, [&](int j) {
            const double* crow = C + static_cast<size_t>(j) * nx;
            const uint8_t* krow = K + static_cast<size_t>(j) * nx;
            const double* fu = FU + static_cast<size_t>(j) * (nx + 1);
            const double* fv0 = FV + static_cast<size_t>(j) * nx;
            const double* fv1 = fv0 + nx;
            double* out = CN + static_cast<size_t>(j) * nx;
            for (int i = 0; i < nx; ++i) {
                const double upd = crow[i] + dts * inv_h * (fu[i] - fu[i + 1] + fv0[i] - fv1[i]);
                out[i] = krow[i] ? std::max(upd, 0.0) : 0.0;
            }
        });
        std::swap(c.a, cn_.a);

        if (emission_rate > 0 && t_sub >= source_start && !source_cells.empty()) {
            const double add = emission_rate * dts / (static_cast<double>(source_cells.size()) * h2);
            for (int id : source_cells) c.a[static_cast<size_t>(id)] += add;
            delta.emitted += emission_rate * dts;
        }
        if (outgas_now) {
            const double add = og.rate * dts / (static_cast<double>(outgas_cells_.size()) * h2);
            for (int id : outgas_cells_) c.a[static_cast<size_t>(id)] += add;
            delta.outgassed += og.rate * dts;
        }
    }

    delta.in_domain = total_mass(c) - mass_before;
    delta.residual =
        delta.emitted + delta.outgassed - delta.in_domain - delta.removed_tube - delta.removed_open;
    return delta;
}

}  // namespace dognose
