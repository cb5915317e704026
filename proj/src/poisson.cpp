#include "dognose/poisson.hpp"

#include <algorithm>
#include <cmath>

#include "dognose/par.hpp"

namespace dognose {

PressureSolver::PressureSolver(const GridMask& mask) {
    const int nx = mask.nx, ny = mask.ny;
    f_.nx = nx;
    f_.ny = ny;
    f_.W = (nx + 1) / 2;
    f_.Wp = f_.W + 2;
    f_.h2 = mask.h * mask.h;

    // cell-centric fine weights in plain layout first
    Field2d wE(nx, ny), wW(nx, ny), wN(nx, ny), wS(nx, ny), wOpen(nx, ny);
    auto fluid = [&](int i, int j) { return mask.inside(i, j) && mask.is_fluid(i, j); };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (!mask.is_fluid(i, j)) continue;
            wE(i, j) = fluid(i + 1, j) ? 1.0 : 0.0;
            wW(i, j) = fluid(i - 1, j) ? 1.0 : 0.0;
            wN(i, j) = fluid(i, j + 1) ? 1.0 : 0.0;
            wS(i, j) = fluid(i, j - 1) ? 1.0 : 0.0;
            // ambient pressure pinned at the open boundary face (mirror
            // ghost, weight 2); the same rule rediscretizes self-similarly
            // on coarse levels. Solid domain sides carry a solid cell ring,
            // so fluid only touches the edge where the side is open.
            double open = 0.0;
            if (i == 0) open += 2.0;
            if (i == nx - 1) open += 2.0;
            if (j == 0) open += 2.0;
            if (j == ny - 1) open += 2.0;
            wOpen(i, j) = open;
            if (wE(i, j) + wW(i, j) + wN(i, j) + wS(i, j) + open == 0.0)
                throw_sim_error(ErrorCode::BadConfig, "fluid cell with no projectable face");
        }

    // pack fine level per color
    const size_t plane = static_cast<size_t>(ny + 2) * f_.Wp;
    for (int c = 0; c < 2; ++c) {
        for (auto* v : {&f_.wE[c], &f_.wW[c], &f_.wN[c], &f_.wS[c], &f_.diag[c], &f_.dinv[c], &f_.x[c],
                        &f_.r[c], &f_.z[c], &f_.p[c], &f_.q[c]})
            v->assign(plane, 0.0);
        for (auto* v : {&f_.fwE[c], &f_.fwW[c], &f_.fwN[c], &f_.fwS[c], &f_.fdinv[c], &f_.fdiag[c],
                        &f_.fphi[c], &f_.fg[c]})
            v->assign(plane, 0.0f);
    }
    f_.r_red.assign(static_cast<size_t>(ny) * f_.W, 0.0f);
    for (int j = 0; j < ny; ++j) {
        const int p = j & 1;
        for (int c = 0; c < 2; ++c) {
            for (int k = 0; k < f_.W; ++k) {
                const int i = 2 * k + (c == 0 ? p : 1 - p);
                if (i >= nx || !mask.is_fluid(i, j)) continue;
                const size_t s = f_.at(j, k);
                f_.wE[c][s] = wE(i, j);
                f_.wW[c][s] = wW(i, j);
                f_.wN[c][s] = wN(i, j);
                f_.wS[c][s] = wS(i, j);
                const double d = wE(i, j) + wW(i, j) + wN(i, j) + wS(i, j) + wOpen(i, j);
                f_.diag[c][s] = d;
                f_.dinv[c][s] = 1.0 / d;
                f_.fwE[c][s] = static_cast<float>(wE(i, j));
                f_.fwW[c][s] = static_cast<float>(wW(i, j));
                f_.fwN[c][s] = static_cast<float>(wN(i, j));
                f_.fwS[c][s] = static_cast<float>(wS(i, j));
                f_.fdiag[c][s] = static_cast<float>(d);
                f_.fdinv[c][s] = 1.0f / static_cast<float>(d);
            }
        }
    }

    // coarse hierarchy: inclusive coarsening keeps one-cell fluid layers
    // along walls represented on every level; walls still separate regions
    // because coarse links only arise from fine fluid-fluid faces
    Field2d cwE = wE, cwW = wW, cwN = wN, cwS = wS, cwO = wOpen;
    Field2d cfl(nx, ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) cfl(i, j) = mask.is_fluid(i, j) ? 1.0 : 0.0;
    int lnx = nx, lny = ny;
    while (std::min(lnx, lny) > 8 && static_cast<int>(coarse_.size()) < 12) {
        const int cnx = (lnx + 1) / 2, cny = (lny + 1) / 2;
        Field2d nwE(cnx, cny), nwW(cnx, cny), nwN(cnx, cny), nwS(cnx, cny), nwO(cnx, cny), nfl(cnx, cny);
        auto get = [&](const Field2d& a, int i, int j) { return (i < lnx && j < lny) ? a(i, j) : 0.0; };
        for (int J = 0; J < cny; ++J)
            for (int I = 0; I < cnx; ++I)
                nfl(I, J) = (get(cfl, 2 * I, 2 * J) > 0 || get(cfl, 2 * I + 1, 2 * J) > 0 ||
                             get(cfl, 2 * I, 2 * J + 1) > 0 || get(cfl, 2 * I + 1, 2 * J + 1) > 0)
                                ? 1.0
                                : 0.0;
        auto alive = [&](int I, int J) { return I >= 0 && I < cnx && J >= 0 && J < cny && nfl(I, J) > 0; };
        for (int J = 0; J < cny; ++J)
            for (int I = 0; I < cnx; ++I) {
                if (!alive(I, J)) continue;
                if (alive(I + 1, J))
                    nwE(I, J) = 0.5 * (get(cwE, 2 * I + 1, 2 * J) + get(cwE, 2 * I + 1, 2 * J + 1));
                if (alive(I - 1, J))
                    nwW(I, J) = 0.5 * (get(cwW, 2 * I, 2 * J) + get(cwW, 2 * I, 2 * J + 1));
                if (alive(I, J + 1))
                    nwN(I, J) = 0.5 * (get(cwN, 2 * I, 2 * J + 1) + get(cwN, 2 * I + 1, 2 * J + 1));
                if (alive(I, J - 1))
                    nwS(I, J) = 0.5 * (get(cwS, 2 * I, 2 * J) + get(cwS, 2 * I + 1, 2 * J));
                nwO(I, J) = 0.5 * (get(cwO, 2 * I, 2 * J) + get(cwO, 2 * I + 1, 2 * J) +
                                   get(cwO, 2 * I, 2 * J + 1) + get(cwO, 2 * I + 1, 2 * J + 1));
            }
        Coarse L;
        L.nx = cnx;
        L.ny = cny;
        const size_t n = static_cast<size_t>(cnx) * cny;
        L.phi.assign(n, 0.0f);
        L.g.assign(n, 0.0f);
        L.r.assign(n, 0.0f);
        L.wE.assign(n, 0.0f);
        L.wW.assign(n, 0.0f);
        L.wN.assign(n, 0.0f);
        L.wS.assign(n, 0.0f);
        L.diag.assign(n, 0.0f);
        L.dinv.assign(n, 0.0f);
        for (size_t s = 0; s < n; ++s) {
            L.wE[s] = static_cast<float>(nwE.a[s]);
            L.wW[s] = static_cast<float>(nwW.a[s]);
            L.wN[s] = static_cast<float>(nwN.a[s]);
            L.wS[s] = static_cast<float>(nwS.a[s]);
            const double d = nwE.a[s] + nwW.a[s] + nwN.a[s] + nwS.a[s] + nwO.a[s];
            L.diag[s] = static_cast<float>(d);
            L.dinv[s] = (nfl.a[s] > 0 && d > 0) ? 1.0f / static_cast<float>(d) : 0.0f;
        }
        coarse_.push_back(std::move(L));
        cwE = nwE;
        cwW = nwW;
        cwN = nwN;
        cwS = nwS;
        cwO = nwO;
        cfl = nfl;
        lnx = cnx;
        lny = cny;
    }

    // pure-Neumann fluid components (no open-boundary face reachable)
    {
        std::vector<int> comp(static_cast<size_t>(nx) * ny, -1);
        int ncomp = 0;
        std::vector<int> stack;
        for (int j0 = 0; j0 < ny; ++j0)
            for (int i0 = 0; i0 < nx; ++i0) {
                if (!mask.is_fluid(i0, j0) || comp[static_cast<size_t>(mask.idx(i0, j0))] >= 0) continue;
                const int id = ncomp++;
                bool dirichlet = false;
                std::vector<int> cells;
                stack.push_back(mask.idx(i0, j0));
                comp[static_cast<size_t>(mask.idx(i0, j0))] = id;
                while (!stack.empty()) {
                    const int cell = stack.back();
                    stack.pop_back();
                    cells.push_back(cell);
                    const int i = cell % nx, j = cell / nx;
                    if (wOpen(i, j) > 0) dirichlet = true;
                    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                    for (int q = 0; q < 4; ++q) {
                        const int ii = i + di[q], jj = j + dj[q];
                        if (!fluid(ii, jj)) continue;
                        const int nid = mask.idx(ii, jj);
                        if (comp[static_cast<size_t>(nid)] < 0) {
                            comp[static_cast<size_t>(nid)] = id;
                            stack.push_back(nid);
                        }
                    }
                }
                if (!dirichlet) {
                    std::vector<std::pair<int, size_t>> packed;
                    packed.reserve(cells.size());
                    for (int cell : cells) {
                        const int i = cell % nx, j = cell / nx;
                        const int p = j & 1;
                        const int c = ((i + j) & 1);  // 0 = red
                        const int k = (i - (c == 0 ? p : 1 - p)) / 2;
                        packed.emplace_back(c, f_.at(j, k));
                    }
                    neumann_comps_.push_back(std::move(packed));
                }
            }
    }
}

void PressureSolver::smooth_fine(int sweeps, bool reverse) {
    const int ny = f_.ny, W = f_.W, Wp = f_.Wp;
    for (int s = 0; s < sweeps; ++s) {
        for (int pass = 0; pass < 2; ++pass) {
            const int c = reverse ? 1 - pass : pass;
            float* __restrict__ P = f_.fphi[c].data();
            const float* __restrict__ Q = f_.fphi[1 - c].data();
            const float* __restrict__ G = f_.fg[c].data();
            const float* __restrict__ WE = f_.fwE[c].data();
            const float* __restrict__ WW = f_.fwW[c].data();
            const float* __restrict__ WN = f_.fwN[c].data();
            const float* __restrict__ WS = f_.fwS[c].data();
            const float* __restrict__ DI = f_.fdinv[c].data();
            par::for_rows(ny, [&](int j) {
                const int p = j & 1;
                const int oe = (c == 0) ? p : 1 - p;  // east neighbor offset
                const int ow = oe - 1;
                const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
                const float* qrow = Q + row;
                const float* qn = qrow + Wp;
                const float* qs = qrow - Wp;
                float* prow = P + row;
                for (int k = 0; k < W; ++k) {
                    const float sum = WE[row + k] * qrow[k + oe] + WW[row + k] * qrow[k + ow] +
                                      WN[row + k] * qn[k] + WS[row + k] * qs[k];
                    prow[k] = (sum - G[row + k]) * DI[row + k];
                }
            });
        }
    }
}

void PressureSolver::fine_residual_red() {
    const int ny = f_.ny, W = f_.W, Wp = f_.Wp;
    const float* __restrict__ P = f_.fphi[0].data();
    const float* __restrict__ Q = f_.fphi[1].data();
    const float* __restrict__ G = f_.fg[0].data();
    const float* __restrict__ WE = f_.fwE[0].data();
    const float* __restrict__ WW = f_.fwW[0].data();
    const float* __restrict__ WN = f_.fwN[0].data();
    const float* __restrict__ WS = f_.fwS[0].data();
    const float* __restrict__ D = f_.fdiag[0].data();
    float* __restrict__ R = f_.r_red.data();
    par::for_rows(ny, [&](int j) {
        const int p = j & 1;
        const int oe = p, ow = p - 1;
        const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
        const float* qrow = Q + row;
        float* rrow = R + static_cast<size_t>(j) * W;
        for (int k = 0; k < W; ++k) {
            const float sum = WE[row + k] * qrow[k + oe] + WW[row + k] * qrow[k + ow] +
                              WN[row + k] * qrow[k + Wp] + WS[row + k] * qrow[k - Wp];
            rrow[k] = G[row + k] - (sum - D[row + k] * P[row + k]);
        }
    });
}

// out = (-lap) * in, double precision, the positive-definite form CG needs
void PressureSolver::apply_operator(const Planes& in, Planes& out) const {
    const int ny = f_.ny, W = f_.W, Wp = f_.Wp;
    for (int c = 0; c < 2; ++c) {
        const double* __restrict__ P = in[c].data();
        const double* __restrict__ Q = in[1 - c].data();
        const double* __restrict__ WE = f_.wE[c].data();
        const double* __restrict__ WW = f_.wW[c].data();
        const double* __restrict__ WN = f_.wN[c].data();
        const double* __restrict__ WS = f_.wS[c].data();
        const double* __restrict__ D = f_.diag[c].data();
        double* __restrict__ O = out[c].data();
        par::for_rows(ny, [&](int j) {
            const int p = j & 1;
            const int oe = (c == 0) ? p : 1 - p;
            const int ow = oe - 1;
            const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
            const double* qrow = Q + row;
            for (int k = 0; k < W; ++k) {
                const double sum = WE[row + k] * qrow[k + oe] + WW[row + k] * qrow[k + ow] +
                                   WN[row + k] * qrow[k + Wp] + WS[row + k] * qrow[k - Wp];
                O[row + k] = D[row + k] * P[row + k] - sum;
            }
        });
    }
}

double PressureSolver::plane_dot(const Planes& a, const Planes& b) const {
    const int ny = f_.ny, W = f_.W, Wp = f_.Wp;
    double total = 0.0;
    for (int c = 0; c < 2; ++c) {
        const double* A = a[c].data();
        const double* B = b[c].data();
        total += par::sum_over_rows(ny, [&](int j) {
            const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
            double s = 0.0;
            for (int k = 0; k < W; ++k) s += A[row + k] * B[row + k];
            return s;
        });
    }
    return total;
}

double PressureSolver::plane_inf(const Planes& a) const {
    const int ny = f_.ny, W = f_.W, Wp = f_.Wp;
    double worst = 0.0;
    for (int c = 0; c < 2; ++c) {
        const double* A = a[c].data();
        worst = std::max(worst, par::max_over_rows(ny, [&](int j) {
                    const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
                    double m = 0.0;
                    for (int k = 0; k < W; ++k) m = std::max(m, std::abs(A[row + k]));
                    return m;
                }));
    }
    return worst;
}

void PressureSolver::remove_neumann_means(Planes& a) const {
    for (const auto& comp : neumann_comps_) {
        double mean = 0.0;
        for (const auto& [c, s] : comp) mean += a[c][s];
        mean /= static_cast<double>(comp.size());
        for (const auto& [c, s] : comp) a[c][s] -= mean;
    }
}

void PressureSolver::restrict_to_first_coarse() {
    Coarse& L = coarse_.front();
    const int W = f_.W, ny = f_.ny;
    const float* R = f_.r_red.data();
    par::for_rows(L.ny, [&](int J) {
        float* grow = L.g.data() + static_cast<size_t>(J) * L.nx;
        const int j0 = 2 * J, j1 = 2 * J + 1;
        const float* r0 = R + static_cast<size_t>(j0) * W;
        const float* r1 = (j1 < ny) ? R + static_cast<size_t>(j1) * W : nullptr;
        for (int I = 0; I < L.nx; ++I) grow[I] = (I < W ? r0[I] : 0.0f) + (r1 && I < W ? r1[I] : 0.0f);
    });
}

// Bilinear cell-centered prolongation, (9,3,3,1)/16. Parents outside the
// grid count with value zero (the open-boundary correction decays to the
// ambient); dead in-grid parents are dropped and the weights renormalize
// (constant extension across Neumann walls).
void PressureSolver::prolong_from_first_coarse() {
    const Coarse& L = coarse_.front();
    const int ny = f_.ny, W = f_.W, Wp = f_.Wp;
    const int cnx = L.nx, cny = L.ny;
    for (int c = 0; c < 2; ++c) {
        float* __restrict__ P = f_.fphi[c].data();
        const float* __restrict__ DI = f_.fdinv[c].data();
        par::for_rows(ny, [&](int j) {
            const int p = j & 1;
            const int parity = (c == 0) ? p : 1 - p;  // i-parity of this color in row j
            const int J = j >> 1;
            const int J2 = J + (p ? 1 : -1);
            const bool j2_in = J2 >= 0 && J2 < cny;
            const float* c0 = L.phi.data() + static_cast<size_t>(J) * cnx;
            const float* c1 = j2_in ? L.phi.data() + static_cast<size_t>(J2) * cnx : nullptr;
            const float* l0 = L.dinv.data() + static_cast<size_t>(J) * cnx;
            const float* l1 = j2_in ? L.dinv.data() + static_cast<size_t>(J2) * cnx : nullptr;
            float* prow = P + static_cast<size_t>(j + 1) * Wp + 1;
            const float* di = DI + static_cast<size_t>(j + 1) * Wp + 1;
            const int shift = parity ? 1 : -1;
            for (int k = 0; k < W; ++k) {
                if (!(di[k] > 0.0f)) continue;
                const int I = k;
                const int I2 = I + shift;
                const bool i2_in = I2 >= 0 && I2 < cnx;
                // out-of-grid parents keep their weight with value 0
                const float w0 = (l0[I] > 0.0f) ? 9.0f : 0.0f;
                const float w1 = (!i2_in || l0[I2] > 0.0f) ? 3.0f : 0.0f;
                const float w2 = (!j2_in || l1[I] > 0.0f) ? 3.0f : 0.0f;
                const float w3 = (!i2_in || !j2_in || l1[I2] > 0.0f) ? 1.0f : 0.0f;
                const float v0 = w0 * c0[I];
                const float v1 = (i2_in ? c0[I2] : 0.0f) * w1;
                const float v2 = (j2_in ? c1[I] : 0.0f) * w2;
                const float v3 = (i2_in && j2_in ? c1[I2] : 0.0f) * w3;
                const float wsum = w0 + w1 + w2 + w3;
                if (wsum > 0.0f) prow[k] += (v0 + v1 + v2 + v3) / wsum;
            }
        });
    }
}

void PressureSolver::smooth_coarse(Coarse& L, int sweeps, bool reverse) {
    const int nx = L.nx, ny = L.ny;
    for (int s = 0; s < sweeps; ++s)
        for (int pass = 0; pass < 2; ++pass) {
            const int color = reverse ? 1 - pass : pass;
            float* __restrict__ P = L.phi.data();
            par::for_rows(ny, [&](int j) {
                float* prow = P + static_cast<size_t>(j) * nx;
                const float* pn = (j < ny - 1) ? prow + nx : prow;
                const float* ps = (j > 0) ? prow - nx : prow;
                const size_t row = static_cast<size_t>(j) * nx;
                for (int i = (j + color) & 1; i < nx; i += 2) {
                    const float sum = L.wE[row + i] * (i < nx - 1 ? prow[i + 1] : 0.0f) +
                                      L.wW[row + i] * (i > 0 ? prow[i - 1] : 0.0f) + L.wN[row + i] * pn[i] +
                                      L.wS[row + i] * ps[i];
                    prow[i] = (sum - L.g[row + i]) * L.dinv[row + i];
                }
            });
        }
}

void PressureSolver::coarse_residual(Coarse& L) {
    const int nx = L.nx, ny = L.ny;
    const float* __restrict__ P = L.phi.data();
    float* __restrict__ R = L.r.data();
    par::for_rows(ny, [&](int j) {
        const float* prow = P + static_cast<size_t>(j) * nx;
        const float* pn = (j < ny - 1) ? prow + nx : prow;
        const float* ps = (j > 0) ? prow - nx : prow;
        const size_t row = static_cast<size_t>(j) * nx;
        for (int i = 0; i < nx; ++i) {
            const float sum = L.wE[row + i] * (i < nx - 1 ? prow[i + 1] : 0.0f) +
                              L.wW[row + i] * (i > 0 ? prow[i - 1] : 0.0f) + L.wN[row + i] * pn[i] +
                              L.wS[row + i] * ps[i];
            R[row + i] = (L.dinv[row + i] > 0.0f) ? L.g[row + i] - (sum - L.diag[row + i] * prow[i]) : 0.0f;
        }
    });
}

void PressureSolver::vcycle(int level) {
    if (level == 0) {
        smooth_fine(nu_pre_, false);
        if (coarse_.empty()) return;
        fine_residual_red();
        restrict_to_first_coarse();
        std::fill(coarse_.front().phi.begin(), coarse_.front().phi.end(), 0.0f);
        vcycle(1);
        prolong_from_first_coarse();
        smooth_fine(nu_post_, true);
        return;
    }
    Coarse& L = coarse_[static_cast<size_t>(level - 1)];
    if (level == static_cast<int>(coarse_.size())) {
        smooth_coarse(L, coarsest_sweeps_, false);
        return;
    }
    smooth_coarse(L, nu_pre_, false);
    coarse_residual(L);
    Coarse& N = coarse_[static_cast<size_t>(level)];
    par::for_rows(N.ny, [&](int J) {
        float* grow = N.g.data() + static_cast<size_t>(J) * N.nx;
        for (int I = 0; I < N.nx; ++I) {
            float s = 0.0f;
            for (int dj = 0; dj < 2; ++dj)
                for (int di = 0; di < 2; ++di) {
                    const int i = 2 * I + di, j = 2 * J + dj;
                    if (i < L.nx && j < L.ny) s += L.r[static_cast<size_t>(j) * L.nx + i];
                }
            grow[I] = s;
        }
    });
    std::fill(N.phi.begin(), N.phi.end(), 0.0f);
    vcycle(level + 1);
    par::for_rows(L.ny, [&](int j) {
        float* prow = L.phi.data() + static_cast<size_t>(j) * L.nx;
        const float* ldi = L.dinv.data() + static_cast<size_t>(j) * L.nx;
        const int J = j >> 1;
        const int J2 = J + ((j & 1) ? 1 : -1);
        const bool j2_in = J2 >= 0 && J2 < N.ny;
        const float* c0 = N.phi.data() + static_cast<size_t>(J) * N.nx;
        const float* c1 = j2_in ? N.phi.data() + static_cast<size_t>(J2) * N.nx : nullptr;
        const float* l0 = N.dinv.data() + static_cast<size_t>(J) * N.nx;
        const float* l1 = j2_in ? N.dinv.data() + static_cast<size_t>(J2) * N.nx : nullptr;
        for (int i = 0; i < L.nx; ++i) {
            if (!(ldi[i] > 0.0f)) continue;
            const int I = i >> 1;
            const int I2 = I + ((i & 1) ? 1 : -1);
            const bool i2_in = I2 >= 0 && I2 < N.nx;
            const float w0 = (l0[I] > 0.0f) ? 9.0f : 0.0f;
            const float w1 = (!i2_in || l0[I2] > 0.0f) ? 3.0f : 0.0f;
            const float w2 = (!j2_in || l1[I] > 0.0f) ? 3.0f : 0.0f;
            const float w3 = (!i2_in || !j2_in || l1[I2] > 0.0f) ? 1.0f : 0.0f;
            const float v = w0 * c0[I] + (i2_in ? c0[I2] : 0.0f) * w1 + (j2_in ? c1[I] : 0.0f) * w2 +
                            (i2_in && j2_in ? c1[I2] : 0.0f) * w3;
            const float wsum = w0 + w1 + w2 + w3;
            if (wsum > 0.0f) prow[i] += v / wsum;
        }
    });
    smooth_coarse(L, nu_post_, true);
}

PoissonStats PressureSolver::solve(Field2d& phi, const Field2d& rhs_div, double tol_div, int max_cycles,
                                   std::vector<double>* residual_history) {
    const int nx = f_.nx, ny = f_.ny, W = f_.W, Wp = f_.Wp;

    // pack x (warm start) and b = -rhs * h^2 (positive-definite convention);
    // non-unknown slots stay zero
    for (int c = 0; c < 2; ++c) {
        double* X = f_.x[c].data();
        double* B = f_.r[c].data();  // b goes into r, becomes the residual below
        const double* DI = f_.dinv[c].data();
        par::for_rows(ny, [&](int j) {
            const int p = j & 1;
            const int base = (c == 0) ? p : 1 - p;
            const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
            for (int k = 0; k < W; ++k) {
                const int i = 2 * k + base;
                const bool live = (i < nx) && DI[row + k] > 0.0;
                X[row + k] = live ? phi(i, j) : 0.0;
                B[row + k] = live ? -rhs_div(i, j) * f_.h2 : 0.0;
            }
        });
    }
    remove_neumann_means(f_.r);  // compatibility of sealed components

    const double tol_g = tol_div * f_.h2;
    PoissonStats st;

    // r = b - A x
    apply_operator(f_.x, f_.q);
    for (int c = 0; c < 2; ++c) {
        double* R = f_.r[c].data();
        const double* Q = f_.q[c].data();
        par::for_rows(ny, [&](int j) {
            const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
            for (int k = 0; k < W; ++k) R[row + k] -= Q[row + k];
        });
    }

    double r_inf = plane_inf(f_.r);
    if (residual_history) residual_history->push_back(r_inf / f_.h2);
    double rho_prev = 0.0;
    double r_prev = r_inf;

    while (r_inf > tol_g && st.cycles < max_cycles) {
        // z = M^-1 r via one float V-cycle from a zero initial guess; the
        // smoother solves (-lap) z = r when fed g = -r
        for (int c = 0; c < 2; ++c) {
            float* G = f_.fg[c].data();
            const double* R = f_.r[c].data();
            par::for_rows(ny, [&](int j) {
                const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
                for (int k = 0; k < W; ++k) G[row + k] = static_cast<float>(-R[row + k]);
            });
            std::fill(f_.fphi[c].begin(), f_.fphi[c].end(), 0.0f);
        }
        vcycle(0);
        for (int c = 0; c < 2; ++c) {
            double* Z = f_.z[c].data();
            const float* FP = f_.fphi[c].data();
            par::for_rows(ny, [&](int j) {
                const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
                for (int k = 0; k < W; ++k) Z[row + k] = static_cast<double>(FP[row + k]);
            });
        }
        remove_neumann_means(f_.z);

        double rho = plane_dot(f_.r, f_.z);
        if (!(rho > 0.0) || !std::isfinite(rho)) {
            // preconditioner broke down; fall back to the raw residual
            for (int c = 0; c < 2; ++c) std::copy(f_.r[c].begin(), f_.r[c].end(), f_.z[c].begin());
            rho = plane_dot(f_.r, f_.z);
        }

        if (st.cycles == 0 || rho_prev == 0.0) {
            for (int c = 0; c < 2; ++c) std::copy(f_.z[c].begin(), f_.z[c].end(), f_.p[c].begin());
        } else {
            const double beta = rho / rho_prev;
            for (int c = 0; c < 2; ++c) {
                double* P = f_.p[c].data();
                const double* Z = f_.z[c].data();
                par::for_rows(ny, [&](int j) {
                    const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
                    for (int k = 0; k < W; ++k) P[row + k] = Z[row + k] + beta * P[row + k];
                });
            }
        }
        rho_prev = rho;

        apply_operator(f_.p, f_.q);
        const double pq = plane_dot(f_.p, f_.q);
        if (!(std::abs(pq) > 0.0) || !std::isfinite(pq)) break;
        const double alpha = rho / pq;
        // fused update of x and r with the residual norm in the same pass
        double new_inf = 0.0;
        for (int c = 0; c < 2; ++c) {
            double* X = f_.x[c].data();
            double* R = f_.r[c].data();
            const double* P = f_.p[c].data();
            const double* Q = f_.q[c].data();
            new_inf = std::max(new_inf, par::max_over_rows(ny, [&](int j) {
                          const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
                          double mx = 0.0;
                          for (int k = 0; k < W; ++k) {
                              X[row + k] += alpha * P[row + k];
                              const double rv = R[row + k] - alpha * Q[row + k];
                              R[row + k] = rv;
                              mx = std::max(mx, std::abs(rv));
                          }
                          return mx;
                      }));
        }
        ++st.cycles;
        r_prev = r_inf;
        r_inf = new_inf;
        if (residual_history) residual_history->push_back(r_inf / f_.h2);
    }

    st.converged = r_inf <= tol_g;
    st.residual = r_inf / f_.h2;
    if (!st.converged && r_inf > 1.5 * r_prev)
        throw_sim_error(ErrorCode::ProjectionDiverged,
                        "pressure residual growing after max projection iterations");

    // remove the arbitrary constant in sealed components and unpack
    remove_neumann_means(f_.x);
    for (int c = 0; c < 2; ++c) {
        const double* X = f_.x[c].data();
        par::for_rows(ny, [&](int j) {
            const int p = j & 1;
            const int base = (c == 0) ? p : 1 - p;
            const size_t row = static_cast<size_t>(j + 1) * Wp + 1;
            for (int k = 0; k < W; ++k) {
                const int i = 2 * k + base;
                if (i < nx) phi(i, j) = X[row + k];
            }
        });
    }
    return st;
}

}  // namespace dognose
