#pragma once

#include <vector>

#include "dognose/geometry.hpp"
#include "dognose/grid.hpp"

namespace dognose {

struct PoissonStats {
    int cycles = 0;             // preconditioned CG iterations
    double residual = 0.0;      // |r|_inf in divergence units (1/s)
    bool converged = false;
};

// Masked pressure Poisson solver:
//   lap(phi) = div,  Neumann at solid/prescribed faces, phi = 0 at open
// boundary faces. Conjugate gradient preconditioned by one geometric
// multigrid V-cycle; the mask is static, so neighbor weights are precomputed
// per level. The finest level runs red/black Gauss-Seidel on color-split
// planes (unit-stride, SIMD friendly); coarser levels use plain arrays.
// Pure-Neumann fluid components (the chamber) get their right-hand side mean
// removed and their solution re-centered.
//
// Everything is deterministic: cell updates within a color are independent,
// reductions use fixed blocking, so row-parallel runs are bit-identical to
// serial ones.
class PressureSolver {
  public:
    explicit PressureSolver(const GridMask& mask);

    // Solves with warm start from phi; phi is updated in place.
    // tol_div is an absolute bound on |residual|_inf in 1/s.
    PoissonStats solve(Field2d& phi, const Field2d& rhs_div, double tol_div, int max_cycles,
                       std::vector<double>* residual_history = nullptr);

    int levels() const { return static_cast<int>(coarse_.size()) + 1; }

  private:
    using Planes = std::vector<double>[2];
    // The multigrid preconditioner runs in float32 (it only shapes CG search
    // directions); the operator, CG vectors and convergence checks stay in
    // double.
    struct Fine {
        int nx = 0, ny = 0, W = 0, Wp = 0;  // W = (nx+1)/2 packed columns, Wp padded
        double h2 = 0.0;
        // per color: packed planes (ny+2) x Wp with zero borders
        std::vector<double> wE[2], wW[2], wN[2], wS[2], diag[2], dinv[2];
        std::vector<double> x[2], r[2], z[2], p[2], q[2];  // CG workspace
        std::vector<float> fwE[2], fwW[2], fwN[2], fwS[2], fdinv[2], fdiag[2];
        std::vector<float> fphi[2], fg[2];
        std::vector<float> r_red;  // residual at red cells, ny x W, unpadded
        size_t at(int j, int k) const { return static_cast<size_t>(j + 1) * Wp + 1 + k; }
    };
    struct Coarse {
        int nx = 0, ny = 0;
        std::vector<float> phi, g, r, wE, wW, wN, wS, diag, dinv;
    };

    void smooth_fine(int sweeps, bool reverse);
    void fine_residual_red();  // fills r_red (valid right after a black sweep)
    void apply_operator(const Planes& in, Planes& out) const;  // out = A*in
    double plane_dot(const Planes& a, const Planes& b) const;
    double plane_inf(const Planes& a) const;
    void remove_neumann_means(Planes& a) const;
    void restrict_to_first_coarse();
    void prolong_from_first_coarse();
    void smooth_coarse(Coarse& L, int sweeps, bool reverse);
    void coarse_residual(Coarse& L);
    void vcycle(int level);

    Fine f_;
    std::vector<Coarse> coarse_;
    int nu_pre_ = 2, nu_post_ = 2, coarsest_sweeps_ = 40;

    // pure-Neumann components: (color, padded index) on the fine level
    std::vector<std::vector<std::pair<int, size_t>>> neumann_comps_;
};

}  // namespace dognose
