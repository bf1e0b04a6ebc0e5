#pragma once

#include <vector>

#include "transonic/grid_field.hpp"
#include "transonic/jet.hpp"
#include "transonic/linearized_kpi.hpp"
#include "transonic/lump.hpp"

namespace transonic {

// Transport speed sqrt2 - eps^2.
double reduction_speed(double eps);
// A / (B (sqrt2 - eps^2)) from make_lump_params(eps).
double F0_exponent(double eps);
// (B x^2 + C y^2 + E)^F0_exponent.
double F0_eval(double eps, double x, double y);

// (sqrt2/2) d_x g1 - g1^2/2 with a spectral x-derivative, tagged even_x_even_y.
RealField2D f1_from_g1(const RealField2D& g1);

struct ReductionState {
    double eps = 0.0;
    double c = 0.0;
    Grid2D grid{};
    LumpParams lump{};
    bool with_lump = true;  // false replaces q by 0 and F0 by 1
    RealField2D q;          // odd_x_even_y
    RealField2D phi;        // odd_x_even_y
    RealField2D g1;         // q + phi
    RealField2D f1;         // even_x_even_y, from the g1 jet
    RealField2D f2;         // even_x_even_y, zero until set_f2
    double F0_exponent = 0.0;
};

ReductionState make_reduction_state(double eps, const Grid2D& g, const RealField2D& phi, bool with_lump = true);
ReductionState make_reduction_state(double eps, const Grid2D& g);
ReductionState with_f2(ReductionState s, RealField2D f2);

// Derivative tables of g1 = q + phi (closed-form q, spectral phi) and f1 built from it by Leibniz products.
Jet g1_jet(const ReductionState& s, int mx, int my);
Jet f1_jet(const Jet& g1);

// Value of the x-antiderivative of E_phi / F0 at the seam x = L.
// neumann: d_x f2 = 0 on the seam, so f2 extends smoothly across it.
// decaying_tail: the integral of the algebraic tail over [L, inf), so f2 decays but has a slope jump on the seam.
enum class F2Seam { neumann, decaying_tail };

struct F2Options {
    double tol = 1e-10;  // sup-norm Picard update
    int max_iter = 100;
    double guard = 1000.0;  // the constructed phi has star proxy near 200 eps^2
    double delta = 0.1;
    double core_radius = 2.0;  // |x| below which the spectral antiderivative carries the line integral
    double mixing_threshold = 0.9;
    int anderson_depth = 5;
    F2Seam seam = F2Seam::neumann;
};

struct F2Report {
    RealField2D f2;
    int iterations = 0;
    double update = 0.0;
    bool mixed = false;
};

// Picard iteration of f2 = -(F0/c) int_x^inf E_phi / F0 ds with
// E_phi = -2 phi f2 + d2y g1 + d_x f1 - (f1 + eps^2 f2)^2 g1.
F2Report solve_f2(const ReductionState& s, const F2Options& opt = {}, const RealField2D* initial = nullptr);

// c d_x f2 + 2 g1 f2 - (d2y g1 + d_x f1 - (f1 + eps^2 f2)^2 g1) with a spectral d_x f2.
RealField2D f2_residual(const ReductionState& s, const RealField2D& f2);

struct RhsBundle {
    RealField2D P1, P2, P3, Gamma_q, P1_hat, h1, h2;
    // Integrands H with P1 = sum d_x H1 and P2 = sum d_y H2, and their Leibniz derivatives.
    std::vector<RealField2D> H1_terms, H2_terms, P1_terms, P2_terms;
};

// Uses s.f2. With keep_terms the per-term integrands and derivatives are retained.
RhsBundle assemble_rhs(const ReductionState& s, bool keep_terms = false);

// -d4x q + alpha d2x q + 3c d_x((d_x q)^2) + 2 d2y q - 2 eps^2 d2x d2y q - eps^4 d4y q in closed form,
// reduced with the lump equation to (3c - kappa) d_x((d_x q)^2) - 2 eps^2 d2x d2y q - eps^4 d4y q.
RealField2D gamma_q(double eps, const Grid2D& g);

struct FixedPointOptions {
    double tol = 1e-8;  // on the star proxy of successive updates
    int max_iter = 60;
    double delta = 0.1;
    double mixing_threshold = 0.9;
    int anderson_depth = 5;
    F2Options f2{};
    SolveOptions linear{1e-10, 400, 5};
};

struct FixedPointReport {
    int iterations = 0;
    std::vector<double> update_star_norms;
    std::vector<double> contraction_ratios;
    double final_phi_star = 0.0;
    bool converged = false;
    bool mixed = false;
};

struct FixedPointResult {
    ReductionState state;
    FixedPointReport report;
};

// phi_{k+1} = N(phi_k) from phi_0 = 0; throws NotConverged after max_iter.
FixedPointResult outer_fixed_point(double eps, const Grid2D& g, const FixedPointOptions& opt = {});

}  // namespace transonic
