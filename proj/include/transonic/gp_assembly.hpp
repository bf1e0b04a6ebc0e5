#pragma once

#include "transonic/grid_field.hpp"
#include "transonic/jet.hpp"
#include "transonic/reduction.hpp"

namespace transonic {

// Phi = (1 + eps^2 f1 + eps^4 f2) + i eps g1 on the stretched grid, with f2 = s.f2.
ComplexField2D assemble_phi(const ReductionState& s);

struct GpResidualFields {
    RealField2D res1;  // c eps g_x + eps^4 f_yy + eps^2 f_xx - (f^2 + g^2 - 1) f
    RealField2D res2;  // -c eps f_x + eps^4 g_yy + eps^2 g_xx - (f^2 + g^2 - 1) g
};

// Residuals of (f, g) given derivative jets of order at least (2, 2) with c = sqrt2 - eps^2.
GpResidualFields gp_residual_fields(const Jet& f, const Jet& g, double eps);
// Jets from the state: closed-form q, spectral phi and f2.
GpResidualFields gp_residual_fields(const ReductionState& s);

struct FarfieldFit {
    double alpha = 0.0;
    double beta = 0.0;
    double residual = 0.0;  // relative L2 misfit on the ring
    double ring_re = 0.0;   // sup |z~| |Re(Phi - 1)| on the ring
    double ring_im = 0.0;   // sup |z~| |Im(Phi - 1)| on the ring
    int ring_points = 0;
};

// Least-squares fit of |z~| Im(Phi - 1) on r in [0.6, 0.9] min(Lx, Ly) to
// (alpha x~ + beta y~) |z~| / (x~^2 + (1 - c^2/2) y~^2), x~ = x/eps, y~ = y/eps^2, c = sqrt2 - eps^2.
FarfieldFit farfield_fit(const ComplexField2D& phi, double eps);

// int 1/2 |grad Psi|^2 + 1/4 (|Psi|^2 - 1)^2 in the original variables, with spectral gradients.
double energy(const ComplexField2D& phi, double eps);
// Same integral for assemble_phi(s) with gradients from jets (closed-form lump derivatives).
double energy(const ReductionState& s);

struct GpResidualReport {
    double eps = 0.0;
    double c = 0.0;
    double res1_sup = 0.0;
    double res2_sup = 0.0;
    double res1_weighted = 0.0;  // sup (1 + r)^3 |res1|
    double res2_weighted = 0.0;
    double energy = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double farfield_fit_residual = 0.0;
    double theorem_gap = 0.0;  // sup |Phi - 1 - i eps q| / eps^2
};

GpResidualReport gp_system_residual(const ReductionState& s);

}  // namespace transonic
