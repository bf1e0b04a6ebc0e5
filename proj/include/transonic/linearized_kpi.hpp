#pragma once

#include <cstdint>
#include <vector>

#include "transonic/grid_field.hpp"
#include "transonic/lump.hpp"

namespace transonic {

double linearized_coeff_nl(double eps);
double linearized_coeff_lump_nl(double eps);

struct LinearizedOperator {
    double eps = 0.0;
    Grid2D grid{};
    LumpParams lump{};
    RealField2D q;        // lump, periodic sampling
    RealField2D qx;       // d_x q, periodic sampling
    RealField2D qx_dealiased;
    double coeff_nl = 0.0;
    double coeff_lump_nl = 0.0;
    double Lambda = 0.0;  // coeff_lump_nl - coeff_nl
    // Disables the d_x(d_x q d_x .) coupling (constant-coefficient operator only).
    bool q_coupling = true;
};

LinearizedOperator make_linearized_operator(double eps, const Grid2D& g);

// 2/3-truncated product D(D a * D b); exactly symmetric as a multiplication operator.
RealField2D coupled_product(const RealField2D& a_dealiased, const RealField2D& b);

// Symbol xi1^4 + (2 sqrt2 - eps^2) xi1^2 + 2 xi2^2 + 2 eps^2 xi1^2 xi2^2 + eps^4 xi2^4.
double linearized_symbol(double eps, double xi1, double xi2);

// d4x phi - (2 sqrt2 - eps^2) d2x phi - coeff_nl d_x(d_x q d_x phi) - 2 d2y phi + 2 eps^2 d2x d2y phi + eps^4 d4y phi.
RealField2D apply_linearized(const LinearizedOperator& op, const RealField2D& phi);

// Linearization of the lump equation about q: coeff_lump_nl and no eps-weighted y-terms.
RealField2D apply_lump_linearization(const LinearizedOperator& op, const RealField2D& phi);
// Same operator with derivatives of phi drawn from src and q-derivatives in closed form.
RealField2D apply_lump_linearization(const LinearizedOperator& op, const DerivativeSource& src);

struct SolveOptions {
    double tol = 1e-8;
    int max_iter = 200;
    int anderson_depth = 5;
};

struct SolveReport {
    RealField2D phi;
    int iterations = 0;
    double residual = 0.0;  // ||A phi - rhs|| / ||rhs||
    std::vector<double> history;
};

// Solves apply_linearized(op, phi) = d_x h1 + d_y h2 in the odd_x_even_y class, starting from
// initial when given and from zero otherwise.
SolveReport solve_linearized(const LinearizedOperator& op, const RealField2D& h1, const RealField2D& h2,
                             const SolveOptions& opt = {}, const RealField2D* initial = nullptr);

// L psi = d2x psi - (2 sqrt2 - eps^2) psi - coeff_lump_nl d_x q psi - 2 d_x^-2 d2y psi, with the line means
// of the product term removed so that the result again has zero x-mean. Requires zero x-mean input.
RealField2D apply_L(const LinearizedOperator& op, const RealField2D& psi);
RealField2D apply_L(const LinearizedOperator& op, const DerivativeSource& src);

struct EigenPair {
    double lambda = 0.0;
    RealField2D psi;
};

struct EigenOptions {
    double tol = 1e-8;
    int max_iter = 400;
    std::uint64_t seed = 1;
    // Eigenvalues with |lambda| <= zero_tol * (2 sqrt2 - eps^2) count as the translational zero mode.
    double zero_tol = 1e-3;
};

struct EigenReport {
    // Pairs of -L phi = lambda phi, ascending; the k lowest over both x-parities with even y.
    std::vector<EigenPair> pairs;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    int negative_count = 0;
    RealField2D phi0;  // even_x_even_y, unit L2 norm, positive at the origin
    RealField2D phi1;  // antiderivative_x(phi0), odd_x_even_y
    int iterations = 0;
};

EigenReport eigen_extremes(const LinearizedOperator& op, int k, const EigenOptions& opt = {});

struct NormSuite {
    double delta = 0.1;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double star = 0.0;
    double dstar = 0.0;
    double tstar = 0.0;
    double qstar = 0.0;
    double pstar = 0.0;
};

double norm_a(const RealField2D& f, double eps);
double norm_b(const RealField2D& f);
double norm_c(const RealField2D& f);
double norm_star(const RealField2D& f, double eps, double delta);
// norm_star without the eps^(11/2) terms (d4y and d_x^-1 d4y), used as an iteration stopping measure.
double norm_star_proxy(const RealField2D& f, double eps, double delta);
double norm_dstar(const RealField2D& f, double delta);
double norm_tstar(const RealField2D& f, double delta);
double norm_qstar(const RealField2D& f, double eps, double delta);
double norm_pstar(const RealField2D& f, double eps, double delta);

NormSuite norm_suite(const RealField2D& phi, double eps, double delta = 0.1);

}  // namespace transonic
