#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "transonic/grid_field.hpp"

namespace transonic {

// q = -A x / (B x^2 + C y^2 + E)
struct LumpParams {
    double eps = 0.0;
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
    double E = 0.0;
};

inline constexpr double lump_eps_max = 0.5;

LumpParams make_lump_params(double eps, double eps_max = lump_eps_max);

// Coefficient 3*sqrt2*((2*sqrt2 - eps^2)/(2*sqrt2))^(5/2) of the lump nonlinearity.
double lump_nonlinear_coeff(double eps);
// Linear x-dispersion coefficient 2*sqrt2 - eps^2.
double lump_alpha(double eps);

// Closed-form derivatives of q as sums of c x^a y^b Q^-k, built once per parameter set.
class LumpDerivatives {
public:
    explicit LumpDerivatives(const LumpParams& p, int max_order = 8);
    const LumpParams& params() const { return p_; }
    int max_order() const { return max_order_; }
    double operator()(int m, int n, double x, double y) const;

private:
    struct Term {
        double c;
        int a, b, k;
    };
    LumpParams p_;
    int max_order_;
    std::vector<std::vector<Term>> table_;  // indexed by m * (max_order + 1) + n
};

double lump_eval(const LumpParams& p, double x, double y);
// Public interface limited to m + n <= 5.
double lump_derivative(const LumpParams& p, int m, int n, double x, double y);

// Samples d^m_x d^n_y q on the grid. With periodic seam handling, components odd in x
// (resp. y) are set to zero on the seam column x = -Lx (resp. row y = -Ly), which is the
// value of their periodic extension there.
enum class SeamPolicy { pointwise, periodic };
RealField2D sample_lump(const LumpDerivatives& d, const Grid2D& g, int m, int n,
                        SeamPolicy seam = SeamPolicy::periodic);
Symmetry lump_symmetry(int m, int n);

// d^4_x q - (2 sqrt2 - eps^2) d^2_x q - kappa d_x((d_x q)^2) - 2 d^2_y q with closed-form derivatives.
// kappa defaults to lump_nonlinear_coeff(eps).
RealField2D kpi_residual(const LumpParams& p, const Grid2D& g, std::optional<double> kappa = std::nullopt);

// (d_x q, d_y q) sampled with periodic seam handling.
std::pair<RealField2D, RealField2D> lump_kernel_fields(const LumpParams& p, const Grid2D& g);

// Derivatives of d^base_m_x d^base_n_y q sampled pointwise in closed form; negative
// requested x-orders are honoured while base_m + m >= 0.
class LumpSource final : public DerivativeSource {
public:
    LumpSource(const LumpParams& p, const Grid2D& g, int base_m, int base_n);
    const Grid2D& grid() const override { return grid_; }
    RealField2D derivative(int m, int n) const override;

private:
    LumpDerivatives d_;
    Grid2D grid_;
    int base_m_, base_n_;
};

}  // namespace transonic
