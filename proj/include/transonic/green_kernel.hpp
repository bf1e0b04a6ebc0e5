#pragma once

#include <string>
#include <vector>

#include "transonic/grid_field.hpp"

namespace transonic {

enum class KernelPreset { normalized, gp };

// Symbol denominator a4 xi1^4 + a2 xi1^2 + b2 xi2^2 + g eps^2 xi1^2 xi2^2 + d4 eps^4 xi2^4.
struct KernelSymbolParams {
    double eps = 0.0;
    double a4 = 1.0;
    double a2 = 1.0;
    double b2 = 1.0;
    double g = 1.0;
    double d4 = 1.0;
    KernelPreset preset = KernelPreset::normalized;
};

KernelSymbolParams make_kernel_params(KernelPreset preset, double eps);
KernelPreset kernel_preset_from_string(const std::string& s);
std::string to_string(KernelPreset p);

double symbol_eval(const KernelSymbolParams& p, double xi1, double xi2);

// Roots of the denominator in xi2^2: denominator = d4 eps^4 (xi2^2 + a)(xi2^2 + b).
// a is the small root (S - D)/(2 d4 eps^4).
class DispersionRoots {
public:
    explicit DispersionRoots(const KernelSymbolParams& p);
    const KernelSymbolParams& params() const { return p_; }
    double eps() const { return p_.eps; }
    // Real zero of D on the positive axis; +inf when D^2 > 0 everywhere.
    double c_eps() const { return c_eps_; }
    // Magnitude of the imaginary zero of D^2; +inf when absent.
    double d_eps() const { return d_eps_; }
    double D2(double xi) const;
    cplx D(double xi) const;
    cplx a(double xi) const;
    cplx b(double xi) const;

private:
    KernelSymbolParams p_;
    double c_eps_;
    double d_eps_;
    // D^2 = q_lead_ * prod (xi^2 - t) over the roots t in xi^2.
    double q_lead_ = 0.0;
    std::vector<double> t_roots_;
};

// Normalized preset, 0 < eps <= 0.5.
DispersionRoots dispersion_roots(double eps);

// M_m of the normalized preset, |xi| < c_eps.
double m_function(double eps, int m, double xi);

bool kernel_order_supported(int m, int n);

struct KernelFftOptions {
    // Subtract e^{-sigma Q}/Q, Q = a2 xi1^2 + b2 xi2^2, and add its closed-form transform back.
    bool subtract_model = false;
    double model_sigma = 0.5;
    // Multiply the spectrum by exp(-(|xi|/window_xi)^8); 0 disables.
    double window_xi = 0.0;
};

// (2 pi)^-2 sum over the periodic lattice of (i xi1)^m (i xi2)^n / denominator, zero mode dropped.
RealField2D kernel_fft(const KernelSymbolParams& p, const Grid2D& g, int m, int n, const KernelFftOptions& opt = {});
// The same truncated Fourier series evaluated at an arbitrary point.
double kernel_fft_point(const KernelSymbolParams& p, const Grid2D& g, int m, int n, double x, double y,
                        const KernelFftOptions& opt = {});
// Closed-form d^m_x d^n_y of the model kernel, m + n <= 3.
double kernel_model_eval(const KernelSymbolParams& p, int m, int n, double x, double y, double sigma);

struct ResidueOptions {
    double quad_tol = 1e-8;
    int max_depth = 18;
};

// Residue-reduced evaluation of d^m_x d^n_y G at (x, y) != (0, 0).
double kernel_residue_eval(const KernelSymbolParams& p, int m, int n, double x, double y,
                           const ResidueOptions& opt = {});

// Large-xi limit of xi^m times the y = 0 residue integrand, for m + n = 3 with n even.
double kernel_axis_asymptote(const KernelSymbolParams& p, int m, int n);
// y = 0 residue integrand times xi^m (real), for checking the asymptote.
double kernel_axis_integrand(const KernelSymbolParams& p, int m, int n, double xi);

struct DecayScanReport {
    int m = 0;
    int n = 0;
    KernelPreset preset = KernelPreset::normalized;
    double eps = 0.0;
    std::vector<double> rays_deg;
    std::vector<double> radii;
    std::vector<std::vector<double>> values;  // [ray][radius]
    std::vector<double> fitted_slope_per_ray;
    std::vector<double> prefactor_per_ray;
    double bound_slope = 0.0;
    double max_prefactor = 0.0;
};

double theorem_bound_slope(int m, int n);

enum class ScanMode { far, near };

// Radii must lie in [2, Lx/2] (far) or [1e-3, 0.5] (near).
DecayScanReport decay_scan(const KernelSymbolParams& p, int m, int n, const std::vector<double>& radii,
                           const std::vector<double>& angles_deg, double Lx = 40.0, ScanMode mode = ScanMode::far);

// Integral of |d^m_x d^n_y G| over the disc of radius r, 0 < r <= Lx/2.
double integral_scan(const KernelSymbolParams& p, int m, int n, double r, double Lx = 40.0);

}  // namespace transonic
