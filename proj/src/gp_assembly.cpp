#include "transonic/gp_assembly.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "transonic/error.hpp"
#include "transonic/jet.hpp"

namespace transonic {

namespace {

double weighted(const RealField2D& f, double p) {
    const Grid2D& g = f.grid();
    double m = 0.0;
    for (int k = 0; k < g.ny; ++k)
        for (int j = 0; j < g.nx; ++j) m = std::max(m, std::pow(1.0 + std::hypot(g.x(j), g.y(k)), p) * std::abs(f(j, k)));
    return m;
}

}  // namespace

ComplexField2D assemble_phi(const ReductionState& s) {
    const double e2 = s.eps * s.eps;
    ComplexField2D phi{add_constant(e2 * s.f1 + (e2 * e2) * s.f2, 1.0), s.eps * s.g1};
    phi.re.set_symmetry(Symmetry::even_x_even_y);
    phi.im.set_symmetry(Symmetry::odd_x_even_y);
    return phi;
}

GpResidualFields gp_residual_fields(const Jet& f, const Jet& g, double eps) {
    if (f.mx() < 2 || f.my() < 2 || g.mx() < 2 || g.my() < 2)
        throw ValidationError("gp_residual_fields requires jets of order (2, 2)");
    require_same_grid(f.grid(), g.grid());
    const double e2 = eps * eps;
    const double c = reduction_speed(eps);
    const RealField2D N = add_constant(multiply(f.value(), f.value()) + multiply(g.value(), g.value()), -1.0);
    GpResidualFields r;
    r.res1 = c * eps * g(1, 0) + (e2 * e2) * f(0, 2) + e2 * f(2, 0) - multiply(N, f.value());
    r.res2 = -c * eps * f(1, 0) + (e2 * e2) * g(0, 2) + e2 * g(2, 0) - multiply(N, g.value());
    return r;
}

GpResidualFields gp_residual_fields(const ReductionState& s) {
    const double e2 = s.eps * s.eps;
    const Jet G1 = g1_jet(s, 3, 2);
    const Jet f = 1.0 + e2 * f1_jet(G1) + (e2 * e2) * Jet::from_field(s.f2, 2, 2);
    return gp_residual_fields(f, s.eps * G1.truncated(2, 2), s.eps);
}

FarfieldFit farfield_fit(const ComplexField2D& phi, double eps) {
    if (!(eps > 0.0)) throw ValidationError("farfield_fit requires eps > 0");
    const Grid2D& g = phi.grid();
    const double R = std::min(g.Lx, g.Ly);
    const double c = reduction_speed(eps);
    const double aniso = 1.0 - 0.5 * c * c;
    std::vector<double> bx, by, data;
    FarfieldFit fit;
    for (int k = 0; k < g.ny; ++k)
        for (int j = 0; j < g.nx; ++j) {
            const double r = std::hypot(g.x(j), g.y(k));
            if (r < 0.6 * R || r > 0.9 * R) continue;
            const double xt = g.x(j) / eps;
            const double yt = g.y(k) / (eps * eps);
            const double zt = std::hypot(xt, yt);
            const double d = xt * xt + aniso * yt * yt;
            bx.push_back(xt * zt / d);
            by.push_back(yt * zt / d);
            data.push_back(zt * phi.im(j, k));
            fit.ring_re = std::max(fit.ring_re, zt * std::abs(phi.re(j, k) - 1.0));
            fit.ring_im = std::max(fit.ring_im, zt * std::abs(phi.im(j, k)));
        }
    fit.ring_points = static_cast<int>(data.size());
    if (fit.ring_points < 16) throw ValidationError("ill-conditioned far-field fit: ring has too few points");
    const auto n = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd A(n, 2);
    A.col(0) = Eigen::Map<const Eigen::VectorXd>(bx.data(), n);
    A.col(1) = Eigen::Map<const Eigen::VectorXd>(by.data(), n);
    const Eigen::Map<const Eigen::VectorXd> b(data.data(), n);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto sv = svd.singularValues();
    if (!(sv(1) > 1e-12 * sv(0))) throw ValidationError("ill-conditioned far-field fit");
    const Eigen::Vector2d x = svd.solve(b);
    fit.alpha = x(0);
    fit.beta = x(1);
    const double bn = b.norm();
    fit.residual = bn > 0.0 ? (A * x - b).norm() / bn : 0.0;
    return fit;
}

namespace {

double energy_sum(const RealField2D& re, const RealField2D& im, const RealField2D& rx, const RealField2D& ry,
                  const RealField2D& ix, const RealField2D& iy, double eps) {
    const double e2 = eps * eps;
    double sum = 0.0;
    for (std::size_t i = 0; i < re.values().size(); ++i) {
        const double m = re[i] * re[i] + im[i] * im[i] - 1.0;
        const double grad = e2 * (rx[i] * rx[i] + ix[i] * ix[i]) + e2 * e2 * (ry[i] * ry[i] + iy[i] * iy[i]);
        sum += 0.5 * grad + 0.25 * m * m;
    }
    if (sum == 0.0) return 0.0;
    if (!(eps > 0.0)) throw ValidationError("energy of a nonconstant field requires eps > 0");
    const Grid2D& g = re.grid();
    return sum * g.dx() * g.dy() / (e2 * eps);
}

}  // namespace

double energy(const ComplexField2D& phi, double eps) {
    const SpectralView re(phi.re), im(phi.im);
    return energy_sum(phi.re, phi.im, re.derivative(1, 0), re.derivative(0, 1), im.derivative(1, 0),
                      im.derivative(0, 1), eps);
}

double energy(const ReductionState& s) {
    const double e2 = s.eps * s.eps;
    const Jet G1 = g1_jet(s, 2, 1);
    const Jet f = 1.0 + e2 * f1_jet(G1) + (e2 * e2) * Jet::from_field(s.f2, 1, 1);
    const Jet g = s.eps * G1.truncated(1, 1);
    return energy_sum(f.value(), g.value(), f(1, 0), f(0, 1), g(1, 0), g(0, 1), s.eps);
}

GpResidualReport gp_system_residual(const ReductionState& s) {
    GpResidualReport rep;
    rep.eps = s.eps;
    rep.c = s.c;
    const GpResidualFields r = gp_residual_fields(s);
    rep.res1_sup = r.res1.max_abs();
    rep.res2_sup = r.res2.max_abs();
    rep.res1_weighted = weighted(r.res1, 3.0);
    rep.res2_weighted = weighted(r.res2, 3.0);
    if (s.eps == 0.0) return rep;

    const ComplexField2D phi = assemble_phi(s);
    rep.energy = energy(s);
    const FarfieldFit fit = farfield_fit(phi, s.eps);
    rep.alpha = fit.alpha;
    rep.beta = fit.beta;
    rep.farfield_fit_residual = fit.residual;
    double gap = 0.0;
    for (std::size_t i = 0; i < s.grid.size(); ++i)
        gap = std::max(gap, std::hypot(phi.re[i] - 1.0, phi.im[i] - s.eps * s.q[i]));
    rep.theorem_gap = gap / (s.eps * s.eps);
    return rep;
}

}  // namespace transonic
