#include "transonic/reduction.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "anderson.hpp"
#include "transonic/error.hpp"

namespace transonic {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;
constexpr int stencil = 8;
constexpr int stencil_shift = -3;

// Weights of the 8-point interpolatory rule for the interval [0, 1] with nodes off, ..., off + 7.
using StencilWeights = std::array<std::array<double, stencil>, stencil>;

const StencilWeights& interval_weights() {
    static const StencilWeights w = [] {
        StencilWeights out{};
        for (int o = 0; o < stencil; ++o) {
            const int off = -o;
            Eigen::Matrix<double, stencil, stencil> V;
            Eigen::Matrix<double, stencil, 1> rhs;
            for (int k = 0; k < stencil; ++k) {
                rhs(k) = 1.0 / (k + 1);
                for (int j = 0; j < stencil; ++j) V(k, j) = std::pow(static_cast<double>(off + j), k);
            }
            const Eigen::Matrix<double, stencil, 1> sol = V.fullPivLu().solve(rhs);
            for (int j = 0; j < stencil; ++j) out[static_cast<std::size_t>(o)][static_cast<std::size_t>(j)] = sol(j);
        }
        return out;
    }();
    return w;
}

void require_grid(const ReductionState& s, const RealField2D& f, const char* what) {
    if (f.values().size() != s.grid.size()) throw ValidationError(std::string(what) + ": field is empty");
    require_same_grid(s.grid, f.grid());
}

double quad_form(const LumpParams& p, double x, double y) { return p.B * x * x + p.C * y * y + p.E; }

RealField2D F0_field(const ReductionState& s) {
    RealField2D f(s.grid, Symmetry::even_x_even_y);
    const Grid2D& g = s.grid;
    for (int k = 0; k < g.ny; ++k)
        for (int j = 0; j < g.nx; ++j)
            f(j, k) = s.with_lump ? std::pow(quad_form(s.lump, g.x(j), g.y(k)), s.F0_exponent) : 1.0;
    return f;
}

RealField2D pointwise(const RealField2D& a, const RealField2D& b, double (*op)(double, double), Symmetry sym) {
    RealField2D r(a.grid(), sym);
    const auto av = a.values();
    const auto bv = b.values();
    auto rv = r.values();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] = op(av[i], bv[i]);
    return r;
}

// u(x, y) = u(L, y) + int_x^L w(s, y) ds for w odd in x; the result is even in x.
// Spectral antiderivative for |x| <= core, composite 8-point quadrature from x = L inward outside it.
// With w ~ K x Q^-(p+2) extrapolated from x = L - h, the neumann anchor u(L) = F0 w / d_x F0 makes
// d_x (F0 u) vanish on the seam and the decaying_tail anchor is int_L^inf w ds.
RealField2D line_integral(const ReductionState& s, const RealField2D& w, double core, F2Seam seam) {
    const Grid2D& g = s.grid;
    const RealField2D W = SpectralView(w).derivative(-1, 0);
    const int nx = g.nx;
    const int mid = nx / 2;
    const int m = nx - mid + 1;  // nodes x = 0, h, ..., L
    const double h = g.dx();
    const double L = g.Lx;
    const double xa = L - h;
    const double p = s.F0_exponent;
    const int j0 = std::min(static_cast<int>(std::lround(core / h)), m - 2);
    const auto& wt = interval_weights();

    RealField2D u(g, Symmetry::even_x_even_y);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < g.ny; ++k) {
        const double y = g.y(k);
        std::vector<double> wl(static_cast<std::size_t>(m));
        for (int i = 0; i < m - 1; ++i) wl[static_cast<std::size_t>(i)] = w(mid + i, k);
        const double QL = quad_form(s.lump, L, y);
        const double Qa = quad_form(s.lump, xa, y);
        const double wL = w(nx - 1, k) * (L / xa) * std::pow(Qa / QL, p + 2.0);
        wl[static_cast<std::size_t>(m - 1)] = wL;

        std::vector<double> cum(static_cast<std::size_t>(m));
        const double pa = seam == F2Seam::neumann ? p : p + 1.0;
        cum[static_cast<std::size_t>(m - 1)] = pa > 0.0 ? wL * QL / (2.0 * s.lump.B * pa * L) : 0.0;
        for (int i = m - 2; i >= 0; --i) {
            int off = stencil_shift;
            if (i + off < 0) off = -i;
            if (i + off + stencil - 1 > m - 1) off = m - 1 - (stencil - 1) - i;
            const auto& c = wt[static_cast<std::size_t>(-off)];
            double seg = 0.0;
            for (int t = 0; t < stencil; ++t) seg += c[static_cast<std::size_t>(t)] * wl[static_cast<std::size_t>(i + off + t)];
            cum[static_cast<std::size_t>(i)] = cum[static_cast<std::size_t>(i + 1)] + h * seg;
        }
        const double anchor = W(mid + j0, k);
        for (int i = 0; i < j0; ++i)
            cum[static_cast<std::size_t>(i)] = anchor - W(mid + i, k) + cum[static_cast<std::size_t>(j0)];

        for (int i = 0; i < m - 1; ++i) u(mid + i, k) = cum[static_cast<std::size_t>(i)];
        for (int i = 1; i < mid; ++i) u(mid - i, k) = cum[static_cast<std::size_t>(i)];
        u(0, k) = cum[static_cast<std::size_t>(m - 1)];
    }
    symmetrize(u);
    return u;
}

// Pieces of the f2 equation that do not depend on f2.
struct F2Data {
    RealField2D rhs0;  // d2y g1 + d_x f1
    RealField2D F0;
};

F2Data f2_data(const ReductionState& s) {
    const Jet G1 = g1_jet(s, 2, 2);
    const Jet F1 = f1_jet(G1);
    return {G1(0, 2) + F1(1, 0), F0_field(s)};
}

// -2 phi f2 + rhs0 - (f1 + eps^2 f2)^2 g1
RealField2D e_phi(const ReductionState& s, const RealField2D& rhs0, const RealField2D& f2) {
    const double e2 = s.eps * s.eps;
    RealField2D r = rhs0;
    auto rv = r.values();
    const auto phi = s.phi.values();
    const auto f1 = s.f1.values();
    const auto g1 = s.g1.values();
    const auto fv = f2.values();
    for (std::size_t i = 0; i < rv.size(); ++i) {
        const double a = f1[i] + e2 * fv[i];
        rv[i] += -2.0 * phi[i] * fv[i] - a * a * g1[i];
    }
    return r;
}

void validate_eps(double eps, double hi) {
    if (!(eps >= 0.0) || !(eps <= hi)) throw ValidationError("epsilon out of supported range");
}

}  // namespace

double reduction_speed(double eps) { return sqrt2 - eps * eps; }

double F0_exponent(double eps) {
    const LumpParams p = make_lump_params(eps);
    return p.A / (p.B * reduction_speed(eps));
}

double F0_eval(double eps, double x, double y) {
    const LumpParams p = make_lump_params(eps);
    return std::pow(quad_form(p, x, y), p.A / (p.B * reduction_speed(eps)));
}

RealField2D f1_from_g1(const RealField2D& g1) {
    require_symmetry(g1, Symmetry::odd_x_even_y, "f1_from_g1");
    RealField2D r = (sqrt2 / 2.0) * derivative(g1, 1, 0) - 0.5 * multiply(g1, g1);
    r.set_symmetry(Symmetry::even_x_even_y);
    return r;
}

ReductionState make_reduction_state(double eps, const Grid2D& g, const RealField2D& phi, bool with_lump) {
    require_same_grid(g, phi.grid());
    require_symmetry(phi, Symmetry::odd_x_even_y, "reduction state phi");
    ReductionState s;
    s.eps = eps;
    s.c = reduction_speed(eps);
    s.grid = g;
    s.lump = make_lump_params(eps);
    s.with_lump = with_lump;
    s.q = with_lump ? sample_lump(LumpDerivatives(s.lump, 0), g, 0, 0) : RealField2D(g, Symmetry::odd_x_even_y);
    s.phi = phi;
    s.g1 = s.q + phi;
    s.F0_exponent = with_lump ? F0_exponent(eps) : 0.0;
    s.f1 = f1_jet(g1_jet(s, 1, 0)).value();
    s.f2 = RealField2D(g, Symmetry::even_x_even_y);
    return s;
}

ReductionState make_reduction_state(double eps, const Grid2D& g) {
    return make_reduction_state(eps, g, RealField2D(g, Symmetry::odd_x_even_y));
}

ReductionState with_f2(ReductionState s, RealField2D f2) {
    require_grid(s, f2, "with_f2");
    require_symmetry(f2, Symmetry::even_x_even_y, "with_f2");
    s.f2 = std::move(f2);
    return s;
}

Jet g1_jet(const ReductionState& s, int mx, int my) {
    Jet j = Jet::from_field(s.phi, mx, my);
    if (!s.with_lump) return j;
    const LumpDerivatives d(s.lump, mx + my);
    for (int a = 0; a <= mx; ++a)
        for (int b = 0; b <= my; ++b) j(a, b) += sample_lump(d, s.grid, a, b);
    return j;
}

Jet f1_jet(const Jet& g1) { return (sqrt2 / 2.0) * g1.dx() - 0.5 * (g1.truncated(g1.mx() - 1, g1.my()) * g1); }

F2Report solve_f2(const ReductionState& s, const F2Options& opt, const RealField2D* initial) {
    if (opt.tol <= 0.0 || opt.max_iter < 1 || opt.guard <= 0.0 || opt.core_radius < 0.0)
        throw ValidationError("solve_f2 requires tol > 0, max_iter >= 1, guard > 0, core_radius >= 0");
    const double proxy = s.phi.max_abs() == 0.0 ? 0.0 : norm_star_proxy(s.phi, s.eps, opt.delta);
    if (proxy > opt.guard * s.eps * s.eps)
        throw GuardViolated("solve_f2: star proxy of phi " + format_number(proxy) + " exceeds " +
                            format_number(opt.guard) + " eps^2");

    const F2Data data = f2_data(s);
    const double c = s.c;
    auto picard = [&](const RealField2D& f2) {
        RealField2D w = pointwise(e_phi(s, data.rhs0, f2), data.F0, [](double a, double b) { return a / b; },
                                  Symmetry::odd_x_even_y);
        RealField2D u = line_integral(s, w, opt.core_radius, opt.seam);
        RealField2D r = pointwise(data.F0, u, [](double a, double b) { return a * b; }, Symmetry::even_x_even_y);
        r *= -1.0 / c;
        symmetrize(r);
        return r;
    };

    F2Report rep;
    rep.f2 = RealField2D(s.grid, Symmetry::even_x_even_y);
    if (initial) {
        require_grid(s, *initial, "solve_f2 initial guess");
        require_symmetry(*initial, Symmetry::even_x_even_y, "solve_f2 initial guess");
        rep.f2 = *initial;
    }
    const std::size_t n = s.grid.size();
    detail::AndersonMixer mixer(opt.anderson_depth);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= opt.max_iter; ++it) {
        RealField2D next = picard(rep.f2);
        const double d = (next - rep.f2).max_abs();
        rep.iterations = it;
        rep.update = d;
        if (d <= opt.tol) {
            rep.f2 = std::move(next);
            return rep;
        }
        if (!rep.mixed && it > 1 && d > opt.mixing_threshold * prev) rep.mixed = true;
        prev = d;
        if (rep.mixed) {
            const Eigen::Map<const Eigen::VectorXd> x(rep.f2.values().data(), static_cast<Eigen::Index>(n));
            const Eigen::Map<const Eigen::VectorXd> gx(next.values().data(), static_cast<Eigen::Index>(n));
            const Eigen::VectorXd mixed = mixer.next(x, gx);
            Eigen::Map<Eigen::VectorXd>(next.values().data(), static_cast<Eigen::Index>(n)) = mixed;
            symmetrize(next);
        }
        rep.f2 = std::move(next);
    }
    throw NotConverged("solve_f2: update " + format_number(rep.update) + " after " + std::to_string(opt.max_iter) +
                       " iterations");
}

RealField2D f2_residual(const ReductionState& s, const RealField2D& f2) {
    require_grid(s, f2, "f2_residual");
    const F2Data data = f2_data(s);
    RealField2D r = s.c * derivative(f2, 1, 0) + 2.0 * multiply(s.g1, f2);
    r -= e_phi(s, data.rhs0, f2) + 2.0 * multiply(s.phi, f2);
    return r;
}

RealField2D gamma_q(double eps, const Grid2D& g) {
    const LumpParams p = make_lump_params(eps);
    const LumpDerivatives d(p, 4);
    auto q = [&](int m, int n) { return sample_lump(d, g, m, n); };
    const double e2 = eps * eps;
    // The lump equation removes -d4x q + alpha d2x q + 2 d2y q in favour of -kappa d_x((d_x q)^2).
    const double k = 3.0 * reduction_speed(eps) - lump_nonlinear_coeff(eps);
    RealField2D r = 2.0 * k * multiply(q(1, 0), q(2, 0));
    r -= 2.0 * e2 * q(2, 2) + e2 * e2 * q(0, 4);
    return r;
}

RhsBundle assemble_rhs(const ReductionState& s, bool keep_terms) {
    const double e2 = s.eps * s.eps;
    const double e4 = e2 * e2;
    const double c = s.c;
    const Jet g = g1_jet(s, 3, 2);
    const Jet f = f1_jet(g);
    const Jet F = Jet::from_field(s.f2, 2, 2);

    const Jet pi3 = 2.0 * e2 * (f * F * g) + e4 * (g * F * F);
    const Jet inner = g * f * f + pi3;

    RhsBundle b;
    b.P1 = RealField2D(s.grid, Symmetry::odd_x_even_y);
    b.P2 = RealField2D(s.grid, Symmetry::odd_x_even_y);
    b.h2 = RealField2D(s.grid, Symmetry::odd_x_odd_y);

    // x-integrands, each needed to first order in x.
    {
        const Jet g1 = g.truncated(1, 0);
        const Jet gx = g.dx().truncated(1, 0);
        const Jet f1 = f.truncated(1, 0);
        const Jet f2 = F.truncated(1, 0);
        const Jet cub = 6.0 * e2 * (f1 * f2) + e2 * cube(f1 + e2 * f2) + 3.0 * e4 * (f2 * f2) + e2 * (f2 * g1 * g1);
        const std::vector<Jet> H1 = {
            e2 * (g.truncated(2, 0) * g.dx().truncated(2, 0)).dx(),
            e2 * inner.truncated(2, 0).dx(),
            -c * e4 * (f2 * f2),
            -e4 / c * (f1 * f1),
            2.0 * e2 * (gx * f2),
            (2.0 * e2 - sqrt2 / 2.0 * e4) / (2.0 - sqrt2 * e2) * (gx * gx),
            c * cub,
            2.0 * e4 * (f1 * f2),
            -sqrt2 * e2 * (g1 * f.dx().truncated(1, 0)),
        };
        for (const Jet& h : H1) {
            b.P1 += h(1, 0);
            if (keep_terms) {
                b.H1_terms.push_back(h.value());
                b.P1_terms.push_back(h(1, 0));
            }
        }
    }
    // y-integrands, each needed to first order in y.
    {
        const Jet gx = g.dx().truncated(0, 1);
        const Jet gy = g.dy().truncated(0, 1);
        const std::vector<Jet> H2 = {
            sqrt2 * e2 * (gx * gy),
            e4 * inner.truncated(0, 2).dy(),
            4.0 * e4 * (gy * F.truncated(0, 1)),
            -2.0 * e4 / c * (gy * f.truncated(0, 1)),
            2.0 * e2 / c * (gy * gx),
        };
        for (const Jet& h : H2) {
            b.P2 += h(0, 1);
            b.h2 += h.value();
            if (keep_terms) {
                b.H2_terms.push_back(h.value());
                b.P2_terms.push_back(h(0, 1));
            }
        }
    }
    {
        const Jet g1 = g.truncated(0, 0);
        const Jet gx = g.dx().truncated(0, 0);
        const Jet gy = g.dy().truncated(0, 0);
        const Jet f1 = f.truncated(0, 0);
        const Jet f2 = F.truncated(0, 0);
        const Jet p3 = pi3.truncated(0, 0);
        const Jet gg = g.truncated(1, 2) * g.truncated(1, 2);
        const Jet w = 2.0 * f2 + f1 * f1;
        const Jet cub = 6.0 * e2 * (f1 * f2) + e2 * cube(f1 + e2 * f2) + 3.0 * e4 * (f2 * f2) + e2 * (f2 * g1 * g1);
        const Jet ggy = gg.dy().truncated(0, 0);
        const Jet ggyy = gg.dy().dy().truncated(0, 0);
        const Jet ggx = gg.dx().truncated(0, 0);
        const Jet P3 = e2 * (g1 * ggyy) - e4 / c * (gy * ggy) - 2.0 * e4 * (g1 * w * f2) - 2.0 * e4 * (p3 * f2) +
                       2.0 * e4 / c * (g1 * w * f1) + 2.0 * e4 / c * (p3 * f1) - e2 / c * (ggx * gx) -
                       2.0 * e2 / c * (g1 * w * gx + gx * p3) + 2.0 * (g1 * cub) - 2.0 * p3 -
                       0.5 * e2 * (g1 * g1 * ggx);
        b.P3 = P3.value();
    }

    b.Gamma_q = s.with_lump ? gamma_q(s.eps, s.grid) : RealField2D(s.grid, Symmetry::odd_x_even_y);
    const SpectralView phi(s.phi);
    b.P1_hat = b.P1 + b.Gamma_q + 6.0 * c * multiply(phi.derivative(1, 0), phi.derivative(2, 0));

    require_symmetry(b.P1, Symmetry::odd_x_even_y, "assemble_rhs P1");
    require_symmetry(b.P2, Symmetry::odd_x_even_y, "assemble_rhs P2");
    require_symmetry(b.P3, Symmetry::odd_x_even_y, "assemble_rhs P3");
    require_symmetry(b.Gamma_q, Symmetry::odd_x_even_y, "assemble_rhs Gamma_q");
    require_symmetry(b.P1_hat, Symmetry::odd_x_even_y, "assemble_rhs P1_hat");
    require_symmetry(b.h2, Symmetry::odd_x_odd_y, "assemble_rhs h2");
    b.h1 = antiderivative_x(b.P1_hat + b.P3);
    require_symmetry(b.h1, Symmetry::even_x_even_y, "assemble_rhs h1");
    return b;
}

FixedPointResult outer_fixed_point(double eps, const Grid2D& g, const FixedPointOptions& opt) {
    validate_eps(eps, 0.3);
    if (opt.tol <= 0.0 || opt.max_iter < 1) throw ValidationError("outer_fixed_point requires tol > 0, max_iter >= 1");
    const LinearizedOperator op = make_linearized_operator(eps, g);
    const std::size_t n = g.size();

    FixedPointResult res;
    FixedPointReport& rep = res.report;
    RealField2D phi(g, Symmetry::odd_x_even_y);
    RealField2D f2(g, Symmetry::even_x_even_y);
    detail::AndersonMixer mixer(opt.anderson_depth);
    for (int it = 1; it <= opt.max_iter; ++it) {
        ReductionState s = make_reduction_state(eps, g, phi);
        f2 = solve_f2(s, opt.f2, &f2).f2;
        s = with_f2(std::move(s), f2);
        const RhsBundle rhs = assemble_rhs(s);
        RealField2D next = solve_linearized(op, rhs.h1, rhs.h2, opt.linear, &phi).phi;
        if (rep.mixed) {
            const Eigen::Map<const Eigen::VectorXd> x(phi.values().data(), static_cast<Eigen::Index>(n));
            const Eigen::Map<const Eigen::VectorXd> gx(next.values().data(), static_cast<Eigen::Index>(n));
            const Eigen::VectorXd mixed = mixer.next(x, gx);
            Eigen::Map<Eigen::VectorXd>(next.values().data(), static_cast<Eigen::Index>(n)) = mixed;
            symmetrize(next);
        }
        const RealField2D diff = next - phi;
        const double upd = diff.max_abs() == 0.0 ? 0.0 : norm_star_proxy(diff, eps, opt.delta);
        if (!rep.update_star_norms.empty()) {
            const double ratio = upd / rep.update_star_norms.back();
            rep.contraction_ratios.push_back(ratio);
            if (ratio > opt.mixing_threshold) rep.mixed = true;
        }
        rep.update_star_norms.push_back(upd);
        rep.iterations = it;
        phi = std::move(next);
        if (upd < opt.tol) {
            rep.converged = true;
            break;
        }
    }
    if (!rep.converged)
        throw NotConverged("outer_fixed_point: update proxy " + format_number(rep.update_star_norms.back()) +
                           " after " + std::to_string(opt.max_iter) + " iterations");

    ReductionState s = make_reduction_state(eps, g, phi);
    f2 = solve_f2(s, opt.f2, &f2).f2;
    res.state = with_f2(std::move(s), std::move(f2));
    rep.final_phi_star = phi.max_abs() == 0.0 ? 0.0 : norm_star_proxy(phi, eps, opt.delta);
    return res;
}

}  // namespace transonic
