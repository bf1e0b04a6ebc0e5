#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "transonic/error.hpp"
#include "transonic/green_kernel.hpp"

using namespace transonic;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> geometric(double a, double b, int n) {
    std::vector<double> r;
    for (int i = 0; i < n; ++i) r.push_back(a * std::pow(b / a, double(i) / (n - 1)));
    return r;
}

}  // namespace

TEST_CASE("symbol_eval") {
    const auto p = make_kernel_params(KernelPreset::normalized, 0.1);
    CHECK(symbol_eval(p, 0.0, 0.0) == 0.0);
    CHECK(symbol_eval(p, 1.0, 0.0) == 2.0);
    CHECK(1.0 / symbol_eval(p, 1.0, 0.0) == 0.5);
    const auto q = make_kernel_params(KernelPreset::gp, 0.2);
    CHECK(q.a2 == doctest::Approx(2 * std::numbers::sqrt2 - 0.04).epsilon(1e-15));
    CHECK_THROWS_AS(make_kernel_params(KernelPreset::normalized, 0.0), ValidationError);
    CHECK_THROWS_AS(kernel_preset_from_string("elliptic"), ValidationError);
}

TEST_CASE("factorisation of the denominator on a random sample") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ue(0.01, 0.5);
    std::uniform_real_distribution<double> ux(-60.0, 60.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double eps = ue(rng);
        const auto r = dispersion_roots(eps);
        const double x1 = ux(rng);
        const double x2 = ux(rng) / eps;
        const cplx f = std::pow(eps, 4) * (x2 * x2 + r.a(x1)) * (x2 * x2 + r.b(x1));
        const double d = symbol_eval(r.params(), x1, x2);
        worst = std::max(worst, std::abs(f - d) / d);
    }
    CHECK(worst <= 1e-11);
}

TEST_CASE("root identities") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ue(0.01, 0.5);
    std::uniform_real_distribution<double> ux(-3.0, 3.0);
    double w1 = 0.0, w2 = 0.0, w3 = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double eps = ue(rng);
        const double xi = ux(rng) * std::pow(10.0, ux(rng)) / eps;
        const auto r = dispersion_roots(eps);
        const double e4 = std::pow(eps, 4);
        const double t = xi * xi;
        w1 = std::max(w1, std::abs(e4 * r.a(xi) * r.b(xi) - (t * t + t)) / (t * t + t));
        w2 = std::max(w2, std::abs(e4 * (r.a(xi) + r.b(xi)) - (1 + eps * eps * t)) / (1 + eps * eps * t));
        const double S = 1 + eps * eps * t;
        const double direct = S * S - 4 * e4 * (t + t * t);
        w3 = std::max(w3, std::abs(r.D2(xi) - direct) / (S * S));
    }
    CHECK(w1 <= 1e-11);
    CHECK(w2 <= 1e-11);
    CHECK(w3 <= 1e-11);
}

TEST_CASE("dispersion_roots") {
    const auto r = dispersion_roots(0.1);
    const double c2 = r.c_eps() * r.c_eps();
    const double exact = (1 - 0.02 + 2 * std::sqrt(1 - 0.01 + 1e-4)) / 0.03;
    CHECK(std::abs(c2 - exact) <= 1e-10 * exact);
    CHECK(std::abs(c2 - 99.0025) <= 5e-5);
    CHECK(std::abs(std::abs(c2 - (1 / 0.01 - 1)) - 0.0025) <= 5e-5);
    CHECK(std::abs(r.D(r.c_eps())) <= 1e-10);
    CHECK(std::abs(r.D(-r.c_eps())) <= 1e-10);
    for (double eps : {0.05, 0.2, 0.5}) {
        const auto q = dispersion_roots(eps);
        const double e2 = eps * eps;
        const double s = std::sqrt(1 - e2 + e2 * e2);
        CHECK(q.c_eps() * q.c_eps() == doctest::Approx((1 - 2 * e2 + 2 * s) / (3 * e2)).epsilon(1e-12));
        CHECK(q.d_eps() * q.d_eps() == doctest::Approx((-1 + 2 * e2 + 2 * s) / (3 * e2)).epsilon(1e-12));
        for (double f : {0.0, 0.3, 0.9, 0.999}) CHECK(q.D(f * q.c_eps()).real() > 0.0);
        CHECK(q.D2(1.001 * q.c_eps()) < 0.0);
    }
    CHECK_THROWS_AS(dispersion_roots(0.0), ValidationError);
    CHECK_THROWS_AS(dispersion_roots(0.6), ValidationError);
    const DispersionRoots g(make_kernel_params(KernelPreset::gp, 0.1));
    CHECK(std::isinf(g.c_eps()));
}

TEST_CASE("small-xi limit of M_m") {
    for (double eps : {0.05, 0.2}) {
        CHECK(m_function(eps, 1, 1e-7) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(m_function(eps, 1, -1e-7) == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(m_function(eps, 2, 0.0) == 0.0);
        CHECK(m_function(eps, 3, 0.0) == 0.0);
        CHECK(m_function(eps, 2, 1e-5) == doctest::Approx(1e-5).epsilon(1e-5));
        CHECK(m_function(eps, 3, -1e-4) == doctest::Approx(-1e-8).epsilon(1e-4));
    }
    // Against the unrationalised expression where it is well conditioned.
    const double eps = 0.3;
    const auto r = dispersion_roots(eps);
    for (double xi : {0.7, 1.5, 2.5}) {
        const double w = 1 + eps * eps * xi * xi - r.D(xi).real();
        const double den = std::numbers::sqrt2 * eps * eps * xi * xi * (1 + xi * xi) +
                           std::numbers::sqrt2 / 2 * xi * std::sqrt(1 + xi * xi) * w;
        CHECK(m_function(eps, 2, xi) == doctest::Approx(xi * xi * std::sqrt(w) / den).epsilon(1e-9));
    }
    CHECK_THROWS_AS(m_function(0.1, 1, 20.0), ValidationError);
}

TEST_CASE("kernel_fft reproduces the discrete delta") {
    const Grid2D g = make_grid(64, 32, 10, 6);
    const auto p = make_kernel_params(KernelPreset::normalized, 0.2);
    const auto K = kernel_fft(p, g, 0, 0);
    std::vector<double> sym(g.spectral_size());
    for (int k = 0; k < g.ny; ++k)
        for (int j = 0; j < g.nxh(); ++j) sym[std::size_t(k) * g.nxh() + j] = symbol_eval(p, g.kx(j), g.ky(k));
    const auto d = SpectralView(K).apply_real(sym, Symmetry::even_x_even_y);
    const double area = 4 * g.Lx * g.Ly;
    double off = 0.0;
    for (int k = 0; k < g.ny; ++k)
        for (int j = 0; j < g.nx; ++j)
            if (j != g.nx / 2 || k != g.ny / 2) off = std::max(off, std::abs(d(j, k) + 1 / area));
    CHECK(d(g.nx / 2, g.ny / 2) == doctest::Approx((double(g.size()) - 1) / area).epsilon(1e-10));
    CHECK(off <= 1e-10 * g.size() / area);
}

TEST_CASE("kernel_fft parity") {
    const Grid2D g = make_grid(128, 128, 20, 20);
    const auto p = make_kernel_params(KernelPreset::gp, 0.2);
    for (auto [m, n] : {std::pair{1, 0}, std::pair{2, 0}, std::pair{0, 1}, std::pair{1, 1}, std::pair{1, 2}}) {
        const auto K = kernel_fft(p, g, m, n);
        CHECK(K.symmetry() == differentiated(Symmetry::even_x_even_y, m, n));
        CHECK(symmetry_defect(K) <= 1e-12 * K.max_abs());
    }
    CHECK(x_parity(kernel_fft(p, g, 1, 0).symmetry()) == Parity::odd);
    CHECK(y_parity(kernel_fft(p, g, 1, 0).symmetry()) == Parity::even);
    CHECK_THROWS_AS(kernel_fft(p, g, 2, 2), ValidationError);
}

TEST_CASE("model kernel closed form against its lattice sum") {
    const auto p = make_kernel_params(KernelPreset::gp, 0.1);
    const Grid2D g = make_grid(1024, 1024, 160, 160);
    const double sigma = 0.5;
    for (auto [m, n] : {std::pair{1, 1}, std::pair{3, 0}, std::pair{1, 2}}) {
        double s = 0.0;
        const double x = 3.0, y = 2.0;
        for (int k = 0; k < g.ny; ++k)
            for (int j = 0; j < g.nx; ++j) {
                if ((j == 0 && k == 0) || j == g.nx / 2 || k == g.ny / 2) continue;
                const double k1 = g.kx(j), k2 = g.ky(k);
                const double Q = p.a2 * k1 * k1 + p.b2 * k2 * k2;
                const cplx v = std::exp(-sigma * Q) / Q * std::pow(cplx{0, 1}, m + n) * std::pow(k1, m) * std::pow(k2, n);
                s += std::real(v * std::polar(1.0, k1 * x + k2 * y)) / (4 * g.Lx * g.Ly);
            }
        INFO("m=" << m << " n=" << n);
        CHECK(rel(s, kernel_model_eval(p, m, n, x, y, sigma)) <= 1e-4);
    }
}

TEST_CASE("residue route against Fourier inversion at (3,2)") {
    const Grid2D g = make_grid(2048, 4096, 64, 64);
    KernelFftOptions o;
    o.subtract_model = true;
    o.window_xi = 0.6 * g.nx * std::numbers::pi / (2 * g.Lx);
    const int j = int(std::lround((3.0 + g.Lx) / g.dx()));
    const int k = int(std::lround((2.0 + g.Ly) / g.dy()));
    REQUIRE(g.x(j) == 3.0);
    REQUIRE(g.y(k) == 2.0);
    const auto p = make_kernel_params(KernelPreset::normalized, 0.2);
    for (auto [m, n] : {std::pair{1, 0}, std::pair{2, 0}, std::pair{0, 2}, std::pair{1, 2}}) {
        const double f = kernel_fft(p, g, m, n, o)(j, k);
        const double r = kernel_residue_eval(p, m, n, 3.0, 2.0);
        INFO("m=" << m << " n=" << n << " fft " << f << " residue " << r);
        CHECK(rel(f, r) <= 1e-4);
        CHECK(rel(kernel_fft_point(p, g, m, n, 3.0, 2.0, o), f) <= 1e-10);
    }
}

TEST_CASE("kernel_residue_eval parity and errors") {
    const auto p = make_kernel_params(KernelPreset::normalized, 0.2);
    for (auto [x, y] : {std::pair{2.0, 1.0}, std::pair{0.3, 4.0}, std::pair{6.0, 0.0}}) {
        CHECK(rel(kernel_residue_eval(p, 2, 0, -x, y), kernel_residue_eval(p, 2, 0, x, y)) <= 1e-12);
        CHECK(rel(kernel_residue_eval(p, 1, 0, -x, y), -kernel_residue_eval(p, 1, 0, x, y)) <= 1e-12);
        CHECK(rel(kernel_residue_eval(p, 1, 2, x, -y), kernel_residue_eval(p, 1, 2, x, y)) <= 1e-12);
        if (y != 0.0) CHECK(rel(kernel_residue_eval(p, 0, 1, x, -y), -kernel_residue_eval(p, 0, 1, x, y)) <= 1e-12);
    }
    CHECK(kernel_residue_eval(p, 0, 1, 3.0, 0.0) == 0.0);
    CHECK_THROWS_AS(kernel_residue_eval(p, 1, 0, 0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(kernel_residue_eval(p, 0, 0, 1.0, 0.0), ValidationError);
    ResidueOptions strict;
    strict.quad_tol = 1e-30;
    strict.max_depth = 1;
    CHECK_THROWS_AS(kernel_residue_eval(p, 1, 0, 3.0, 0.2, strict), QuadratureNotConverged);
}

TEST_CASE("axis asymptote of the y = 0 integrand") {
    for (auto preset : {KernelPreset::normalized, KernelPreset::gp})
        for (auto [m, n] : {std::pair{3, 0}, std::pair{1, 2}}) {
            const auto p = make_kernel_params(preset, 0.1);
            CHECK(rel(kernel_axis_integrand(p, m, n, 1e6), kernel_axis_asymptote(p, m, n)) <= 1e-9);
        }
}

TEST_CASE("axis values join the off-axis values continuously") {
    const auto p = make_kernel_params(KernelPreset::normalized, 0.2);
    for (auto [m, n] : {std::pair{3, 0}, std::pair{1, 2}, std::pair{2, 0}}) {
        const double a = kernel_residue_eval(p, m, n, 4.0, 0.0);
        const double b = kernel_residue_eval(p, m, n, 4.0, 1e-6);
        INFO("m=" << m << " n=" << n);
        CHECK(rel(b, a) <= 1e-4);
    }
}

TEST_CASE("(1,0) on the axis is bounded by the fitted far-field constant") {
    const auto p = make_kernel_params(KernelPreset::normalized, 0.2);
    const double v = kernel_residue_eval(p, 1, 0, 5.0, 0.0);
    CHECK(std::isfinite(v));
    const auto r = decay_scan(p, 1, 0, geometric(2, 20, 8), {0, 15, 45, 75});
    CHECK(std::abs(5.0 * v) <= r.max_prefactor);
}

TEST_CASE("decay_scan far-field exponents") {
    const auto p = make_kernel_params(KernelPreset::normalized, 0.2);
    const std::vector<double> rays{15, 45, 75};
    const auto radii = geometric(5, 80, 10);
    const auto s20 = decay_scan(p, 2, 0, radii, rays, 160);
    CHECK(s20.bound_slope == -1.5);
    for (double s : s20.fitted_slope_per_ray) CHECK(s <= -1.35);
    const auto s10 = decay_scan(p, 1, 0, radii, rays, 160);
    CHECK(s10.bound_slope == -1.0);
    for (double s : s10.fitted_slope_per_ray) {
        CHECK(s >= -1.25);
        CHECK(s <= -0.9);
    }
}

TEST_CASE("decay_scan (0,2) prefactor against eps^{-3/2}") {
    const auto radii = geometric(2, 80, 10);
    const std::vector<double> rays{15, 45, 75};
    const double a = decay_scan(make_kernel_params(KernelPreset::gp, 0.1), 0, 2, radii, rays, 160).max_prefactor;
    const double b = decay_scan(make_kernel_params(KernelPreset::gp, 0.2), 0, 2, radii, rays, 160).max_prefactor;
    const double target = std::pow(2.0, 1.5);
    MESSAGE("prefactor ratio " << a / b);
    CHECK(a / b >= target / 4);
    CHECK(a / b <= target * 4);
}

TEST_CASE("decay_scan input validation") {
    const auto p = make_kernel_params(KernelPreset::normalized, 0.2);
    CHECK_THROWS_AS(decay_scan(p, 1, 0, {1.0, 4.0}, {15}), ValidationError);
    CHECK_THROWS_AS(decay_scan(p, 1, 0, {4.0, 30.0}, {15}), ValidationError);
    CHECK_THROWS_AS(decay_scan(p, 1, 0, {4.0, 3.0}, {15}), ValidationError);
    CHECK_THROWS_AS(decay_scan(p, 1, 0, {0.01, 1.0}, {15}, 40, ScanMode::near), ValidationError);
    const auto near = decay_scan(p, 1, 0, geometric(1e-3, 0.5, 6), {30, 60}, 40, ScanMode::near);
    CHECK(near.values.size() == 2);
    CHECK(near.values[0].size() == 6);
}

TEST_CASE("integral_scan") {
    const auto p = make_kernel_params(KernelPreset::gp, 0.2);
    double prev = 0.0;
    double lo = 1e300, hi = 0.0;
    for (double r : {0.25, 1.0, 4.0}) {
        const double v = integral_scan(p, 1, 0, r);
        CHECK(v > prev);
        prev = v;
        if (r >= 1.0) {
            lo = std::min(lo, v / r);
            hi = std::max(hi, v / r);
        }
    }
    CHECK(hi / lo < 3.0);
    const double a = integral_scan(p, 1, 1, 1.0);
    const double b = integral_scan(p, 1, 1, 4.0);
    CHECK(b / 2.0 < 2.0 * a);
    CHECK_THROWS_AS(integral_scan(p, 1, 0, 30.0), ValidationError);
}
