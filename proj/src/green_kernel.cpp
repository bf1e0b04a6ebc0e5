#include "transonic/green_kernel.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "transonic/error.hpp"

namespace transonic {
namespace {

using std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

cplx i_pow(int m) {
    switch (((m % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

double real_pow(double x, int m) {
    double r = 1.0;
    for (int i = 0; i < m; ++i) r *= x;
    return r;
}

void require_params(const KernelSymbolParams& p) {
    if (!(p.eps > 0.0) || !(p.a4 > 0.0) || !(p.a2 > 0.0) || !(p.b2 > 0.0) || !(p.g > 0.0) || !(p.d4 > 0.0))
        throw ValidationError("kernel symbol coefficients and epsilon must be positive");
}

void require_order(int m, int n, bool allow_zero) {
    if (!kernel_order_supported(m, n)) {
        std::ostringstream s;
        s << "unsupported kernel derivative order (" << m << "," << n << ")";
        throw ValidationError(s.str());
    }
    if (!allow_zero && m + n == 0) throw ValidationError("kernel order (0,0) is only available on the grid");
}

// (e^z - 1)/z.
cplx expm1_ratio(cplx z) {
    if (std::abs(z) < 0.5) {
        cplx term = 1.0;
        cplx sum = 1.0;
        for (int k = 1; k < 20; ++k) {
            term *= z / double(k + 1);
            sum += term;
        }
        return sum;
    }
    return (std::exp(z) - 1.0) / z;
}

struct RootPair {
    cplx a;
    cplx b;
    cplx D;
};

RootPair roots_at(const KernelSymbolParams& p, cplx z) {
    const double e2 = p.eps * p.eps;
    const double lead = p.d4 * e2 * e2;
    const cplx z2 = z * z;
    const cplx S = p.b2 + p.g * e2 * z2;
    const cplx P = p.a4 * z2 * z2 + p.a2 * z2;
    const cplx D = std::sqrt(S * S - 4.0 * lead * P);
    if (std::abs(S - D) < std::abs(S + D)) return {2.0 * P / (S + D), (S + D) / (2.0 * lead), D};
    return {(S - D) / (2.0 * lead), 2.0 * P / (S - D), D};
}

// xi^m times the y-integral of (i xi2)^n e^{i y xi2} / denominator, continued analytically in xi.
class ResidueIntegrand {
public:
    ResidueIntegrand(const KernelSymbolParams& p, int m, int n, double y) : p_(p), m_(m), n_(n), y_(y) {
        lead_ = p.d4 * std::pow(p.eps, 4);
    }

    cplx operator()(cplx z) const {
        const auto [a, b, D] = roots_at(p_, z);
        const cplx u = std::sqrt(a);
        const cplx v = std::sqrt(b);
        const cplx s = u + v;
        const cplx d = (-D / lead_) / s;
        // (u^k e^{-uy} - v^k e^{-vy}) / (u - v) with k = n - 1.
        cplx ck;
        cplx uk;
        cplx vk;
        switch (n_ - 1) {
            case -1: ck = -1.0 / (u * v); uk = 1.0 / u; vk = 1.0 / v; break;
            case 0: ck = 0.0; uk = 1.0; vk = 1.0; break;
            case 1: ck = 1.0; uk = u; vk = v; break;
            default: ck = s; uk = u * u; vk = v * v; break;
        }
        cplx bracket;
        if (y_ == 0.0)
            bracket = ck;
        else if (std::abs(d) * y_ >= 1.0)
            bracket = (uk * std::exp(-u * y_) - vk * std::exp(-v * y_)) / d;
        else
            bracket = ck * std::exp(-u * y_) + vk * std::exp(-v * y_) * (-y_) * expm1_ratio(-d * y_);
        const double sign = (n_ % 2 == 1) ? -1.0 : 1.0;
        const cplx inner = -pi / lead_ * sign * bracket / s;
        cplx zm = 1.0;
        for (int i = 0; i < m_; ++i) zm *= z;
        return inner * zm;
    }

    // Smallest real part of the two square roots, the exponential decay rate in y.
    double decay_rate(double xi) const {
        const auto r = roots_at(p_, cplx{xi, 0.0});
        return std::min(std::sqrt(r.a).real(), std::sqrt(r.b).real());
    }

private:
    KernelSymbolParams p_;
    int m_;
    int n_;
    double y_;
    double lead_;
};

double natural_scale(const KernelSymbolParams& p) {
    const DispersionRoots r(p);
    return std::isfinite(r.c_eps()) ? r.c_eps() : 1.0 / p.eps;
}

double sigma_inf(const KernelSymbolParams& p) {
    return std::sqrt(p.g / p.d4 + 2.0 * std::sqrt(p.a4 / p.d4));
}

// Re of the integral of H e^{i x xi} over [T, inf), by repeated integration by parts with
// derivatives of H taken from Cauchy's formula on a circle of radius T/4.
template <class F>
bool ibp_tail(const F& H, double T, double x, double& out) {
    constexpr int N = 64;
    const double rho = T / 4.0;
    std::array<cplx, N> samples;
    for (int j = 0; j < N; ++j) samples[j] = H(T + rho * std::polar(1.0, 2.0 * pi * j / N));
    const cplx ix{0.0, x};
    cplx sum = 0.0;
    double prev = inf;
    double fact = 1.0;
    for (int k = 0; k < 40; ++k) {
        if (k > 0) fact *= k;
        cplx c = 0.0;
        for (int j = 0; j < N; ++j) c += samples[j] * std::polar(1.0, -2.0 * pi * j * k / N);
        const cplx deriv = c / double(N) * fact / std::pow(rho, k);
        const cplx term = ((k % 2) ? -1.0 : 1.0) * deriv / std::pow(ix, k + 1);
        sum += term;
        const double t = std::abs(term);
        if (t <= 1e-16 * std::abs(sum) || t == 0.0) {
            out = std::real(-std::exp(ix * T) * sum);
            return true;
        }
        if (t > prev) return false;
        prev = t;
    }
    return false;
}

}  // namespace

KernelSymbolParams make_kernel_params(KernelPreset preset, double eps) {
    KernelSymbolParams p;
    p.eps = eps;
    p.preset = preset;
    if (preset == KernelPreset::gp) {
        p.a2 = 2.0 * std::numbers::sqrt2 - eps * eps;
        p.b2 = 2.0;
        p.g = 2.0;
    }
    require_params(p);
    return p;
}

KernelPreset kernel_preset_from_string(const std::string& s) {
    if (s == "normalized") return KernelPreset::normalized;
    if (s == "gp") return KernelPreset::gp;
    throw ValidationError("unknown kernel preset: " + s);
}

std::string to_string(KernelPreset p) { return p == KernelPreset::gp ? "gp" : "normalized"; }

double symbol_eval(const KernelSymbolParams& p, double xi1, double xi2) {
    const double e2 = p.eps * p.eps;
    const double s1 = xi1 * xi1;
    const double s2 = xi2 * xi2;
    return p.a4 * s1 * s1 + p.a2 * s1 + p.b2 * s2 + p.g * e2 * s1 * s2 + p.d4 * e2 * e2 * s2 * s2;
}

DispersionRoots::DispersionRoots(const KernelSymbolParams& p) : p_(p), c_eps_(inf), d_eps_(inf) {
    require_params(p);
    // D^2 = qa t^2 + qb t + qc in t = xi^2.
    const double e2 = p.eps * p.eps;
    const double e4 = e2 * e2;
    const double qa = (p.g * p.g - 4.0 * p.d4 * p.a4) * e4;
    const double qb = 2.0 * p.b2 * p.g * e2 - 4.0 * p.d4 * p.a2 * e4;
    const double qc = p.b2 * p.b2;
    if (std::abs(qa) <= 1e-14 * (std::abs(qb) + qc)) {
        q_lead_ = qb;
        if (qb != 0.0) t_roots_.push_back(-qc / qb);
    } else {
        q_lead_ = qa;
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
            t_roots_.push_back(q / qa);
            if (q != 0.0) t_roots_.push_back(qc / q);
        }
    }
    for (double t : t_roots_) {
        if (t > 0.0) c_eps_ = std::min(c_eps_, std::sqrt(t));
        if (t < 0.0) d_eps_ = std::min(d_eps_, std::sqrt(-t));
    }
    if (t_roots_.size() != (q_lead_ == qa ? 2u : 1u)) t_roots_.clear();
}

double DispersionRoots::D2(double xi) const {
    if (!t_roots_.empty()) {
        // Factored form, exactly zero at +-c_eps.
        double r = q_lead_;
        for (double t : t_roots_) r *= t > 0.0 ? (xi - std::sqrt(t)) * (xi + std::sqrt(t)) : xi * xi - t;
        return r;
    }
    const double e2 = p_.eps * p_.eps;
    const double t = xi * xi;
    const double S = p_.b2 + p_.g * e2 * t;
    return S * S - 4.0 * p_.d4 * e2 * e2 * (p_.a4 * t * t + p_.a2 * t);
}

cplx DispersionRoots::D(double xi) const { return std::sqrt(cplx{D2(xi), 0.0}); }

namespace {

// a is the small root on the real branch and the root with negative imaginary part beyond c_eps.
std::pair<cplx, cplx> ordered_roots(const KernelSymbolParams& p, double xi, double D2) {
    auto r = roots_at(p, cplx{xi, 0.0});
    const bool swap = D2 >= 0.0 ? std::abs(r.a) > std::abs(r.b) : r.a.imag() > r.b.imag();
    if (swap) std::swap(r.a, r.b);
    return {r.a, r.b};
}

}  // namespace

cplx DispersionRoots::a(double xi) const { return ordered_roots(p_, xi, D2(xi)).first; }

cplx DispersionRoots::b(double xi) const { return ordered_roots(p_, xi, D2(xi)).second; }

DispersionRoots dispersion_roots(double eps) {
    if (!(eps > 0.0) || eps > 0.5) throw ValidationError("epsilon out of supported range (0, 0.5]");
    return DispersionRoots(make_kernel_params(KernelPreset::normalized, eps));
}

double m_function(double eps, int m, double xi) {
    const DispersionRoots r = dispersion_roots(eps);
    if (m < 1 || m > 3) throw ValidationError("M_m is defined for m = 1, 2, 3");
    if (std::abs(xi) >= r.c_eps()) throw ValidationError("M_m requires |xi| < c_eps");
    if (xi == 0.0) return 0.0;
    // Rationalised form of xi^m sqrt(1+eps^2xi^2-D) / (...), exact for |xi| < c_eps.
    const double e2 = eps * eps;
    const double t = xi * xi;
    const double SD = 1.0 + e2 * t + r.D(xi).real();
    const double w = std::sqrt(1.0 + t);
    const double ax = std::abs(xi);
    return std::numbers::sqrt2 * std::copysign(1.0, xi) * real_pow(xi, m - 1) /
           (std::sqrt(SD) * w * (1.0 + 2.0 * e2 * ax * w / SD));
}

bool kernel_order_supported(int m, int n) {
    static constexpr std::array<std::pair<int, int>, 9> orders{
        {{0, 0}, {1, 0}, {2, 0}, {3, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}}};
    return std::find(orders.begin(), orders.end(), std::pair{m, n}) != orders.end();
}

namespace {

struct SpectrumBuilder {
    const KernelSymbolParams& p;
    const Grid2D& g;
    int m;
    int n;
    const KernelFftOptions& opt;

    // Lattice coefficient of the (m,n) kernel minus the optional model, windowed.
    cplx value(int j, int k) const {
        if (j == 0 && k == 0) return 0.0;
        if ((m % 2 == 1 && j == g.nx / 2) || (n % 2 == 1 && k == g.ny / 2)) return 0.0;
        const double k1 = g.kx(j);
        const double k2 = g.ky(k);
        double v = 1.0 / symbol_eval(p, k1, k2);
        if (opt.subtract_model) {
            const double Q = p.a2 * k1 * k1 + p.b2 * k2 * k2;
            v -= std::exp(-opt.model_sigma * Q) / Q;
        }
        if (opt.window_xi > 0.0) v *= std::exp(-std::pow(std::hypot(k1, k2) / opt.window_xi, 8));
        return v * i_pow(m + n) * real_pow(k1, m) * real_pow(k2, n) / (4.0 * g.Lx * g.Ly);
    }
};

Symmetry kernel_symmetry(int m, int n) { return differentiated(Symmetry::even_x_even_y, m, n); }

}  // namespace

RealField2D kernel_fft(const KernelSymbolParams& p, const Grid2D& g, int m, int n, const KernelFftOptions& opt) {
    require_params(p);
    require_order(m, n, !opt.subtract_model);
    const SpectrumBuilder sb{p, g, m, n, opt};
    const int nxh = g.nxh();
    const double N = double(g.nx) * g.ny;
    std::vector<cplx> spec(g.spectral_size());
    for (int k = 0; k < g.ny; ++k)
        for (int j = 0; j < nxh; ++j) {
            // Nodes start at -L, so each mode carries the phase (-1)^{j+k}.
            const double phase = ((j + k) % 2 == 0) ? 1.0 : -1.0;
            spec[static_cast<std::size_t>(k) * nxh + j] = N * phase * sb.value(j, k);
        }
    RealField2D out(g, kernel_symmetry(m, n));
    fft::inverse(g, spec, out.values());
    if (opt.subtract_model) {
        auto v = out.values();
        for (int k = 0; k < g.ny; ++k)
            for (int j = 0; j < g.nx; ++j) {
                if (g.x(j) == 0.0 && g.y(k) == 0.0) continue;
                v[g.index(j, k)] += kernel_model_eval(p, m, n, g.x(j), g.y(k), opt.model_sigma);
            }
    }
    return out;
}

double kernel_fft_point(const KernelSymbolParams& p, const Grid2D& g, int m, int n, double x, double y,
                        const KernelFftOptions& opt) {
    require_params(p);
    require_order(m, n, !opt.subtract_model);
    const SpectrumBuilder sb{p, g, m, n, opt};
    const int nxh = g.nxh();
    std::vector<cplx> ex(nxh);
    for (int j = 0; j < nxh; ++j) ex[j] = std::polar(1.0, g.kx(j) * x);
    double sum = 0.0;
    for (int k = 0; k < g.ny; ++k) {
        const cplx ey = std::polar(1.0, g.ky(k) * y);
        for (int j = 0; j < nxh; ++j) {
            const double w = (j == 0 || 2 * j == g.nx) ? 1.0 : 2.0;
            sum += w * std::real(sb.value(j, k) * ex[j] * ey);
        }
    }
    if (opt.subtract_model && (x != 0.0 || y != 0.0)) sum += kernel_model_eval(p, m, n, x, y, opt.model_sigma);
    return sum;
}

double kernel_model_eval(const KernelSymbolParams& p, int m, int n, double x, double y, double sigma) {
    if (m + n < 1 || m + n > 3 || m < 0 || n < 0) throw ValidationError("model kernel supports 1 <= m+n <= 3");
    // H = h(x^2/a2 + y^2/b2), h'(rho) = -(1/(4 pi sqrt(a2 b2))) (1/(4 sigma)) phi1(rho/(4 sigma)),
    // phi1(u) = (1 - e^{-u})/u.
    const double A = 1.0 / p.a2;
    const double B = 1.0 / p.b2;
    const double rho = A * x * x + B * y * y;
    const double s4 = 1.0 / (4.0 * sigma);
    const double u = rho * s4;
    std::array<double, 3> phi{};
    if (u < 0.5) {
        double fact = 1.0;
        for (int k = 0; k < 25; ++k) {
            fact *= (k + 1);
            const double c = ((k % 2) ? -1.0 : 1.0) / fact;
            phi[0] += c * std::pow(u, k);
            if (k >= 1) phi[1] += c * k * std::pow(u, k - 1);
            if (k >= 2) phi[2] += c * k * (k - 1) * std::pow(u, k - 2);
        }
    } else {
        const double e = std::exp(-u);
        phi[0] = (1.0 - e) / u;
        phi[1] = e / u - (1.0 - e) / (u * u);
        phi[2] = -e / u - 2.0 * e / (u * u) + 2.0 * (1.0 - e) / (u * u * u);
    }
    const double pre = -1.0 / (4.0 * pi * std::sqrt(p.a2 * p.b2));
    // hd[k] = h^{(k)}(rho), k = 1..3.
    std::array<double, 4> hd{0.0, pre * s4 * phi[0], pre * s4 * s4 * phi[1], pre * s4 * s4 * s4 * phi[2]};
    auto coeff = [](int order, int j) {
        // order! / (j! (order - 2j)!)
        double r = 1.0;
        for (int i = 2; i <= order; ++i) r *= i;
        for (int i = 2; i <= j; ++i) r /= i;
        for (int i = 2; i <= order - 2 * j; ++i) r /= i;
        return r;
    };
    double sum = 0.0;
    for (int j = 0; 2 * j <= m; ++j)
        for (int l = 0; 2 * l <= n; ++l) {
            const int order = (m - j) + (n - l);
            if (order < 1) continue;
            sum += coeff(m, j) * real_pow(2.0 * A * x, m - 2 * j) * std::pow(A, j) * coeff(n, l) *
                   real_pow(2.0 * B * y, n - 2 * l) * std::pow(B, l) * hd[order];
        }
    return sum;
}

double kernel_axis_asymptote(const KernelSymbolParams& p, int m, int n) {
    require_params(p);
    const double S = sigma_inf(p);
    if (m == 3 && n == 0) return pi / (p.eps * S * std::sqrt(p.a4 * p.d4));
    if (m == 1 && n == 2) return -pi / (p.d4 * std::pow(p.eps, 3) * S);
    return 0.0;
}

double kernel_axis_integrand(const KernelSymbolParams& p, int m, int n, double xi) {
    require_params(p);
    require_order(m, n, false);
    return ResidueIntegrand(p, m, n, 0.0)(cplx{xi, 0.0}).real();
}

double kernel_residue_eval(const KernelSymbolParams& p, int m, int n, double x, double y, const ResidueOptions& opt) {
    require_params(p);
    require_order(m, n, false);
    if (x == 0.0 && y == 0.0) throw ValidationError("kernel is singular at the origin");
    if (!std::isfinite(x) || !std::isfinite(y)) throw ValidationError("non-finite evaluation point");
    if (y == 0.0 && n % 2 == 1) return 0.0;
    const double ysign = (y < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
    const double ya = std::abs(y);
    const ResidueIntegrand h(p, m, n, ya);
    const bool subtract = (ya == 0.0 && m + n == 3 && n % 2 == 0);
    const double c_inf = subtract ? kernel_axis_asymptote(p, m, n) : 0.0;
    const cplx im = i_pow(m);
    auto H = [&](cplx z) { return (h(z) - c_inf) * im; };
    auto g = [&](double xi) { return std::real(H(cplx{xi, 0.0}) * std::polar(1.0, x * xi)); };

    const double xs = natural_scale(p);
    double T_exp = inf;
    if (ya > 0.0) {
        T_exp = xs;
        for (int it = 0; it < 80 && ya * h.decay_rate(T_exp) < 40.0; ++it) T_exp *= 2.0;
    }
    double T_ibp = (x != 0.0) ? std::max(4.0 * xs, 400.0 / std::abs(x)) : inf;

    for (int attempt = 0; attempt < 6; ++attempt) {
        const bool use_tail = T_ibp < T_exp;
        const double T = use_tail ? T_ibp : T_exp;
        if (!std::isfinite(T)) throw QuadratureNotConverged("no finite truncation point for the residue integral");

        std::vector<double> bp{0.0};
        for (int j = 14; j >= 1; --j) {
            const double b = xs * std::ldexp(1.0, -j);
            if (b < T) bp.push_back(b);
        }
        const double osc = (x != 0.0) ? 2.0 * pi / std::abs(x) : inf;
        double cur = std::min(xs, T);
        bp.push_back(cur);
        while (cur < T) {
            cur = std::min({2.0 * cur, cur + osc, T});
            bp.push_back(cur);
        }
        bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

        double total = 0.0;
        double err = 0.0;
        double l1 = 0.0;
        for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
            double e = 0.0;
            double pl1 = 0.0;
            total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
                g, bp[i], bp[i + 1], static_cast<unsigned>(opt.max_depth), 1e-11, &e, &pl1);
            err += e;
            l1 += pl1;
        }
        if (use_tail) {
            double tail = 0.0;
            if (!ibp_tail(H, T, x, tail)) {
                T_ibp *= 2.0;
                continue;
            }
            total += tail;
        }
        if (err > opt.quad_tol * std::max(l1, 1e-300)) {
            std::ostringstream s;
            s << "residue quadrature error estimate " << err << " exceeds tolerance (L1 " << l1 << ")";
            throw QuadratureNotConverged(s.str());
        }
        if (subtract) total += c_inf * std::real(i_pow(m + 1)) / x;
        return ysign * 2.0 * total / (4.0 * pi * pi);
    }
    throw QuadratureNotConverged("integration-by-parts tail did not converge");
}

double theorem_bound_slope(int m, int n) {
    if ((m == 1 && n == 0) || (m == 0 && n == 1)) return -1.0;
    return -1.5;
}

DecayScanReport decay_scan(const KernelSymbolParams& p, int m, int n, const std::vector<double>& radii,
                           const std::vector<double>& angles_deg, double Lx, ScanMode mode) {
    require_params(p);
    require_order(m, n, false);
    if (radii.size() < 2) throw ValidationError("decay_scan needs at least two radii");
    if (angles_deg.empty()) throw ValidationError("decay_scan needs at least one ray");
    for (std::size_t i = 1; i < radii.size(); ++i)
        if (!(radii[i] > radii[i - 1])) throw ValidationError("radii must be strictly increasing");
    const double lo = mode == ScanMode::far ? 2.0 : 1e-3;
    const double hi = mode == ScanMode::far ? Lx / 2.0 : 0.5;
    if (radii.front() < lo || radii.back() > hi) {
        std::ostringstream s;
        s << "radii must lie in [" << lo << ", " << hi << "]";
        throw ValidationError(s.str());
    }

    DecayScanReport r;
    r.m = m;
    r.n = n;
    r.preset = p.preset;
    r.eps = p.eps;
    r.rays_deg = angles_deg;
    r.radii = radii;
    r.bound_slope = mode == ScanMode::far ? theorem_bound_slope(m, n) : -1.0;
    const std::size_t nr = radii.size();
    const std::size_t na = angles_deg.size();
    r.values.assign(na, std::vector<double>(nr, 0.0));
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t idx = 0; idx < na * nr; ++idx) {
        const std::size_t a = idx / nr;
        const std::size_t i = idx % nr;
        const double th = angles_deg[a] * pi / 180.0;
        try {
            r.values[a][i] = kernel_residue_eval(p, m, n, radii[i] * std::cos(th), radii[i] * std::sin(th));
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

    for (std::size_t a = 0; a < na; ++a) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < nr; ++i) {
            const double lx = std::log(radii[i]);
            const double ly = std::log(std::max(std::abs(r.values[a][i]), 1e-300));
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
        }
        const double k = double(nr);
        const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
        const double icpt = (sy - slope * sx) / k;
        r.fitted_slope_per_ray.push_back(slope);
        r.prefactor_per_ray.push_back(std::exp(icpt));
    }
    r.max_prefactor = *std::max_element(r.prefactor_per_ray.begin(), r.prefactor_per_ray.end());
    return r;
}

double integral_scan(const KernelSymbolParams& p, int m, int n, double r, double Lx) {
    require_params(p);
    require_order(m, n, false);
    if (!(r > 0.0) || r > Lx / 2.0) throw ValidationError("integral_scan radius must lie in (0, Lx/2]");
    // |K| has the parity of a product of even functions, so the disc integral is four quadrants.
    // Polar coordinates, annuli [r 2^{-k-1}, r 2^{-k}] and angular panels graded towards y = 0.
    constexpr int n_annuli = 11;
    using gl = boost::math::quadrature::gauss<double, 6>;
    std::vector<double> tb{0.0};
    for (int j = 14; j >= 1; --j) tb.push_back(0.5 * pi * std::ldexp(1.0, -j));
    tb.push_back(0.5 * pi);
    std::vector<double> annulus(n_annuli, 0.0);
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n_annuli; ++k) {
        const double r1 = r * std::ldexp(1.0, -k);
        const double r0 = 0.5 * r1;
        try {
            annulus[k] = gl::integrate(
                [&](double rho) {
                    double s = 0.0;
                    for (std::size_t t = 0; t + 1 < tb.size(); ++t)
                        s += gl::integrate(
                            [&](double th) {
                                return std::abs(kernel_residue_eval(p, m, n, rho * std::cos(th), rho * std::sin(th)));
                            },
                            tb[t], tb[t + 1]);
                    return rho * s;
                },
                r0, r1);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    double total = 0.0;
    for (double a : annulus) total += a;
    // The innermost disc scales like its radius, so it matches the last annulus.
    total += annulus.back();
    return 4.0 * total;
}

}  // namespace transonic
