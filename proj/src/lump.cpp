#include "transonic/lump.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <tuple>

#include "transonic/error.hpp"

namespace transonic {

namespace {
constexpr double sqrt2 = std::numbers::sqrt2;
}

LumpParams make_lump_params(double eps, double eps_max) {
    if (!(eps >= 0.0) || !(eps < eps_max) || !std::isfinite(eps))
        throw ValidationError("epsilon out of supported range");
    const double s = 2.0 * sqrt2 - eps * eps;
    LumpParams p;
    p.eps = eps;
    p.A = std::pow(2.0 * sqrt2 / s, 2) * std::sqrt(8.0 - 2.0 * sqrt2 * eps * eps);
    p.B = s / (2.0 * sqrt2);
    p.C = s * s / (4.0 * sqrt2);
    p.E = 3.0 / (2.0 * sqrt2);
    return p;
}

double lump_nonlinear_coeff(double eps) {
    return 3.0 * sqrt2 * std::pow((2.0 * sqrt2 - eps * eps) / (2.0 * sqrt2), 2.5);
}

double lump_alpha(double eps) { return 2.0 * sqrt2 - eps * eps; }

LumpDerivatives::LumpDerivatives(const LumpParams& p, int max_order)
    : p_(p), max_order_(max_order), table_(static_cast<std::size_t>((max_order + 1) * (max_order + 1))) {
    using Key = std::tuple<int, int, int>;
    auto compact = [](const std::map<Key, double>& acc) {
        std::vector<Term> out;
        for (const auto& [key, c] : acc)
            if (c != 0.0) out.push_back({c, std::get<0>(key), std::get<1>(key), std::get<2>(key)});
        return out;
    };
    auto dx = [&](const std::vector<Term>& in) {
        std::map<Key, double> acc;
        for (const Term& t : in) {
            if (t.a > 0) acc[{t.a - 1, t.b, t.k}] += t.c * t.a;
            acc[{t.a + 1, t.b, t.k + 1}] -= t.c * t.k * 2.0 * p_.B;
        }
        return compact(acc);
    };
    auto dy = [&](const std::vector<Term>& in) {
        std::map<Key, double> acc;
        for (const Term& t : in) {
            if (t.b > 0) acc[{t.a, t.b - 1, t.k}] += t.c * t.b;
            acc[{t.a, t.b + 1, t.k + 1}] -= t.c * t.k * 2.0 * p_.C;
        }
        return compact(acc);
    };
    const int w = max_order + 1;
    table_[0] = {Term{-p_.A, 1, 0, 1}};
    for (int m = 0; m <= max_order; ++m) {
        if (m > 0) table_[static_cast<std::size_t>(m * w)] = dx(table_[static_cast<std::size_t>((m - 1) * w)]);
        for (int n = 1; m + n <= max_order; ++n)
            table_[static_cast<std::size_t>(m * w + n)] = dy(table_[static_cast<std::size_t>(m * w + n - 1)]);
    }
}

double LumpDerivatives::operator()(int m, int n, double x, double y) const {
    if (m < 0 || n < 0 || m + n > max_order_) throw ValidationError("lump derivative order out of range");
    const auto& terms = table_[static_cast<std::size_t>(m * (max_order_ + 1) + n)];
    const double iq = 1.0 / (p_.B * x * x + p_.C * y * y + p_.E);
    double s = 0.0;
    for (const Term& t : terms) {
        double v = t.c;
        for (int i = 0; i < t.a; ++i) v *= x;
        for (int i = 0; i < t.b; ++i) v *= y;
        for (int i = 0; i < t.k; ++i) v *= iq;
        s += v;
    }
    return s;
}

double lump_eval(const LumpParams& p, double x, double y) {
    return -p.A * x / (p.B * x * x + p.C * y * y + p.E);
}

double lump_derivative(const LumpParams& p, int m, int n, double x, double y) {
    if (m < 0 || n < 0 || m + n > 5) throw ValidationError("lump derivative order must satisfy 0 <= m + n <= 5");
    thread_local std::unique_ptr<LumpDerivatives> cached;
    if (!cached || cached->params().eps != p.eps || cached->params().A != p.A || cached->params().B != p.B ||
        cached->params().C != p.C || cached->params().E != p.E)
        cached = std::make_unique<LumpDerivatives>(p, 5);
    return (*cached)(m, n, x, y);
}

Symmetry lump_symmetry(int m, int n) { return differentiated(Symmetry::odd_x_even_y, m, n); }

RealField2D sample_lump(const LumpDerivatives& d, const Grid2D& g, int m, int n, SeamPolicy seam) {
    const Symmetry sym = lump_symmetry(m, n);
    RealField2D f(g, sym);
    for (int k = 0; k < g.ny; ++k) {
        const double y = g.y(k);
        for (int j = 0; j < g.nx; ++j) f(j, k) = d(m, n, g.x(j), y);
    }
    if (seam == SeamPolicy::periodic) {
        if (x_parity(sym) == Parity::odd)
            for (int k = 0; k < g.ny; ++k) f(0, k) = 0.0;
        if (y_parity(sym) == Parity::odd)
            for (int j = 0; j < g.nx; ++j) f(j, 0) = 0.0;
    }
    return f;
}

RealField2D kpi_residual(const LumpParams& p, const Grid2D& g, std::optional<double> kappa) {
    const LumpDerivatives d(p, 5);
    const double alpha = lump_alpha(p.eps);
    const double kap = kappa.value_or(lump_nonlinear_coeff(p.eps));
    RealField2D r(g, Symmetry::odd_x_even_y);
    for (int k = 0; k < g.ny; ++k) {
        const double y = g.y(k);
        for (int j = 0; j < g.nx; ++j) {
            const double x = g.x(j);
            const double qx = d(1, 0, x, y);
            const double qxx = d(2, 0, x, y);
            r(j, k) = d(4, 0, x, y) - alpha * qxx - kap * 2.0 * qx * qxx - 2.0 * d(0, 2, x, y);
        }
    }
    return r;
}

std::pair<RealField2D, RealField2D> lump_kernel_fields(const LumpParams& p, const Grid2D& g) {
    const LumpDerivatives d(p, 1);
    return {sample_lump(d, g, 1, 0), sample_lump(d, g, 0, 1)};
}

LumpSource::LumpSource(const LumpParams& p, const Grid2D& g, int base_m, int base_n)
    : d_(p, 8), grid_(g), base_m_(base_m), base_n_(base_n) {}

RealField2D LumpSource::derivative(int m, int n) const {
    const int mm = base_m_ + m;
    const int nn = base_n_ + n;
    if (mm < 0 || nn < 0) throw ValidationError("lump source cannot integrate below q");
    return sample_lump(d_, grid_, mm, nn, SeamPolicy::pointwise);
}

}  // namespace transonic
