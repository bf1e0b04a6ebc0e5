#include "transonic/grid_field.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fft.hpp"
#include "transonic/error.hpp"

namespace transonic {
namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

int signed_index(int j, int n) { return j <= n / 2 ? j : j - n; }

cplx ipow(double k, int m) {
    // (i k)^m for m >= 0
    cplx r{1.0, 0.0};
    const cplx ik{0.0, k};
    for (int s = 0; s < m; ++s) r *= ik;
    return r;
}

Parity flip(Parity p, int times) {
    if (p == Parity::none || times % 2 == 0) return p;
    return p == Parity::even ? Parity::odd : Parity::even;
}

Parity parity_product(Parity a, Parity b) {
    if (a == Parity::none || b == Parity::none) return Parity::none;
    return a == b ? Parity::even : Parity::odd;
}

#ifndef NDEBUG
void debug_check(const RealField2D& f, const char* what) {
    if (f.symmetry() != Symmetry::none && symmetry_defect(f) > 1e-10)
        throw SymmetryViolation(std::string(what) + ": result violates its symmetry tag");
}
#else
void debug_check(const RealField2D&, const char*) {}
#endif

}  // namespace

double Grid2D::kx(int j) const { return std::numbers::pi * signed_index(j, nx) / Lx; }
double Grid2D::ky(int k) const { return std::numbers::pi * signed_index(k, ny) / Ly; }

Grid2D make_grid(int nx, int ny, double Lx, double Ly) {
    if (!is_pow2(nx) || !is_pow2(ny) || nx < 16 || ny < 16)
        throw ValidationError("grid sizes must be powers of two >= 16");
    if (!(Lx > 0.0) || !(Ly > 0.0) || !std::isfinite(Lx) || !std::isfinite(Ly))
        throw ValidationError("grid half-widths must be positive");
    return Grid2D{nx, ny, Lx, Ly};
}

Parity x_parity(Symmetry s) {
    switch (s) {
        case Symmetry::odd_x_even_y:
        case Symmetry::odd_x_odd_y: return Parity::odd;
        case Symmetry::even_x_even_y:
        case Symmetry::even_x_odd_y: return Parity::even;
        default: return Parity::none;
    }
}

Parity y_parity(Symmetry s) {
    switch (s) {
        case Symmetry::odd_x_even_y:
        case Symmetry::even_x_even_y: return Parity::even;
        case Symmetry::odd_x_odd_y:
        case Symmetry::even_x_odd_y: return Parity::odd;
        default: return Parity::none;
    }
}

Symmetry make_symmetry(Parity px, Parity py) {
    if (px == Parity::none || py == Parity::none) return Symmetry::none;
    if (px == Parity::odd) return py == Parity::even ? Symmetry::odd_x_even_y : Symmetry::odd_x_odd_y;
    return py == Parity::even ? Symmetry::even_x_even_y : Symmetry::even_x_odd_y;
}

Symmetry differentiated(Symmetry s, int m, int n) {
    return make_symmetry(flip(x_parity(s), std::abs(m)), flip(y_parity(s), std::abs(n)));
}

Symmetry product_symmetry(Symmetry a, Symmetry b) {
    return make_symmetry(parity_product(x_parity(a), x_parity(b)), parity_product(y_parity(a), y_parity(b)));
}

Symmetry sum_symmetry(Symmetry a, Symmetry b) { return a == b ? a : Symmetry::none; }

std::string_view to_string(Symmetry s) {
    switch (s) {
        case Symmetry::odd_x_even_y: return "odd_x_even_y";
        case Symmetry::even_x_even_y: return "even_x_even_y";
        case Symmetry::odd_x_odd_y: return "odd_x_odd_y";
        case Symmetry::even_x_odd_y: return "even_x_odd_y";
        default: return "none";
    }
}

Symmetry symmetry_from_string(std::string_view s) {
    for (auto v : {Symmetry::none, Symmetry::odd_x_even_y, Symmetry::even_x_even_y, Symmetry::odd_x_odd_y,
                   Symmetry::even_x_odd_y})
        if (to_string(v) == s) return v;
    throw ValidationError("unknown symmetry tag: " + std::string(s));
}

RealField2D::RealField2D(const Grid2D& g, Symmetry s) : grid_(g), values_(g.size(), 0.0), sym_(s) {}

RealField2D::RealField2D(const Grid2D& g, std::vector<double> values, Symmetry s)
    : grid_(g), values_(std::move(values)), sym_(s) {
    if (values_.size() != g.size()) throw GridMismatch("value count does not match grid");
}

double RealField2D::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

RealField2D& RealField2D::operator+=(const RealField2D& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    sym_ = sum_symmetry(sym_, o.sym_);
    return *this;
}

RealField2D& RealField2D::operator-=(const RealField2D& o) {
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    sym_ = sum_symmetry(sym_, o.sym_);
    return *this;
}

RealField2D& RealField2D::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

RealField2D operator+(RealField2D a, const RealField2D& b) { return a += b; }
RealField2D operator-(RealField2D a, const RealField2D& b) { return a -= b; }
RealField2D operator-(RealField2D a) { return a *= -1.0; }
RealField2D operator*(RealField2D a, double s) { return a *= s; }
RealField2D operator*(double s, RealField2D a) { return a *= s; }

RealField2D multiply(const RealField2D& a, const RealField2D& b) {
    require_same_grid(a.grid(), b.grid());
    RealField2D r(a.grid(), product_symmetry(a.symmetry(), b.symmetry()));
    auto av = a.values();
    auto bv = b.values();
    auto rv = r.values();
    for (std::size_t i = 0; i < rv.size(); ++i) rv[i] = av[i] * bv[i];
    return r;
}

RealField2D add_constant(RealField2D a, double c) {
    for (double& v : a.values()) v += c;
    if (c != 0.0) a.set_symmetry(make_symmetry(x_parity(a.symmetry()) == Parity::even ? Parity::even : Parity::none,
                                               y_parity(a.symmetry()) == Parity::even ? Parity::even : Parity::none));
    return a;
}

void require_same_grid(const Grid2D& a, const Grid2D& b) {
    if (!(a == b)) throw GridMismatch("fields live on different grids");
}

SpectralField2D to_spectral(const RealField2D& f) {
    const Grid2D& g = f.grid();
    std::vector<cplx> half(g.spectral_size());
    fft::forward(g, f.values(), half);
    SpectralField2D s{g, std::vector<cplx>(g.size())};
    const double norm = 1.0 / static_cast<double>(g.size());
    const int nxh = g.nxh();
    for (int k = 0; k < g.ny; ++k) {
        for (int j = 0; j < g.nx; ++j) {
            cplx c = j < nxh ? half[static_cast<std::size_t>(k) * nxh + j]
                             : std::conj(half[static_cast<std::size_t>(g.mirror_y(k)) * nxh + (g.nx - j)]);
            const double phase = ((j + k) % 2 == 0) ? 1.0 : -1.0;
            s.coefficients[g.index(j, k)] = c * (phase * norm);
        }
    }
    return s;
}

RealField2D to_physical(const SpectralField2D& s, Symmetry sym) {
    const Grid2D& g = s.grid;
    double num = 0.0;
    double den = 0.0;
    for (int k = 0; k < g.ny; ++k) {
        for (int j = 0; j < g.nx; ++j) {
            const cplx c = s.coefficients[g.index(j, k)];
            const cplx r = std::conj(s.coefficients[g.index(g.mirror_x(j), g.mirror_y(k))]);
            num += std::norm(c - r);
            den += std::norm(c);
        }
    }
    if (den > 0.0 && std::sqrt(num / den) * 0.5 > 1e-10)
        throw ValidationError("spectral field does not represent a real field");
    const int nxh = g.nxh();
    std::vector<cplx> half(g.spectral_size());
    const double scale = static_cast<double>(g.size());
    for (int k = 0; k < g.ny; ++k) {
        for (int j = 0; j < nxh; ++j) {
            const double phase = ((j + k) % 2 == 0) ? 1.0 : -1.0;
            half[static_cast<std::size_t>(k) * nxh + j] = s.coefficients[g.index(j, k)] * (phase * scale);
        }
    }
    RealField2D f(g, sym);
    fft::inverse(g, half, f.values());
    return f;
}

SpectralView::SpectralView(const RealField2D& f)
    : grid_(f.grid()), sym_(f.symmetry()), coeff_(f.grid().spectral_size()) {
    fft::forward(grid_, f.values(), coeff_);
}

RealField2D SpectralView::derivative(int m, int n) const {
    if (n < 0) throw ValidationError("negative y order is not supported");
    const Grid2D& g = grid_;
    const int nxh = g.nxh();
    std::vector<cplx> work(coeff_.size());
    const int am = std::abs(m);
    std::vector<cplx> fx(nxh);
    for (int j = 0; j < nxh; ++j) {
        const double k = g.kx(j);
        if ((am % 2 == 1 && j == g.nx / 2) || (m < 0 && j == 0)) {
            fx[j] = 0.0;
        } else {
            fx[j] = m >= 0 ? ipow(k, m) : 1.0 / ipow(k, am);
        }
    }
    for (int k = 0; k < g.ny; ++k) {
        cplx fy = (n % 2 == 1 && k == g.ny / 2) ? cplx{0.0} : ipow(g.ky(k), n);
        const std::size_t row = static_cast<std::size_t>(k) * nxh;
        for (int j = 0; j < nxh; ++j) work[row + j] = coeff_[row + j] * fx[j] * fy;
    }
    RealField2D r(g, differentiated(sym_, m, n));
    fft::inverse(g, work, r.values());
    debug_check(r, "derivative");
    return r;
}

RealField2D SpectralView::apply(std::span<const cplx> symbol, Symmetry result_sym) const {
    std::vector<cplx> work(coeff_.size());
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = coeff_[i] * symbol[i];
    RealField2D r(grid_, result_sym);
    fft::inverse(grid_, work, r.values());
    return r;
}

RealField2D SpectralView::apply_real(std::span<const double> symbol, Symmetry result_sym) const {
    std::vector<cplx> work(coeff_.size());
    for (std::size_t i = 0; i < work.size(); ++i) work[i] = coeff_[i] * symbol[i];
    RealField2D r(grid_, result_sym);
    fft::inverse(grid_, work, r.values());
    return r;
}

RealField2D derivative(const RealField2D& f, int m, int n) {
    if (m < 0 || m > 4 || n < 0 || n > 4) throw ValidationError("derivative orders must lie in [0, 4]");
    return SpectralView(f).derivative(m, n);
}

double relative_line_mean(const RealField2D& f) {
    const Grid2D& g = f.grid();
    const double scale = f.max_abs();
    if (scale == 0.0) return 0.0;
    double worst = 0.0;
    for (int k = 0; k < g.ny; ++k) {
        double s = 0.0;
        for (int j = 0; j < g.nx; ++j) s += f(j, k);
        worst = std::max(worst, std::abs(s / g.nx));
    }
    return worst / scale;
}

RealField2D antiderivative_x(const RealField2D& f, const AntiderivativeOptions& opt) {
    if (x_parity(f.symmetry()) != Parity::odd) {
        const double defect = relative_line_mean(f);
        if (defect > opt.zero_mean_tol)
            throw NonZeroMean("antiderivative_x: line mean " + format_number(defect) + " exceeds tolerance");
    }
    return SpectralView(f).derivative(-1, 0);
}

RealField2D dealias(const RealField2D& f) {
    const Grid2D& g = f.grid();
    SpectralView v(f);
    const int nxh = g.nxh();
    std::vector<double> mask(g.spectral_size(), 0.0);
    for (int k = 0; k < g.ny; ++k) {
        const int sk = std::abs(signed_index(k, g.ny));
        for (int j = 0; j < nxh; ++j)
            if (3 * j <= g.nx && 3 * sk <= g.ny) mask[static_cast<std::size_t>(k) * nxh + j] = 1.0;
    }
    return v.apply_real(mask, f.symmetry());
}

RealField2D product_dealiased(const RealField2D& f, const RealField2D& g) {
    require_same_grid(f.grid(), g.grid());
    RealField2D r = multiply(dealias(f), dealias(g));
    debug_check(r, "product_dealiased");
    return r;
}

double weighted_sup(const RealField2D& f, double p, double delta) {
    if (p < 0.0 || delta < 0.0 || delta >= 1.0) throw ValidationError("weighted_sup requires p >= 0, 0 <= delta < 1");
    const Grid2D& g = f.grid();
    const double e = p - delta;
    double m = 0.0;
    for (int k = 0; k < g.ny; ++k) {
        const double y = g.y(k);
        for (int j = 0; j < g.nx; ++j) {
            const double x = g.x(j);
            const double w = std::pow(1.0 + std::sqrt(x * x + y * y), e);
            m = std::max(m, w * std::abs(f(j, k)));
        }
    }
    return m;
}

double l2_norm(const RealField2D& f) { return std::sqrt(inner(f, f)); }

double inner(const RealField2D& f, const RealField2D& g) {
    require_same_grid(f.grid(), g.grid());
    auto a = f.values();
    auto b = g.values();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s * f.grid().dx() * f.grid().dy();
}

double symmetry_defect(const RealField2D& f) {
    const Parity px = x_parity(f.symmetry());
    const Parity py = y_parity(f.symmetry());
    if (px == Parity::none) return 0.0;
    const double scale = f.max_abs();
    if (scale == 0.0) return 0.0;
    const Grid2D& g = f.grid();
    const double sx = px == Parity::odd ? -1.0 : 1.0;
    const double sy = py == Parity::odd ? -1.0 : 1.0;
    double worst = 0.0;
    for (int k = 0; k < g.ny; ++k) {
        for (int j = 0; j < g.nx; ++j) {
            const double v = f(j, k);
            worst = std::max(worst, std::abs(v - sx * f(g.mirror_x(j), k)));
            worst = std::max(worst, std::abs(v - sy * f(j, g.mirror_y(k))));
        }
    }
    return worst / scale;
}

void require_symmetry(const RealField2D& f, Symmetry expected, const char* what) {
    if (f.symmetry() != expected)
        throw SymmetryViolation(std::string(what) + ": expected tag " + std::string(to_string(expected)) + ", got " +
                                std::string(to_string(f.symmetry())));
    if (symmetry_defect(f) > 1e-10)
        throw SymmetryViolation(std::string(what) + ": values violate tag " + std::string(to_string(expected)));
}

void symmetrize(RealField2D& f) {
    const Parity px = x_parity(f.symmetry());
    const Parity py = y_parity(f.symmetry());
    if (px == Parity::none) return;
    const Grid2D& g = f.grid();
    const double sx = px == Parity::odd ? -1.0 : 1.0;
    const double sy = py == Parity::odd ? -1.0 : 1.0;
    RealField2D src = f;
    for (int k = 0; k < g.ny; ++k) {
        for (int j = 0; j < g.nx; ++j) {
            const int jm = g.mirror_x(j);
            const int km = g.mirror_y(k);
            // Mirror pairs are summed first so the result is exactly symmetric in floating point.
            f(j, k) = 0.25 * ((src(j, k) + sx * src(jm, k)) + sy * (src(j, km) + sx * src(jm, km)));
        }
    }
}

void set_threads(int n) {
    if (n > 0) omp_set_num_threads(n);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace transonic
