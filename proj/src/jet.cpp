#include "transonic/jet.hpp"

#include <algorithm>

#include "transonic/error.hpp"

namespace transonic {

namespace {

double binom(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

void require_compatible(const Jet& a, const Jet& b) {
    if (a.mx() < 0 || b.mx() < 0) throw ValidationError("jet is empty");
    require_same_grid(a.grid(), b.grid());
}

}  // namespace

Jet::Jet(const Grid2D& g, int mx, int my, Symmetry sym) : mx_(mx), my_(my) {
    if (mx < 0 || my < 0) throw ValidationError("jet orders must be non-negative");
    d_.reserve(static_cast<std::size_t>((mx + 1) * (my + 1)));
    for (int i = 0; i <= mx; ++i)
        for (int j = 0; j <= my; ++j) d_.emplace_back(g, differentiated(sym, i, j));
}

Jet Jet::from_source(const DerivativeSource& src, int mx, int my) {
    Jet r;
    r.mx_ = mx;
    r.my_ = my;
    for (int i = 0; i <= mx; ++i)
        for (int j = 0; j <= my; ++j) r.d_.push_back(src.derivative(i, j));
    return r;
}

Jet Jet::from_field(const RealField2D& f, int mx, int my) { return from_source(SpectralSource(f), mx, my); }

Jet Jet::dx() const {
    if (mx_ < 1) throw ValidationError("jet has no x-derivative left");
    Jet r;
    r.mx_ = mx_ - 1;
    r.my_ = my_;
    for (int i = 1; i <= mx_; ++i)
        for (int j = 0; j <= my_; ++j) r.d_.push_back((*this)(i, j));
    return r;
}

Jet Jet::dy() const {
    if (my_ < 1) throw ValidationError("jet has no y-derivative left");
    Jet r;
    r.mx_ = mx_;
    r.my_ = my_ - 1;
    for (int i = 0; i <= mx_; ++i)
        for (int j = 1; j <= my_; ++j) r.d_.push_back((*this)(i, j));
    return r;
}

Jet Jet::truncated(int mx, int my) const {
    if (mx > mx_ || my > my_ || mx < 0 || my < 0) throw ValidationError("jet truncation out of range");
    Jet r;
    r.mx_ = mx;
    r.my_ = my;
    for (int i = 0; i <= mx; ++i)
        for (int j = 0; j <= my; ++j) r.d_.push_back((*this)(i, j));
    return r;
}

Jet& Jet::operator+=(const Jet& o) {
    require_compatible(*this, o);
    *this = truncated(std::min(mx_, o.mx_), std::min(my_, o.my_));
    for (int i = 0; i <= mx_; ++i)
        for (int j = 0; j <= my_; ++j) (*this)(i, j) += o(i, j);
    return *this;
}

Jet& Jet::operator-=(const Jet& o) {
    require_compatible(*this, o);
    *this = truncated(std::min(mx_, o.mx_), std::min(my_, o.my_));
    for (int i = 0; i <= mx_; ++i)
        for (int j = 0; j <= my_; ++j) (*this)(i, j) -= o(i, j);
    return *this;
}

Jet& Jet::operator*=(double s) {
    for (auto& f : d_) f *= s;
    return *this;
}

Jet& Jet::operator+=(double c) {
    for (auto& v : d_.front().values()) v += c;
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    require_compatible(a, b);
    const int mx = std::min(a.mx(), b.mx());
    const int my = std::min(a.my(), b.my());
    const Symmetry s = product_symmetry(a.value().symmetry(), b.value().symmetry());
    Jet r(a.grid(), mx, my, s);
    const std::size_t n = a.grid().size();
    for (int i = 0; i <= mx; ++i)
        for (int j = 0; j <= my; ++j) {
            double* out = r(i, j).values().data();
            for (int p = 0; p <= i; ++p)
                for (int q = 0; q <= j; ++q) {
                    const double c = binom(i, p) * binom(j, q);
                    const double* x = a(p, q).values().data();
                    const double* y = b(i - p, j - q).values().data();
#pragma omp parallel for schedule(static)
                    for (std::size_t k = 0; k < n; ++k) out[k] += c * x[k] * y[k];
                }
        }
    return r;
}

Jet operator+(Jet a, const Jet& b) { return a += b; }
Jet operator-(Jet a, const Jet& b) { return a -= b; }
Jet operator-(Jet a) { return a *= -1.0; }
Jet operator*(Jet a, double s) { return a *= s; }
Jet operator*(double s, Jet a) { return a *= s; }
Jet operator+(Jet a, double c) { return a += c; }
Jet operator+(double c, Jet a) { return a += c; }
Jet operator-(Jet a, double c) { return a += -c; }
Jet operator-(double c, Jet a) {
    a *= -1.0;
    return a += c;
}

Jet square(const Jet& a) { return a * a; }
Jet cube(const Jet& a) { return a * a * a; }

}  // namespace transonic
