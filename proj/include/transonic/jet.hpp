#pragma once

#include <vector>

#include "transonic/grid_field.hpp"

namespace transonic {

// Truncated table of partial derivatives d^i_x d^j_y f, 0 <= i <= mx, 0 <= j <= my.
// Products follow the Leibniz rule pointwise, so no product is ever differentiated spectrally.
class Jet {
public:
    Jet() = default;
    // Zero jet; every component carries the tag differentiated(sym, i, j).
    Jet(const Grid2D& g, int mx, int my, Symmetry sym);
    static Jet from_source(const DerivativeSource& src, int mx, int my);
    static Jet from_field(const RealField2D& f, int mx, int my);

    int mx() const { return mx_; }
    int my() const { return my_; }
    const Grid2D& grid() const { return d_.front().grid(); }
    const RealField2D& operator()(int i, int j) const { return d_[idx(i, j)]; }
    RealField2D& operator()(int i, int j) { return d_[idx(i, j)]; }
    const RealField2D& value() const { return d_.front(); }

    Jet dx() const;
    Jet dy() const;
    Jet truncated(int mx, int my) const;

    Jet& operator+=(const Jet& o);
    Jet& operator-=(const Jet& o);
    Jet& operator*=(double s);
    Jet& operator+=(double c);

    friend Jet operator*(const Jet& a, const Jet& b);

private:
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * (my_ + 1) + j; }
    int mx_ = -1;
    int my_ = -1;
    std::vector<RealField2D> d_;
};

Jet operator+(Jet a, const Jet& b);
Jet operator-(Jet a, const Jet& b);
Jet operator-(Jet a);
Jet operator*(Jet a, double s);
Jet operator*(double s, Jet a);
Jet operator+(Jet a, double c);
Jet operator+(double c, Jet a);
Jet operator-(Jet a, double c);
Jet operator-(double c, Jet a);
Jet square(const Jet& a);
Jet cube(const Jet& a);

}  // namespace transonic
