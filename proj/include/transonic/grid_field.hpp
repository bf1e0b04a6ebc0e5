#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace transonic {

using cplx = std::complex<double>;

// Periodic box [-Lx, Lx) x [-Ly, Ly) sampled at nx x ny nodes.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double Lx = 0.0;
    double Ly = 0.0;

    double dx() const { return 2.0 * Lx / nx; }
    double dy() const { return 2.0 * Ly / ny; }
    double x(int j) const { return -Lx + j * dx(); }
    double y(int k) const { return -Ly + k * dy(); }
    // Signed wavenumbers in standard periodic ordering.
    double kx(int j) const;
    double ky(int k) const;
    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t index(int j, int k) const { return static_cast<std::size_t>(k) * nx + j; }
    // Half-spectrum (r2c) width.
    int nxh() const { return nx / 2 + 1; }
    std::size_t spectral_size() const { return static_cast<std::size_t>(ny) * nxh(); }
    // Index of the node mirrored through the origin along x / y.
    int mirror_x(int j) const { return (nx - j) % nx; }
    int mirror_y(int k) const { return (ny - k) % ny; }

    bool operator==(const Grid2D&) const = default;
};

Grid2D make_grid(int nx, int ny, double Lx, double Ly);

enum class Parity { even, odd, none };

enum class Symmetry { none, odd_x_even_y, even_x_even_y, odd_x_odd_y, even_x_odd_y };

Parity x_parity(Symmetry s);
Parity y_parity(Symmetry s);
Symmetry make_symmetry(Parity px, Parity py);
Symmetry differentiated(Symmetry s, int m, int n);
Symmetry product_symmetry(Symmetry a, Symmetry b);
Symmetry sum_symmetry(Symmetry a, Symmetry b);
std::string_view to_string(Symmetry s);
Symmetry symmetry_from_string(std::string_view s);

class RealField2D {
public:
    RealField2D() = default;
    explicit RealField2D(const Grid2D& g, Symmetry s = Symmetry::none);
    RealField2D(const Grid2D& g, std::vector<double> values, Symmetry s);

    const Grid2D& grid() const { return grid_; }
    Symmetry symmetry() const { return sym_; }
    void set_symmetry(Symmetry s) { sym_ = s; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }
    double operator()(int j, int k) const { return values_[grid_.index(j, k)]; }
    double& operator()(int j, int k) { return values_[grid_.index(j, k)]; }
    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    double max_abs() const;

    RealField2D& operator+=(const RealField2D& o);
    RealField2D& operator-=(const RealField2D& o);
    RealField2D& operator*=(double s);

private:
    Grid2D grid_{};
    std::vector<double> values_;
    Symmetry sym_ = Symmetry::none;
};

RealField2D operator+(RealField2D a, const RealField2D& b);
RealField2D operator-(RealField2D a, const RealField2D& b);
RealField2D operator-(RealField2D a);
RealField2D operator*(RealField2D a, double s);
RealField2D operator*(double s, RealField2D a);
// Pointwise product without dealiasing.
RealField2D multiply(const RealField2D& a, const RealField2D& b);
RealField2D add_constant(RealField2D a, double c);

struct ComplexField2D {
    RealField2D re;
    RealField2D im;
    const Grid2D& grid() const { return re.grid(); }
};

// Full nx x ny coefficient array under f(x,y) = sum c_mn exp(i(xi1 x + xi2 y)),
// stored row-major with the x index fastest in FFT ordering.
struct SpectralField2D {
    Grid2D grid;
    std::vector<cplx> coefficients;
};

SpectralField2D to_spectral(const RealField2D& f);
// Throws if the imaginary residue exceeds 1e-10 of the field norm.
RealField2D to_physical(const SpectralField2D& s, Symmetry sym = Symmetry::none);

// Forward transform held once, many derivatives read from it.
class SpectralView {
public:
    explicit SpectralView(const RealField2D& f);
    const Grid2D& grid() const { return grid_; }
    Symmetry symmetry() const { return sym_; }
    // Negative m divides by (i xi1)^|m| with the xi1 = 0 column dropped.
    RealField2D derivative(int m, int n) const;
    // Multiplies by an arbitrary half-spectrum symbol.
    RealField2D apply(std::span<const cplx> symbol, Symmetry result_sym) const;
    RealField2D apply_real(std::span<const double> symbol, Symmetry result_sym) const;
    std::span<const cplx> coefficients() const { return coeff_; }

private:
    Grid2D grid_;
    Symmetry sym_;
    std::vector<cplx> coeff_;
};

RealField2D derivative(const RealField2D& f, int m, int n);

struct AntiderivativeOptions {
    double zero_mean_tol = 1e-8;
};
RealField2D antiderivative_x(const RealField2D& f, const AntiderivativeOptions& opt = {});

// Largest |line mean| / max|f| over all y-lines.
double relative_line_mean(const RealField2D& f);

RealField2D dealias(const RealField2D& f);
RealField2D product_dealiased(const RealField2D& f, const RealField2D& g);

double weighted_sup(const RealField2D& f, double p, double delta);
double l2_norm(const RealField2D& f);
double inner(const RealField2D& f, const RealField2D& g);

// Largest pointwise deviation from the tagged parity, relative to max|f|.
double symmetry_defect(const RealField2D& f);
void require_symmetry(const RealField2D& f, Symmetry expected, const char* what);
// Overwrites values with their projection onto the tagged parity class.
void symmetrize(RealField2D& f);

void require_same_grid(const Grid2D& a, const Grid2D& b);

// Source of partial derivatives; negative m requests x-antiderivatives.
class DerivativeSource {
public:
    virtual ~DerivativeSource() = default;
    virtual const Grid2D& grid() const = 0;
    virtual RealField2D derivative(int m, int n) const = 0;
};

class SpectralSource final : public DerivativeSource {
public:
    explicit SpectralSource(const RealField2D& f) : view_(f) {}
    const Grid2D& grid() const override { return view_.grid(); }
    RealField2D derivative(int m, int n) const override { return view_.derivative(m, n); }

private:
    SpectralView view_;
};

void set_threads(int n);
int thread_count();

}  // namespace transonic
