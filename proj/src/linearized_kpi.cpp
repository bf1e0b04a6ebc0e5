#include "transonic/linearized_kpi.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "anderson.hpp"
#include "transonic/error.hpp"

namespace transonic {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;

template <class F>
std::vector<double> half_symbol(const Grid2D& g, F&& f) {
    const int nxh = g.nxh();
    std::vector<double> s(g.spectral_size());
    for (int k = 0; k < g.ny; ++k)
        for (int j = 0; j < nxh; ++j) s[static_cast<std::size_t>(k) * nxh + j] = f(g.kx(j), g.ky(k));
    return s;
}

std::vector<double> dealias_mask(const Grid2D& g, bool drop_mean) {
    const int nxh = g.nxh();
    std::vector<double> m(g.spectral_size(), 0.0);
    for (int k = 0; k < g.ny; ++k) {
        const int sk = k <= g.ny / 2 ? k : g.ny - k;
        for (int j = drop_mean ? 1 : 0; j < nxh; ++j)
            if (3 * j <= g.nx && 3 * sk <= g.ny) m[static_cast<std::size_t>(k) * nxh + j] = 1.0;
    }
    return m;
}

void remove_line_means(RealField2D& f) {
    const Grid2D& g = f.grid();
    for (int k = 0; k < g.ny; ++k) {
        double s = 0.0;
        for (int j = 0; j < g.nx; ++j) s += f(j, k);
        s /= g.nx;
        for (int j = 0; j < g.nx; ++j) f(j, k) -= s;
    }
}

void require_zero_mean(const RealField2D& f, const char* what) {
    const double m = relative_line_mean(f);
    if (m > 1e-8) throw NonZeroMean(std::string(what) + ": relative line mean " + format_number(m));
}

void check_operator_grid(const LinearizedOperator& op, const Grid2D& g) { require_same_grid(op.grid, g); }

RealField2D coupling(const LinearizedOperator& op, const RealField2D& f) {
    return coupled_product(op.qx_dealiased, f);
}

}  // namespace

double linearized_coeff_nl(double eps) { return 6.0 * (sqrt2 - eps * eps); }

double linearized_coeff_lump_nl(double eps) { return 2.0 * lump_nonlinear_coeff(eps); }

LinearizedOperator make_linearized_operator(double eps, const Grid2D& g) {
    LinearizedOperator op;
    op.eps = eps;
    op.grid = g;
    op.lump = make_lump_params(eps);
    const LumpDerivatives d(op.lump, 1);
    op.q = sample_lump(d, g, 0, 0);
    op.qx = sample_lump(d, g, 1, 0);
    op.qx_dealiased = dealias(op.qx);
    op.coeff_nl = linearized_coeff_nl(eps);
    op.coeff_lump_nl = linearized_coeff_lump_nl(eps);
    op.Lambda = op.coeff_lump_nl - op.coeff_nl;
    return op;
}

RealField2D coupled_product(const RealField2D& a_dealiased, const RealField2D& b) {
    return dealias(multiply(a_dealiased, dealias(b)));
}

double linearized_symbol(double eps, double xi1, double xi2) {
    const double e2 = eps * eps;
    const double a = xi1 * xi1;
    const double b = xi2 * xi2;
    return a * a + (2.0 * sqrt2 - e2) * a + 2.0 * b + 2.0 * e2 * a * b + e2 * e2 * b * b;
}

RealField2D apply_linearized(const LinearizedOperator& op, const RealField2D& phi) {
    check_operator_grid(op, phi.grid());
    require_symmetry(phi, Symmetry::odd_x_even_y, "apply_linearized");
    const SpectralView v(phi);
    const double eps = op.eps;
    RealField2D r = v.apply_real(half_symbol(op.grid, [eps](double a, double b) { return linearized_symbol(eps, a, b); }),
                                 Symmetry::odd_x_even_y);
    if (op.q_coupling) r -= op.coeff_nl * derivative(coupling(op, v.derivative(1, 0)), 1, 0);
    r.set_symmetry(Symmetry::odd_x_even_y);
    return r;
}

RealField2D apply_lump_linearization(const LinearizedOperator& op, const RealField2D& phi) {
    check_operator_grid(op, phi.grid());
    const SpectralView v(phi);
    const double alpha = lump_alpha(op.eps);
    RealField2D r = v.apply_real(
        half_symbol(op.grid, [alpha](double a, double b) { return a * a * a * a + alpha * a * a + 2.0 * b * b; }),
        phi.symmetry());
    if (op.q_coupling) r -= op.coeff_lump_nl * derivative(coupling(op, v.derivative(1, 0)), 1, 0);
    r.set_symmetry(phi.symmetry());
    return r;
}

RealField2D apply_lump_linearization(const LinearizedOperator& op, const DerivativeSource& src) {
    check_operator_grid(op, src.grid());
    const double alpha = lump_alpha(op.eps);
    RealField2D r = src.derivative(4, 0) - alpha * src.derivative(2, 0) - 2.0 * src.derivative(0, 2);
    if (op.q_coupling) {
        const LumpDerivatives d(op.lump, 2);
        const RealField2D qx = sample_lump(d, op.grid, 1, 0, SeamPolicy::pointwise);
        const RealField2D qxx = sample_lump(d, op.grid, 2, 0, SeamPolicy::pointwise);
        const RealField2D px = src.derivative(1, 0);
        const RealField2D pxx = src.derivative(2, 0);
        r -= op.coeff_lump_nl * (multiply(qxx, px) + multiply(qx, pxx));
    }
    return r;
}

SolveReport solve_linearized(const LinearizedOperator& op, const RealField2D& h1, const RealField2D& h2,
                             const SolveOptions& opt, const RealField2D* initial) {
    check_operator_grid(op, h1.grid());
    check_operator_grid(op, h2.grid());
    require_symmetry(h1, Symmetry::even_x_even_y, "solve_linearized h1");
    require_symmetry(h2, Symmetry::odd_x_odd_y, "solve_linearized h2");
    if (opt.tol <= 0.0 || opt.max_iter < 1 || opt.anderson_depth < 0)
        throw ValidationError("solve_linearized requires tol > 0, max_iter >= 1, anderson_depth >= 0");

    const Grid2D& g = op.grid;
    const double eps = op.eps;
    const auto sym = half_symbol(g, [eps](double a, double b) { return linearized_symbol(eps, a, b); });
    std::vector<double> inv(sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) inv[i] = sym[i] > 0.0 ? 1.0 / sym[i] : 0.0;

    RealField2D rhs = derivative(h1, 1, 0) + derivative(h2, 0, 1);
    rhs.set_symmetry(Symmetry::odd_x_even_y);
    symmetrize(rhs);
    const double rhs_norm = l2_norm(rhs);

    SolveReport rep;
    rep.phi = RealField2D(g, Symmetry::odd_x_even_y);
    if (rhs_norm == 0.0) return rep;

    auto fixed_map = [&](const RealField2D& phi) {
        RealField2D t = rhs;
        if (op.q_coupling) t += op.coeff_nl * derivative(coupling(op, derivative(phi, 1, 0)), 1, 0);
        RealField2D out = SpectralView(t).apply_real(inv, Symmetry::odd_x_even_y);
        symmetrize(out);
        return out;
    };

    const std::size_t n = g.size();
    auto as_vec = [n](const RealField2D& f) { return Eigen::Map<const Eigen::VectorXd>(f.values().data(), n); };

    detail::AndersonMixer mixer(opt.anderson_depth);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    if (initial) {
        check_operator_grid(op, initial->grid());
        require_symmetry(*initial, Symmetry::odd_x_even_y, "solve_linearized initial guess");
        x = as_vec(*initial);
    }
    RealField2D phi(g, Symmetry::odd_x_even_y);
    for (int it = 1; it <= opt.max_iter; ++it) {
        Eigen::Map<Eigen::VectorXd>(phi.values().data(), n) = x;
        const RealField2D gphi = fixed_map(phi);
        const Eigen::VectorXd gv = as_vec(gphi);

        RealField2D fres(g, Symmetry::odd_x_even_y);
        Eigen::Map<Eigen::VectorXd>(fres.values().data(), n) = gv - x;
        rep.residual = l2_norm(SpectralView(fres).apply_real(sym, Symmetry::odd_x_even_y)) / rhs_norm;
        rep.history.push_back(rep.residual);
        rep.iterations = it;
        if (rep.residual <= opt.tol) {
            rep.phi = phi;
            symmetrize(rep.phi);
            return rep;
        }
        x = mixer.next(x, gv);
    }
    throw NotConverged("solve_linearized: residual " + format_number(rep.residual) + " after " +
                       std::to_string(opt.max_iter) + " iterations");
}

RealField2D apply_L(const LinearizedOperator& op, const RealField2D& psi) {
    check_operator_grid(op, psi.grid());
    require_zero_mean(psi, "apply_L");
    const Grid2D& g = op.grid;
    const SpectralView v(psi);
    const double alpha = lump_alpha(op.eps);
    RealField2D r = v.apply_real(half_symbol(g, [alpha](double a, double b) {
                                     return a == 0.0 ? 0.0 : -a * a - alpha - 2.0 * b * b / (a * a);
                                 }),
                                 psi.symmetry());
    if (op.q_coupling) {
        // D(qx_D * D psi) with the xi1 = 0 column dropped, so L maps zero-mean fields to zero-mean fields.
        const auto mask = dealias_mask(g, false);
        const RealField2D prod = multiply(op.qx_dealiased, v.apply_real(mask, psi.symmetry()));
        r -= op.coeff_lump_nl * SpectralView(prod).apply_real(dealias_mask(g, true), psi.symmetry());
    }
    r.set_symmetry(psi.symmetry());
    return r;
}

RealField2D apply_L(const LinearizedOperator& op, const DerivativeSource& src) {
    check_operator_grid(op, src.grid());
    const double alpha = lump_alpha(op.eps);
    const RealField2D psi = src.derivative(0, 0);
    RealField2D r = src.derivative(2, 0) - alpha * psi - 2.0 * src.derivative(-2, 2);
    if (op.q_coupling) {
        const LumpDerivatives d(op.lump, 1);
        r -= op.coeff_lump_nl * multiply(sample_lump(d, op.grid, 1, 0, SeamPolicy::pointwise), psi);
    }
    return r;
}

namespace {

struct ClassPairs {
    std::vector<double> lambda;
    std::vector<RealField2D> psi;
    int iterations = 0;
};

// Lowest nev eigenpairs of -P L P in one parity class by block LOBPCG with the
// constant-coefficient symbol as preconditioner.
ClassPairs lobpcg(const LinearizedOperator& op, Symmetry cls, int nev, const EigenOptions& opt, std::uint64_t seed) {
    const Grid2D& g = op.grid;
    const std::size_t n = g.size();
    const int nb = nev + 2;
    const double alpha = lump_alpha(op.eps);
    const auto prec = half_symbol(g, [alpha](double a, double b) {
        return a == 0.0 ? 0.0 : 1.0 / (a * a + alpha + 2.0 * b * b / (a * a));
    });

    auto to_field = [&](const Eigen::Ref<const Eigen::VectorXd>& v) {
        RealField2D f(g, cls);
        Eigen::Map<Eigen::VectorXd>(f.values().data(), n) = v;
        return f;
    };
    auto project = [&](Eigen::Ref<Eigen::VectorXd> v) {
        RealField2D f = to_field(v);
        symmetrize(f);
        remove_line_means(f);
        v = Eigen::Map<const Eigen::VectorXd>(f.values().data(), n);
    };
    auto apply_m = [&](const Eigen::MatrixXd& V) {
        Eigen::MatrixXd out(n, V.cols());
        for (int i = 0; i < V.cols(); ++i) {
            RealField2D f = apply_L(op, to_field(V.col(i)));
            f *= -1.0;
            symmetrize(f);
            out.col(i) = Eigen::Map<const Eigen::VectorXd>(f.values().data(), n);
        }
        return out;
    };
    auto precondition = [&](Eigen::MatrixXd& V) {
        for (int i = 0; i < V.cols(); ++i) {
            RealField2D f = SpectralView(to_field(V.col(i))).apply_real(prec, cls);
            V.col(i) = Eigen::Map<const Eigen::VectorXd>(f.values().data(), n);
            project(V.col(i));
        }
    };
    // Orthonormal combinations of the columns of S (plain dot product), dropping near-dependent directions.
    auto orthonormal_coeffs = [](const Eigen::MatrixXd& gram) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        const double top = es.eigenvalues().maxCoeff();
        std::vector<int> keep;
        for (int i = 0; i < gram.rows(); ++i)
            if (es.eigenvalues()(i) > 1e-13 * top) keep.push_back(i);
        Eigen::MatrixXd Z(gram.rows(), static_cast<int>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i)
            Z.col(static_cast<int>(i)) = es.eigenvectors().col(keep[i]) / std::sqrt(es.eigenvalues()(keep[i]));
        return Z;
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd X(n, nb);
    for (int i = 0; i < nb; ++i)
        for (std::size_t r = 0; r < n; ++r) X(static_cast<Eigen::Index>(r), i) = normal(rng);
    for (int i = 0; i < nb; ++i) project(X.col(i));
    precondition(X);
    {
        const Eigen::MatrixXd Z = orthonormal_coeffs(X.transpose() * X);
        if (Z.cols() < nb) throw NotConverged("eigen_extremes: degenerate starting block");
        X = X * Z;
    }
    Eigen::MatrixXd AX = apply_m(X);
    {
        Eigen::MatrixXd H = X.transpose() * AX;
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        X = X * es.eigenvectors();
        AX = AX * es.eigenvectors();
    }
    Eigen::MatrixXd P, AP;
    Eigen::VectorXd lam(nb);

    ClassPairs out;
    for (int it = 1; it <= opt.max_iter; ++it) {
        for (int i = 0; i < nb; ++i) lam(i) = X.col(i).dot(AX.col(i)) / X.col(i).squaredNorm();
        Eigen::MatrixXd R = AX - X * lam.asDiagonal();
        bool done = true;
        for (int i = 0; i < nev; ++i)
            if (R.col(i).norm() > opt.tol * std::max(1.0, std::abs(lam(i))) * X.col(i).norm()) done = false;
        out.iterations = it;
        if (done) break;
        if (it == opt.max_iter)
            throw NotConverged("eigen_extremes: block residual above tolerance after " + std::to_string(opt.max_iter) +
                               " iterations");

        Eigen::MatrixXd W = R;
        precondition(W);
        W -= X * (X.transpose() * W);
        for (int i = 0; i < W.cols(); ++i) {
            const double nrm = W.col(i).norm();
            if (nrm > 0.0) W.col(i) /= nrm;
        }
        const Eigen::MatrixXd AW = apply_m(W);

        const int np = static_cast<int>(P.cols());
        Eigen::MatrixXd S(n, 2 * nb + np), AS(n, 2 * nb + np);
        S << X, W, P;
        AS << AX, AW, AP;
        const Eigen::MatrixXd Z = orthonormal_coeffs(S.transpose() * S);
        Eigen::MatrixXd H = Z.transpose() * (S.transpose() * AS) * Z;
        H = 0.5 * (H + H.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        const Eigen::MatrixXd C = Z * es.eigenvectors().leftCols(nb);

        const Eigen::MatrixXd Crest = C.bottomRows(nb + np);
        Eigen::MatrixXd Srest(n, nb + np), ASrest(n, nb + np);
        Srest << W, P;
        ASrest << AW, AP;
        P = Srest * Crest;
        AP = ASrest * Crest;
        X = X * C.topRows(nb) + P;
        AX = AX * C.topRows(nb) + AP;
        for (int i = 0; i < nb; ++i) {
            const double nrm = X.col(i).norm();
            X.col(i) /= nrm;
            AX.col(i) /= nrm;
            const double pn = P.col(i).norm();
            if (pn > 0.0) {
                P.col(i) /= pn;
                AP.col(i) /= pn;
            }
        }
    }
    for (int i = 0; i < nev; ++i) {
        RealField2D f = to_field(X.col(i));
        f *= 1.0 / l2_norm(f);
        out.lambda.push_back(lam(i));
        out.psi.push_back(std::move(f));
    }
    return out;
}

}  // namespace

EigenReport eigen_extremes(const LinearizedOperator& op, int k, const EigenOptions& opt) {
    if (k < 2) throw ValidationError("eigen_extremes requires k >= 2");
    if (opt.tol <= 0.0 || opt.max_iter < 1 || opt.zero_tol <= 0.0)
        throw ValidationError("eigen_extremes requires tol > 0, max_iter >= 1, zero_tol > 0");

    const ClassPairs even = lobpcg(op, Symmetry::even_x_even_y, k + 1, opt, opt.seed);
    const ClassPairs odd = lobpcg(op, Symmetry::odd_x_even_y, k + 1, opt, opt.seed + 1);

    std::vector<EigenPair> all;
    for (std::size_t i = 0; i < even.lambda.size(); ++i) all.push_back({even.lambda[i], even.psi[i]});
    for (std::size_t i = 0; i < odd.lambda.size(); ++i) all.push_back({odd.lambda[i], odd.psi[i]});
    std::sort(all.begin(), all.end(), [](const EigenPair& a, const EigenPair& b) { return a.lambda < b.lambda; });

    const double zero = opt.zero_tol * lump_alpha(op.eps);
    EigenReport rep;
    rep.iterations = even.iterations + odd.iterations;
    rep.negative_count =
        static_cast<int>(std::count_if(all.begin(), all.end(), [zero](const EigenPair& p) { return p.lambda < -zero; }));
    if (rep.negative_count > 1)
        throw MultipleNegative("eigen_extremes: " + std::to_string(rep.negative_count) + " negative eigenvalues");
    if (rep.negative_count == 0) throw NotConverged("eigen_extremes: no negative eigenvalue found");
    rep.lambda2 = std::numeric_limits<double>::quiet_NaN();
    for (const auto& p : all)
        if (p.lambda > zero) {
            rep.lambda2 = p.lambda;
            break;
        }
    if (std::isnan(rep.lambda2)) throw NotConverged("eigen_extremes: no positive eigenvalue among computed pairs");

    rep.lambda1 = all.front().lambda;
    rep.phi0 = all.front().psi;
    if (x_parity(rep.phi0.symmetry()) != Parity::even)
        throw NotConverged("eigen_extremes: negative eigenfunction is not even in x");
    const Grid2D& g = op.grid;
    if (rep.phi0(g.nx / 2, g.ny / 2) < 0.0) rep.phi0 *= -1.0;
    rep.phi1 = antiderivative_x(rep.phi0);
    rep.phi1.set_symmetry(Symmetry::odd_x_even_y);
    symmetrize(rep.phi1);
    all.resize(static_cast<std::size_t>(k));
    rep.pairs = std::move(all);
    return rep;
}

namespace {

void validate_norm_args(double eps, double delta) {
    if (!(eps >= 0.0 && eps <= lump_eps_max)) throw ValidationError("norm evaluation requires 0 <= eps <= 0.5");
    if (!(delta > 0.0 && delta <= 0.5)) throw ValidationError("norm evaluation requires 0 < delta <= 0.5");
}

double sq(const RealField2D& f) { return inner(f, f); }

double sup(const RealField2D& f, double p, double delta = 0.0) { return weighted_sup(f, p, delta); }

}  // namespace

double norm_a(const RealField2D& f, double eps) {
    const SpectralView v(f);
    const double e4 = std::pow(eps, 4);
    const double s = sq(v.derivative(4, 0)) + e4 * sq(v.derivative(2, 2)) + e4 * e4 * sq(v.derivative(0, 4)) +
                     sq(v.derivative(2, 0)) + 2.0 * sq(v.derivative(1, 1)) + sq(v.derivative(0, 2)) +
                     sq(v.derivative(1, 0)) + sq(v.derivative(0, 1));
    return std::sqrt(s);
}

double norm_b(const RealField2D& f) { return std::sqrt(sq(f) + sq(derivative(f, 1, 0))); }

double norm_c(const RealField2D& f) { return std::sqrt(sq(f) + sq(derivative(f, 0, 1))); }

namespace {

double star_sum(const RealField2D& f, double eps, double delta, bool high) {
    validate_norm_args(eps, delta);
    const SpectralView v(f);
    auto d = [&v](int m, int n) { return v.derivative(m, n); };
    auto anti = [&v](int n) { return antiderivative_x(v.derivative(0, n)); };
    const double e12 = std::sqrt(eps);
    const double e32 = std::pow(eps, 1.5);
    const double e52 = std::pow(eps, 2.5);
    const double e72 = std::pow(eps, 3.5);
    const double e112 = std::pow(eps, 5.5);
    const double log_w = eps > 0.0 ? 1.0 / std::log(1.0 / eps) : 0.0;
    const RealField2D fx = d(1, 0);
    const RealField2D fy = d(0, 1);
    double s = norm_a(f, eps);
    s += sup(f, 1.0, delta) + log_w * sup(f, 1.0);
    s += sup(fx, 1.5, delta) + e12 * sup(fx, 1.5);
    s += sup(d(2, 0), 1.5) + e12 * sup(d(3, 0), 1.5);
    s += e12 * sup(d(4, 0), 1.5) + e12 * sup(fy, 1.5, delta);
    s += e32 * sup(fy, 1.5) + e32 * sup(d(0, 2), 1.5);
    s += e72 * sup(d(0, 3), 1.5);
    s += e12 * sup(d(1, 1), 1.5) + e12 * sup(d(2, 1), 1.5);
    s += e32 * sup(d(1, 2), 1.5) + e52 * sup(d(2, 2), 1.5);
    s += e32 * sup(anti(2), 1.5, delta) + e72 * sup(anti(3), 1.5, delta);
    if (high) s += e112 * (sup(d(0, 4), 1.5) + sup(anti(4), 1.5, delta));
    return s;
}

}  // namespace

double norm_star(const RealField2D& f, double eps, double delta) { return star_sum(f, eps, delta, true); }

double norm_star_proxy(const RealField2D& f, double eps, double delta) { return star_sum(f, eps, delta, false); }

double norm_dstar(const RealField2D& f, double delta) {
    validate_norm_args(0.0, delta);
    const SpectralView v(f);
    return norm_b(f) + sup(f, 2.5, delta) + sup(v.derivative(1, 0), 2.5, delta) + sup(v.derivative(2, 0), 2.5, delta);
}

double norm_tstar(const RealField2D& f, double delta) {
    validate_norm_args(0.0, delta);
    const SpectralView v(f);
    return norm_c(f) + sup(f, 3.0, delta) + sup(v.derivative(0, 1), 3.0, delta) + sup(v.derivative(1, 1), 3.0, delta);
}

double norm_qstar(const RealField2D& f, double eps, double delta) {
    validate_norm_args(eps, delta);
    const SpectralView v(f);
    auto w = [&](int m, int n) { return sup(v.derivative(m, n), 1.5, delta); };
    const double e2 = eps * eps;
    return sup(f, 1.5, delta) + w(1, 0) + w(2, 0) + eps * w(3, 0) + e2 * w(0, 1) + e2 * w(1, 1) + e2 * e2 * w(0, 2) +
           e2 * e2 * w(1, 2);
}

double norm_pstar(const RealField2D& f, double eps, double delta) {
    validate_norm_args(eps, delta);
    const SpectralView v(f);
    auto w = [&](int m, int n) { return sup(v.derivative(m, n), 1.5, delta); };
    const double e2 = eps * eps;
    return sup(f, 1.5, delta) + w(1, 0) + e2 * w(0, 1) + e2 * e2 * w(0, 2);
}

NormSuite norm_suite(const RealField2D& phi, double eps, double delta) {
    validate_norm_args(eps, delta);
    NormSuite s;
    s.delta = delta;
    s.a = norm_a(phi, eps);
    s.b = norm_b(phi);
    s.c = norm_c(phi);
    s.star = norm_star(phi, eps, delta);
    s.dstar = norm_dstar(phi, delta);
    s.tstar = norm_tstar(phi, delta);
    s.qstar = norm_qstar(phi, eps, delta);
    s.pstar = norm_pstar(phi, eps, delta);
    return s;
}

}  // namespace transonic
