// End-to-end acceptance criteria 1-11; prints one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "transonic/error.hpp"
#include "transonic/gp_assembly.hpp"
#include "transonic/green_kernel.hpp"
#include "transonic/linearized_kpi.hpp"
#include "transonic/lump.hpp"
#include "transonic/reduction.hpp"

using namespace transonic;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) pass = false;
        detail << (ok ? "" : "[fail] ") << what << "; ";
    }
};

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> geometric(double a, double b, int n) {
    std::vector<double> r;
    for (int i = 0; i < n; ++i) r.push_back(a * std::pow(b / a, double(i) / (n - 1)));
    return r;
}

const Grid2D& default_grid() {
    static const Grid2D g = make_grid(512, 512, 40.0, 40.0);
    return g;
}

const FixedPointResult& converged(double eps, const Grid2D& g) {
    static std::map<std::pair<double, int>, FixedPointResult> cache;
    const auto key = std::pair{eps, g.nx};
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, outer_fixed_point(eps, g)).first;
    return it->second;
}

const Grid2D& fine_grid() {
    static const Grid2D g = make_grid(1024, 1024, 40.0, 40.0);
    return g;
}

void c1(Outcome& o) {
    for (double eps : {0.0, 0.05, 0.1, 0.2}) {
        const double r = kpi_residual(make_lump_params(eps), default_grid()).max_abs();
        o.require(r <= 1e-8, "eps " + fmt(eps) + " residual " + fmt(r));
    }
}

void c2(Outcome& o) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> ue(0.01, 0.5), ux(-3.0, 3.0);
    double w1 = 0.0, w2 = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double eps = ue(rng);
        const double xi = ux(rng) * std::pow(10.0, ux(rng)) / eps;
        const auto r = dispersion_roots(eps);
        const double e4 = std::pow(eps, 4), t = xi * xi;
        w1 = std::max(w1, std::abs(e4 * r.a(xi) * r.b(xi) - (t * t + t)) / (t * t + t));
        w2 = std::max(w2, std::abs(e4 * (r.a(xi) + r.b(xi)) - (1 + eps * eps * t)) / (1 + eps * eps * t));
    }
    o.require(w1 <= 1e-10, "eps^4 ab rel " + fmt(w1));
    o.require(w2 <= 1e-10, "eps^4 (a+b) rel " + fmt(w2));
    const auto r = dispersion_roots(0.1);
    const double dp = std::abs(r.D(r.c_eps())), dm = std::abs(r.D(-r.c_eps()));
    o.require(dp <= 1e-10 && dm <= 1e-10, "|D(+-c)| " + fmt(std::max(dp, dm)));
    const double c2 = r.c_eps() * r.c_eps();
    const double exact = (1 - 0.02 + 2 * std::sqrt(1 - 0.01 + 1e-4)) / 0.03;
    o.require(rel(c2, exact) <= 1e-10, "c^2 = " + std::to_string(c2) + " vs exact rel " + fmt(rel(c2, exact)));
    o.require(std::abs(c2 - 99.0025) <= 5e-5, "c^2 - 99.0025 = " + fmt(c2 - 99.0025));
}

// Seeded grid nodes with 1 <= r <= 10, |y| >= 0.5 on the coarse grid; the fine grid has the same nodes.
void c3(Outcome& o) {
    const Grid2D gc = make_grid(1024, 2048, 40.0 * std::sqrt(2.0), 40.0 * std::sqrt(2.0));
    const Grid2D gf = make_grid(2048, 4096, 80.0, 80.0);
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> J(0, gc.nx - 1), K(0, gc.ny - 1);
    std::vector<std::pair<int, int>> nodes;
    while (nodes.size() < 10) {
        const int j = J(rng), k = K(rng);
        const double r = std::hypot(gc.x(j), gc.y(k));
        if (r >= 1.0 && r <= 10.0 && std::abs(gc.y(k)) >= 0.5) nodes.emplace_back(j, k);
    }
    double worst_fine = 0.0, worst_ratio = 1e300;
    for (double eps : {0.1, 0.2})
        for (auto [m, n] : {std::pair{1, 0}, {2, 0}, {3, 0}, {0, 1}, {0, 2}, {0, 3}, {1, 1}, {1, 2}}) {
            const auto p = make_kernel_params(KernelPreset::normalized, eps);
            double e[2] = {0.0, 0.0};
            int gi = 0;
            for (const Grid2D* g : {&gc, &gf}) {
                KernelFftOptions fo;
                fo.subtract_model = true;
                fo.window_xi = 0.6 * std::min(g->nx / g->Lx, g->ny / g->Ly) * std::numbers::pi / 2.0;
                const RealField2D f = kernel_fft(p, *g, m, n, fo);
                for (auto [j, k] : nodes) {
                    const int jj = int(std::lround((gc.x(j) + g->Lx) / g->dx()));
                    const int kk = int(std::lround((gc.y(k) + g->Ly) / g->dy()));
                    const double res = kernel_residue_eval(p, m, n, g->x(jj), g->y(kk));
                    e[gi] = std::max(e[gi], rel(f(jj, kk), res));
                }
                ++gi;
            }
            worst_fine = std::max(worst_fine, e[1]);
            worst_ratio = std::min(worst_ratio, e[0] / e[1]);
            o.require(e[1] <= 1e-4 && e[0] >= 2.0 * e[1], "eps " + fmt(eps) + " (" + std::to_string(m) + "," +
                                                                std::to_string(n) + ") gap " + fmt(e[0]) + " -> " +
                                                                fmt(e[1]));
        }
    o.detail << "max fine gap " << fmt(worst_fine) << ", min halving ratio " << fmt(worst_ratio) << "; ";
}

void c4(Outcome& o) {
    const auto p = make_kernel_params(KernelPreset::normalized, 0.2);
    const std::vector<double> rays{15, 45, 75};
    const auto radii = geometric(5, 80, 10);
    for (auto [m, n] : {std::pair{2, 0}, {1, 1}, {0, 2}, {1, 2}}) {
        const auto s = decay_scan(p, m, n, radii, rays, 160);
        const double worst = *std::max_element(s.fitted_slope_per_ray.begin(), s.fitted_slope_per_ray.end());
        o.require(worst <= -1.35, "(" + std::to_string(m) + "," + std::to_string(n) + ") max slope " + fmt(worst));
    }
    const auto s = decay_scan(p, 1, 0, radii, rays, 160);
    const auto [lo, hi] = std::minmax_element(s.fitted_slope_per_ray.begin(), s.fitted_slope_per_ray.end());
    o.require(*lo >= -1.25 && *hi <= -0.9, "(1,0) slopes in [" + fmt(*lo) + ", " + fmt(*hi) + "]");
}

void c5(Outcome& o) {
    const auto radii = geometric(2, 80, 10);
    const std::vector<double> rays{15, 45, 75};
    const double a = decay_scan(make_kernel_params(KernelPreset::gp, 0.1), 0, 2, radii, rays, 160).max_prefactor;
    const double b = decay_scan(make_kernel_params(KernelPreset::gp, 0.2), 0, 2, radii, rays, 160).max_prefactor;
    const double target = std::pow(2.0, 1.5);
    o.require(a / b >= target / 4 && a / b <= target * 4, "prefactor ratio " + fmt(a / b));
}

void c6(Outcome& o) {
    std::map<double, double> l1;
    for (double eps : {0.0, 0.05, 0.1, 0.2}) {
        const EigenReport r = eigen_extremes(make_linearized_operator(eps, default_grid()), 2);
        l1[eps] = r.lambda1;
        o.require(r.negative_count == 1, "eps " + fmt(eps) + " negatives " + std::to_string(r.negative_count) +
                                             " lambda1 " + std::to_string(r.lambda1));
    }
    const double d05 = std::abs(l1[0.05] - l1[0.0]), d1 = std::abs(l1[0.1] - l1[0.0]), d2 = std::abs(l1[0.2] - l1[0.0]);
    const double slope = std::log(d2 / d05) / std::log(4.0);
    o.require(slope >= 1.5 && slope <= 2.5, "|lambda1(eps) - lambda1(0)| slope " + fmt(slope) + " (" + fmt(d05) +
                                                ", " + fmt(d1) + ", " + fmt(d2) + ")");
    const double fine = eigen_extremes(make_linearized_operator(0.0, fine_grid()), 2).lambda1;
    const double coarse = l1[0.0];
    char a[32], b[32];
    std::snprintf(a, sizeof a, "%.3g", coarse);
    std::snprintf(b, sizeof b, "%.3g", fine);
    o.require(std::string(a) == b, std::string("lambda1(0) 512: ") + std::to_string(coarse) + ", 1024: " +
                                       std::to_string(fine));
}

void c7(Outcome& o) {
    for (double eps : {0.0, 0.05, 0.1, 0.2}) {
        const auto op = make_linearized_operator(eps, default_grid());
        const double rx = apply_lump_linearization(op, LumpSource(op.lump, default_grid(), 1, 0)).max_abs();
        const double ry = apply_lump_linearization(op, LumpSource(op.lump, default_grid(), 0, 1)).max_abs();
        o.require(rx <= 1e-6 && ry <= 1e-6, "eps " + fmt(eps) + " dx q " + fmt(rx) + " dy q " + fmt(ry));
    }
}

// Gaussian bumps projected onto odd_x_even_y with unit sup norm.
RealField2D smooth_odd_field(const Grid2D& g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RealField2D f(g, Symmetry::odd_x_even_y);
    for (int b = 0; b < 4; ++b) {
        const double cx = 3.0 * u(rng), cy = 3.0 * u(rng), amp = u(rng), w = 1.5 + 0.5 * u(rng);
        for (int k = 0; k < g.ny; ++k)
            for (int j = 0; j < g.nx; ++j) {
                const double dx = g.x(j) - cx, dy = g.y(k) - cy;
                f(j, k) += amp * std::exp(-(dx * dx + dy * dy) / (w * w));
            }
    }
    symmetrize(f);
    f *= 1.0 / f.max_abs();
    return f;
}

void c8(Outcome& o) {
    const ReductionState& s = converged(0.1, fine_grid()).state;
    const double r = f2_residual(s, s.f2).max_abs();
    o.require(r <= 1e-7, "f2 residual (1024^2) " + fmt(r));

    const Grid2D& g = default_grid();
    std::mt19937_64 rng(11);
    const RealField2D a = smooth_odd_field(g, rng);
    const RealField2D b = smooth_odd_field(g, rng);
    std::map<double, double> K;
    for (double eps : {0.1, 0.2}) {
        RealField2D p1 = a, p2 = b;
        p1 *= 20.0 * eps * eps / norm_star_proxy(a, eps, 0.1);
        p2 *= 20.0 * eps * eps / norm_star_proxy(b, eps, 0.1);
        const RealField2D f1 = solve_f2(make_reduction_state(eps, g, p1)).f2;
        const RealField2D f2 = solve_f2(make_reduction_state(eps, g, p2)).f2;
        K[eps] = (f1 - f2).max_abs() * std::pow(eps, 1.5) / norm_star_proxy(p1 - p2, eps, 0.1);
    }
    const double q = K[0.1] / K[0.2];
    o.require(q <= 3.0 && q >= 1.0 / 3.0, "Lipschitz eps^{3/2} K(0.1)/K(0.2) " + fmt(q));
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

void c9(Outcome& o) {
    std::vector<double> star, scaled_ratio, gap;
    for (double eps : {0.05, 0.1, 0.2}) {
        const FixedPointResult& r = converged(eps, default_grid());
        o.require(r.report.converged, "eps " + fmt(eps) + " converged in " + std::to_string(r.report.iterations));
        star.push_back(r.report.final_phi_star / (eps * eps));
        const double m = median(r.report.contraction_ratios);
        scaled_ratio.push_back(m / std::sqrt(eps));
        gap.push_back(gp_system_residual(r.state).theorem_gap);
        o.detail << "eps " << fmt(eps) << " ratio " << fmt(m) << "; ";
    }
    const auto [slo, shi] = std::minmax_element(star.begin(), star.end());
    o.require(*shi / *slo <= 2.0, "star/eps^2 spread " + fmt(*shi / *slo));
    const auto [rlo, rhi] = std::minmax_element(scaled_ratio.begin(), scaled_ratio.end());
    o.require(*rhi / *rlo <= 3.0, "ratio/eps^{1/2} spread " + fmt(*rhi / *rlo));
    const auto [glo, ghi] = std::minmax_element(gap.begin(), gap.end());
    o.require(*ghi <= 10.0 && *ghi / *glo <= 2.0, "theorem gap in [" + fmt(*glo) + ", " + fmt(*ghi) + "]");
}

void c10(Outcome& o) {
    const GpResidualReport a = gp_system_residual(converged(0.1, default_grid()).state);
    const GpResidualReport b = gp_system_residual(converged(0.1, fine_grid()).state);
    o.require(a.res1_sup >= 4.0 * b.res1_sup, "res1 " + fmt(a.res1_sup) + " -> " + fmt(b.res1_sup));
    o.require(a.res2_sup >= 4.0 * b.res2_sup, "res2 " + fmt(a.res2_sup) + " -> " + fmt(b.res2_sup));
    const GpResidualReport full = gp_system_residual(converged(0.2, default_grid()).state);
    const GpResidualReport abl = gp_system_residual(make_reduction_state(0.2, default_grid()));
    o.require(abl.res1_sup >= 10.0 * full.res1_sup && abl.res2_sup >= 10.0 * full.res2_sup,
              "ablation res1 x" + fmt(abl.res1_sup / full.res1_sup) + ", res2 x" + fmt(abl.res2_sup / full.res2_sup));
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void c11(Outcome& o) {
    const fs::path root = fs::temp_directory_path() / "transonic_acceptance";
    fs::remove_all(root);
    for (const char* d : {"a", "b"}) {
        const std::string cmd = std::string(TRANSONIC_CLI) + " construct --out " + (root / d).string() + " > " +
                                (root / (std::string(d) + ".log")).string();
        fs::create_directories(root);
        const int rc = std::system(cmd.c_str());
        o.require(rc == 0, std::string("run ") + d + " exit " + std::to_string(rc));
    }
    for (const char* f : {"phi.bin", "f1.bin", "f2.bin", "g1.bin", "report.json"}) {
        const std::string x = slurp(root / "a" / f), y = slurp(root / "b" / f);
        o.require(!x.empty() && x == y, std::string(f) + (x == y ? " identical" : " differs"));
    }
}

}  // namespace

int main() {
    const std::vector<std::pair<int, std::function<void(Outcome&)>>> criteria{
        {1, c1}, {2, c2}, {3, c3}, {4, c4}, {5, c5}, {6, c6}, {7, c7}, {8, c8}, {9, c9}, {10, c10}, {11, c11}};
    int failed = 0;
    for (const auto& [id, fn] : criteria) {
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            fn(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!o.pass) ++failed;
        std::printf("criterion %d: %s (%.0f s) %s\n", id, o.pass ? "PASS" : "FAIL", t, o.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
