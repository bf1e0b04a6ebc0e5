#include "transonic/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <ostream>
#include <random>

#include "transonic/error.hpp"
#include "transonic/field_io.hpp"
#include "transonic/gp_assembly.hpp"
#include "transonic/green_kernel.hpp"
#include "transonic/linearized_kpi.hpp"
#include "transonic/lump.hpp"
#include "transonic/reduction.hpp"

namespace transonic::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const std::map<std::string, Command>& command_table() {
    static const std::map<std::string, Command> t{
        {"lump-check", Command::lump_check}, {"kernel", Command::kernel},       {"kernel-scan", Command::kernel_scan},
        {"eigen", Command::eigen},           {"norms", Command::norms},         {"construct", Command::construct},
        {"residual", Command::residual}};
    return t;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream f(p);
    if (!f) throw ValidationError("cannot write " + p.string());
    f << j.dump(2) << '\n';
}

// Header row plus rows of numbers.
void write_csv(const fs::path& p, const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    std::ofstream f(p);
    if (!f) throw ValidationError("cannot write " + p.string());
    for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "," : "") << header[i];
    f << '\n';
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << num(r[i]);
        f << '\n';
    }
}

json config_json(const RunConfig& c) {
    return json{{"epsilon", c.epsilon}, {"nx", c.nx},       {"ny", c.ny},   {"Lx", c.Lx},
                {"Ly", c.Ly},           {"delta", c.delta}, {"tol", c.tol}, {"max_iter", c.max_iter},
                {"preset", c.preset},   {"seed", c.seed}};
}

json base_report(Command cmd, const RunConfig& c) { return json{{"command", to_string(cmd)}, {"config", config_json(c)}}; }

Grid2D grid_of(const RunConfig& c) { return make_grid(c.nx, c.ny, c.Lx, c.Ly); }

json norms_json(const NormSuite& s) {
    return json{{"delta", s.delta}, {"a", s.a},         {"b", s.b},         {"c", s.c},        {"star", s.star},
                {"dstar", s.dstar}, {"tstar", s.tstar}, {"qstar", s.qstar}, {"pstar", s.pstar}};
}

void write_norms_csv(const fs::path& p, const NormSuite& s) {
    write_csv(p, {"delta", "a", "b", "c", "star", "dstar", "tstar", "qstar", "pstar"},
              {{s.delta, s.a, s.b, s.c, s.star, s.dstar, s.tstar, s.qstar, s.pstar}});
}

json residual_json(const GpResidualReport& r) {
    return json{{"eps", r.eps},
                {"c", r.c},
                {"res1_sup", r.res1_sup},
                {"res2_sup", r.res2_sup},
                {"res1_weighted", r.res1_weighted},
                {"res2_weighted", r.res2_weighted},
                {"energy", r.energy},
                {"alpha", r.alpha},
                {"beta", r.beta},
                {"farfield_fit_residual", r.farfield_fit_residual},
                {"theorem_gap", r.theorem_gap}};
}

void write_residual_csv(const fs::path& p, const GpResidualReport& r) {
    write_csv(p,
              {"eps", "c", "res1_sup", "res2_sup", "res1_weighted", "res2_weighted", "energy", "alpha", "beta",
               "farfield_fit_residual", "theorem_gap"},
              {{r.eps, r.c, r.res1_sup, r.res2_sup, r.res1_weighted, r.res2_weighted, r.energy, r.alpha, r.beta,
                r.farfield_fit_residual, r.theorem_gap}});
}

void lump_check(const RunConfig& c, std::ostream& out) {
    const Grid2D g = grid_of(c);
    const LumpParams p = make_lump_params(c.epsilon);
    const double res = kpi_residual(p, g).max_abs();
    write_field(c.out_dir / "q", sample_lump(LumpDerivatives(p, 0), g, 0, 0), "q");
    json r = base_report(Command::lump_check, c);
    r["lump"] = {{"A", p.A}, {"B", p.B}, {"C", p.C}, {"E", p.E}, {"kappa", lump_nonlinear_coeff(c.epsilon)}};
    r["residual_sup"] = res;
    write_json(c.out_dir / "report.json", r);
    out << r.dump(2) << '\n';
}

// Residue route against the windowed, model-subtracted Fourier route at seeded nodes with 1 <= r <= 10, |y| >= 0.5.
void kernel(const RunConfig& c, std::ostream& out) {
    const Grid2D g = grid_of(c);
    const KernelSymbolParams p = make_kernel_params(kernel_preset_from_string(c.preset), c.epsilon);
    if (c.points < 1) throw ValidationError("kernel needs at least one point");
    std::vector<std::pair<int, int>> nodes;
    for (int k = 0; k < g.ny; ++k)
        for (int j = 0; j < g.nx; ++j) {
            const double r = std::hypot(g.x(j), g.y(k));
            if (r >= 1.0 && r <= 10.0 && std::abs(g.y(k)) >= 0.5) nodes.emplace_back(j, k);
        }
    if (nodes.empty()) throw ValidationError("kernel: the grid has no nodes with 1 <= r <= 10 and |y| >= 0.5");
    std::mt19937_64 rng(c.seed);
    std::vector<std::pair<int, int>> picked;
    for (int i = 0; i < c.points; ++i)
        picked.push_back(nodes[std::uniform_int_distribution<std::size_t>(0, nodes.size() - 1)(rng)]);

    KernelFftOptions o;
    o.subtract_model = true;
    o.window_xi = 0.6 * g.nx * std::numbers::pi / (2.0 * g.Lx);
    std::vector<std::vector<double>> rows;
    json orders = json::array();
    for (const auto& [m, n] : c.orders) {
        const RealField2D f = kernel_fft(p, g, m, n, o);
        write_field(c.out_dir / ("kernel_" + std::to_string(m) + "_" + std::to_string(n)), f,
                    "kernel_" + std::to_string(m) + "_" + std::to_string(n));
        double worst = 0.0;
        for (const auto& [j, k] : picked) {
            const double a = f(j, k);
            const double b = kernel_residue_eval(p, m, n, g.x(j), g.y(k));
            const double rel = std::abs(a - b) / std::max(std::abs(b), 1e-300);
            worst = std::max(worst, rel);
            rows.push_back({double(m), double(n), g.x(j), g.y(k), a, b, rel});
        }
        orders.push_back({{"m", m}, {"n", n}, {"max_relative_gap", worst}});
    }
    write_csv(c.out_dir / "kernel_points.csv", {"m", "n", "x", "y", "fourier", "residue", "relative_gap"}, rows);
    json r = base_report(Command::kernel, c);
    if (p.preset == KernelPreset::normalized) {
        const DispersionRoots d(p);
        r["c_eps"] = d.c_eps();
        r["d_eps"] = std::isfinite(d.d_eps()) ? json(d.d_eps()) : json(nullptr);
    }
    r["orders"] = orders;
    write_json(c.out_dir / "report.json", r);
    out << r.dump(2) << '\n';
}

void kernel_scan(const RunConfig& c, std::ostream& out) {
    const KernelSymbolParams p = make_kernel_params(kernel_preset_from_string(c.preset), c.epsilon);
    const DecayScanReport s = decay_scan(p, c.m, c.n, c.radii, c.rays, c.Lx);
    std::vector<std::vector<double>> rows;
    for (std::size_t a = 0; a < s.rays_deg.size(); ++a)
        for (std::size_t i = 0; i < s.radii.size(); ++i) rows.push_back({s.rays_deg[a], s.radii[i], s.values[a][i]});
    write_csv(c.out_dir / "scan.csv", {"ray_deg", "r", "value"}, rows);
    json r = base_report(Command::kernel_scan, c);
    r["m"] = s.m;
    r["n"] = s.n;
    r["rays_deg"] = s.rays_deg;
    r["radii"] = s.radii;
    r["fitted_slope_per_ray"] = s.fitted_slope_per_ray;
    r["prefactor_per_ray"] = s.prefactor_per_ray;
    r["bound_slope"] = s.bound_slope;
    r["max_prefactor"] = s.max_prefactor;
    write_json(c.out_dir / "report.json", r);
    out << r.dump(2) << '\n';
}

void eigen(const RunConfig& c, std::ostream& out) {
    const LinearizedOperator op = make_linearized_operator(c.epsilon, grid_of(c));
    EigenOptions o;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    o.seed = c.seed;
    const EigenReport e = eigen_extremes(op, c.k, o);
    write_field(c.out_dir / "phi0", e.phi0, "phi0");
    write_field(c.out_dir / "phi1", e.phi1, "phi1");
    std::vector<std::vector<double>> rows;
    json lambdas = json::array();
    for (std::size_t i = 0; i < e.pairs.size(); ++i) {
        rows.push_back({double(i), e.pairs[i].lambda});
        lambdas.push_back(e.pairs[i].lambda);
    }
    write_csv(c.out_dir / "eigenvalues.csv", {"index", "lambda"}, rows);
    json r = base_report(Command::eigen, c);
    r["k"] = c.k;
    r["eigenvalues"] = lambdas;
    r["lambda1"] = e.lambda1;
    r["lambda2"] = e.lambda2;
    r["negative_count"] = e.negative_count;
    r["iterations"] = e.iterations;
    write_json(c.out_dir / "report.json", r);
    out << r.dump(2) << '\n';
}

// A directory input means its phi field.
LoadedField read_input_field(const fs::path& in) {
    if (in.empty()) throw ValidationError("no input given (config key \"in\" or --in)");
    return read_field(fs::is_directory(in) ? in / "phi" : in);
}

void norms(const RunConfig& c, std::ostream& out) {
    const LoadedField f = read_input_field(c.in);
    const NormSuite s = norm_suite(f.field, c.epsilon, c.delta);
    write_norms_csv(c.out_dir / "norms.csv", s);
    json r = base_report(Command::norms, c);
    r["input"] = c.in.string();
    r["quantity"] = f.quantity;
    r["norms"] = norms_json(s);
    write_json(c.out_dir / "report.json", r);
    out << r.dump(2) << '\n';
}

void construct(const RunConfig& c, std::ostream& out) {
    FixedPointOptions o;
    o.tol = c.tol;
    o.max_iter = c.max_iter;
    o.delta = c.delta;
    o.f2.delta = c.delta;
    const FixedPointResult fp = outer_fixed_point(c.epsilon, grid_of(c), o);
    const ReductionState& s = fp.state;
    write_field(c.out_dir / "phi", s.phi, "phi");
    write_field(c.out_dir / "f1", s.f1, "f1");
    write_field(c.out_dir / "f2", s.f2, "f2");
    write_field(c.out_dir / "g1", s.g1, "g1");
    const NormSuite ns = norm_suite(s.phi, c.epsilon, c.delta);
    write_norms_csv(c.out_dir / "norms.csv", ns);
    const GpResidualReport gp = gp_system_residual(s);
    write_residual_csv(c.out_dir / "residual.csv", gp);

    json r = base_report(Command::construct, c);
    r["c"] = s.c;
    r["fixed_point"] = {{"iterations", fp.report.iterations},
                        {"converged", fp.report.converged},
                        {"mixed", fp.report.mixed},
                        {"update_star_norms", fp.report.update_star_norms},
                        {"contraction_ratios", fp.report.contraction_ratios},
                        {"final_phi_star", fp.report.final_phi_star}};
    r["f2_residual_sup"] = f2_residual(s, s.f2).max_abs();
    r["norms"] = norms_json(ns);
    r["gp_residual"] = residual_json(gp);
    write_json(c.out_dir / "report.json", r);
    out << r.dump(2) << '\n';
}

void residual(const RunConfig& c, std::ostream& out) {
    if (c.in.empty() || !fs::is_directory(c.in)) throw ValidationError("residual needs --in pointing at a construct directory");
    const fs::path rep = c.in / "report.json";
    if (fs::exists(rep)) {
        std::ifstream f(rep);
        const json j = json::parse(f);
        if (j.contains("config") && j["config"].contains("epsilon") &&
            j["config"]["epsilon"].get<double>() != c.epsilon)
            throw ValidationError("epsilon " + format_number(c.epsilon) + " differs from the construct run (" +
                                  format_number(j["config"]["epsilon"].get<double>()) + ")");
    }
    const LoadedField phi = read_field(c.in / "phi");
    const LoadedField f2 = read_field(c.in / "f2");
    RealField2D pf = phi.field;
    pf.set_symmetry(Symmetry::odd_x_even_y);
    RealField2D ff = f2.field;
    ff.set_symmetry(Symmetry::even_x_even_y);
    const ReductionState s = with_f2(make_reduction_state(c.epsilon, pf.grid(), pf), ff);
    const GpResidualReport gp = gp_system_residual(s);
    write_residual_csv(c.out_dir / "residual.csv", gp);
    json r = base_report(Command::residual, c);
    r["input"] = c.in.string();
    r["gp_residual"] = residual_json(gp);
    write_json(c.out_dir / "residual.json", r);
    out << r.dump(2) << '\n';
}

void error_record(const RunConfig& cfg, const std::string& kind, const std::string& message, int code,
                  std::ostream& err) {
    const json e{{"error", kind}, {"message", message}, {"exit_code", code}};
    err << e.dump() << '\n';
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (!ec) {
        std::ofstream f(cfg.out_dir / "error.json");
        if (f) f << e.dump(2) << '\n';
    }
}

bool power_of_two(int n) { return n >= 16 && (n & (n - 1)) == 0; }

template <class T>
void take(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

Command command_from_string(const std::string& s) {
    const auto it = command_table().find(s);
    if (it == command_table().end()) throw ValidationError("unknown command " + s);
    return it->second;
}

std::string to_string(Command c) {
    for (const auto& [name, cmd] : command_table())
        if (cmd == c) return name;
    return "unknown";
}

void validate(const RunConfig& c) {
    if (!(c.epsilon >= 0.0) || !(c.epsilon <= lump_eps_max)) throw ValidationError("epsilon out of supported range");
    if (!power_of_two(c.nx) || !power_of_two(c.ny)) throw ValidationError("nx and ny must be powers of two >= 16");
    if (!(c.Lx > 0.0) || !(c.Ly > 0.0)) throw ValidationError("Lx and Ly must be positive");
    if (!(c.delta > 0.0) || !(c.delta < 1.0)) throw ValidationError("delta must lie in (0, 1)");
    if (!(c.tol > 0.0)) throw ValidationError("tol must be positive");
    if (c.max_iter < 1) throw ValidationError("max-iter must be at least 1");
    if (c.threads < 0) throw ValidationError("threads must be nonnegative");
    kernel_preset_from_string(c.preset);
}

void apply_config_file(RunConfig& c, const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    static const std::vector<std::string> keys{"epsilon", "nx",  "ny",     "Lx",     "Ly",     "delta", "tol",
                                               "max_iter", "preset", "out", "threads", "seed", "in",    "m",
                                               "n",        "orders", "points", "radii", "rays",  "k"};
    for (const auto& [key, value] : j.items())
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ValidationError("unknown config key " + key);
    try {
        take(j, "epsilon", c.epsilon);
        take(j, "nx", c.nx);
        take(j, "ny", c.ny);
        take(j, "Lx", c.Lx);
        take(j, "Ly", c.Ly);
        take(j, "delta", c.delta);
        take(j, "tol", c.tol);
        take(j, "max_iter", c.max_iter);
        take(j, "preset", c.preset);
        take(j, "threads", c.threads);
        take(j, "seed", c.seed);
        take(j, "m", c.m);
        take(j, "n", c.n);
        take(j, "orders", c.orders);
        take(j, "points", c.points);
        take(j, "radii", c.radii);
        take(j, "rays", c.rays);
        take(j, "k", c.k);
        if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
        if (j.contains("in")) c.in = j["in"].get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }
}

int run(Command command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        validate(cfg);
        set_threads(cfg.threads);
        fs::create_directories(cfg.out_dir);
        switch (command) {
            case Command::lump_check: lump_check(cfg, out); break;
            case Command::kernel: kernel(cfg, out); break;
            case Command::kernel_scan: kernel_scan(cfg, out); break;
            case Command::eigen: eigen(cfg, out); break;
            case Command::norms: norms(cfg, out); break;
            case Command::construct: construct(cfg, out); break;
            case Command::residual: residual(cfg, out); break;
        }
        return 0;
    } catch (const Error& e) {
        const int code = static_cast<int>(e.error_class());
        error_record(cfg, e.kind(), e.what(), code, err);
        return code;
    } catch (const std::exception& e) {
        error_record(cfg, "Error", e.what(), 1, err);
        return 1;
    }
}

}  // namespace transonic::cli
