#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "transonic/cli.hpp"
#include "transonic/error.hpp"

using namespace transonic;
using namespace transonic::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "transonic_cli_test" / name;
    fs::remove_all(p);
    return p;
}

RunConfig small(const std::string& name) {
    RunConfig c;
    c.nx = c.ny = 256;
    c.Lx = c.Ly = 20.0;
    c.out_dir = scratch(name);
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

struct Outcome {
    int code;
    std::string out, err;
};

Outcome exec(Command cmd, const RunConfig& c) {
    std::ostringstream out, err;
    const int code = run(cmd, c, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("command names round trip") {
    for (const char* s : {"lump-check", "kernel", "kernel-scan", "eigen", "norms", "construct", "residual"})
        CHECK(to_string(command_from_string(s)) == s);
    CHECK_THROWS_AS(command_from_string("plot"), ValidationError);
}

TEST_CASE("epsilon outside the supported range exits 1 with a JSON error record") {
    RunConfig c = small("eps09");
    c.epsilon = 0.9;
    const Outcome o = exec(Command::construct, c);
    CHECK(o.code == 1);
    const auto e = nlohmann::json::parse(o.err);
    CHECK(e["error"] == "ValidationError");
    CHECK(e["message"] == "epsilon out of supported range");
    CHECK(e["exit_code"] == 1);
    CHECK(nlohmann::json::parse(slurp(c.out_dir / "error.json")) == e);
}

TEST_CASE("kernel-scan radii beyond Lx/2 exit 1") {
    RunConfig c = small("scan");
    c.radii = {5.0, 10.0, 30.0};
    CHECK(exec(Command::kernel_scan, c).code == 1);
    c.radii = {5.0, 10.0};
    c.epsilon = 0.2;
    const Outcome o = exec(Command::kernel_scan, c);
    CHECK(o.code == 0);
    CHECK(fs::exists(c.out_dir / "scan.csv"));
    CHECK(nlohmann::json::parse(o.out)["fitted_slope_per_ray"].size() == c.rays.size());
}

TEST_CASE("validation of the remaining fields") {
    RunConfig c = small("validate");
    CHECK_NOTHROW(validate(c));
    RunConfig bad = c;
    bad.nx = 100;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = c;
    bad.tol = 0.0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = c;
    bad.max_iter = 0;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = c;
    bad.preset = "other";
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = c;
    bad.delta = 1.5;
    CHECK_THROWS_AS(validate(bad), ValidationError);
}

TEST_CASE("config file values and rejection of unknown keys") {
    const fs::path dir = scratch("config");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "good.json") << R"({"epsilon": 0.2, "nx": 128, "radii": [3, 6], "out": "x", "k": 3})";
        std::ofstream(dir / "bad.json") << R"({"epsilon": 0.2, "colour": 1})";
        std::ofstream(dir / "typed.json") << R"({"nx": "many"})";
    }
    RunConfig c;
    apply_config_file(c, dir / "good.json");
    CHECK(c.epsilon == 0.2);
    CHECK(c.nx == 128);
    CHECK(c.ny == 512);
    CHECK(c.radii == std::vector<double>{3.0, 6.0});
    CHECK(c.out_dir == fs::path("x"));
    CHECK(c.k == 3);
    CHECK_THROWS_AS(apply_config_file(c, dir / "bad.json"), ValidationError);
    CHECK_THROWS_AS(apply_config_file(c, dir / "typed.json"), ValidationError);
    CHECK_THROWS_AS(apply_config_file(c, dir / "missing.json"), ValidationError);
}

TEST_CASE("lump-check reports the closed-form residual") {
    const RunConfig c = small("lump");
    const Outcome o = exec(Command::lump_check, c);
    REQUIRE(o.code == 0);
    CHECK(nlohmann::json::parse(o.out)["residual_sup"].get<double>() <= 1e-8);
    CHECK(fs::exists(c.out_dir / "q.bin"));
    CHECK(fs::exists(c.out_dir / "q.json"));
}

TEST_CASE("construct writes its fields, is bit-identical on rerun, and feeds residual and norms") {
    RunConfig a = small("construct_a");
    RunConfig b = small("construct_b");
    REQUIRE(exec(Command::construct, a).code == 0);
    REQUIRE(exec(Command::construct, b).code == 0);
    for (const char* f : {"phi.bin", "f1.bin", "f2.bin", "g1.bin", "report.json", "norms.csv", "residual.csv"}) {
        INFO(f);
        REQUIRE(fs::exists(a.out_dir / f));
        CHECK(slurp(a.out_dir / f) == slurp(b.out_dir / f));
    }
    const auto rep = nlohmann::json::parse(slurp(a.out_dir / "report.json"));
    CHECK(rep["fixed_point"]["converged"] == true);
    CHECK(rep["config"]["seed"] == 1);

    RunConfig r = small("residual");
    r.in = a.out_dir;
    const Outcome ro = exec(Command::residual, r);
    REQUIRE(ro.code == 0);
    const auto res = nlohmann::json::parse(ro.out)["gp_residual"];
    CHECK(res["res1_sup"] == rep["gp_residual"]["res1_sup"]);
    CHECK(fs::exists(r.out_dir / "residual.csv"));
    r.epsilon = 0.2;
    CHECK(exec(Command::residual, r).code == 1);

    RunConfig n = small("norms");
    n.in = a.out_dir;
    const Outcome no = exec(Command::norms, n);
    REQUIRE(no.code == 0);
    CHECK(nlohmann::json::parse(no.out)["norms"]["star"] == rep["norms"]["star"]);
    n.in.clear();
    CHECK(exec(Command::norms, n).code == 1);
}

TEST_CASE("solver failure exits 2") {
    RunConfig c = small("noconv");
    c.max_iter = 1;
    const Outcome o = exec(Command::construct, c);
    CHECK(o.code == 2);
    CHECK(nlohmann::json::parse(o.err)["error"] == "NotConverged");
}

TEST_CASE("eigen writes phi0, phi1 and one negative eigenvalue") {
    RunConfig c = small("eigen");
    c.nx = c.ny = 128;
    const Outcome o = exec(Command::eigen, c);
    REQUIRE(o.code == 0);
    CHECK(nlohmann::json::parse(o.out)["negative_count"] == 1);
    for (const char* f : {"phi0.bin", "phi1.bin", "eigenvalues.csv"}) CHECK(fs::exists(c.out_dir / f));
}

TEST_CASE("kernel cross-check is reproducible for a fixed seed") {
    RunConfig c = small("kernel_a");
    c.epsilon = 0.2;
    c.orders = {{1, 0}};
    c.points = 3;
    RunConfig d = c;
    d.out_dir = scratch("kernel_b");
    REQUIRE(exec(Command::kernel, c).code == 0);
    REQUIRE(exec(Command::kernel, d).code == 0);
    CHECK(slurp(c.out_dir / "kernel_points.csv") == slurp(d.out_dir / "kernel_points.csv"));
    c.points = 0;
    CHECK(exec(Command::kernel, c).code == 1);
}
