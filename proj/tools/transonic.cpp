#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "transonic/cli.hpp"

namespace tc = transonic::cli;

int main(int argc, char** argv) {
    CLI::App app{"Transonic travelling-wave construction and checks"};
    std::string command;
    std::optional<double> epsilon, Lx, Ly, delta, tol;
    std::optional<int> nx, ny, max_iter, threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> preset, out, config, in;
    app.add_option("command", command, "lump-check | kernel | kernel-scan | eigen | norms | construct | residual")
        ->required();
    app.add_option("--epsilon", epsilon);
    app.add_option("--nx", nx);
    app.add_option("--ny", ny);
    app.add_option("--Lx", Lx);
    app.add_option("--Ly", Ly);
    app.add_option("--delta", delta);
    app.add_option("--tol", tol);
    app.add_option("--max-iter", max_iter);
    app.add_option("--preset", preset, "normalized | gp");
    app.add_option("--out", out, "output directory");
    app.add_option("--config", config, "JSON file; flags override its values");
    app.add_option("--threads", threads, "falls back to TRANSONIC_THREADS");
    app.add_option("--seed", seed);
    app.add_option("--in", in, "input field or construct directory (norms, residual)");

    auto fail = [](const std::string& kind, const std::string& message) {
        std::cerr << nlohmann::ordered_json{{"error", kind}, {"message", message}, {"exit_code", 1}}.dump() << '\n';
        return 1;
    };
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("UsageError", e.what());
    }

    tc::RunConfig cfg;
    tc::Command cmd{};
    bool threads_from_file = false;
    try {
        cmd = tc::command_from_string(command);
        if (config) {
            tc::apply_config_file(cfg, *config);
            threads_from_file = nlohmann::json::parse(std::ifstream(*config)).contains("threads");
        }
    } catch (const std::exception& e) {
        return fail("ValidationError", e.what());
    }
    if (epsilon) cfg.epsilon = *epsilon;
    if (nx) cfg.nx = *nx;
    if (ny) cfg.ny = *ny;
    if (Lx) cfg.Lx = *Lx;
    if (Ly) cfg.Ly = *Ly;
    if (delta) cfg.delta = *delta;
    if (tol) cfg.tol = *tol;
    if (max_iter) cfg.max_iter = *max_iter;
    if (preset) cfg.preset = *preset;
    if (out) cfg.out_dir = *out;
    if (seed) cfg.seed = *seed;
    if (in) cfg.in = *in;
    if (threads) {
        cfg.threads = *threads;
    } else if (!threads_from_file) {
        if (const char* env = std::getenv("TRANSONIC_THREADS")) {
            try {
                cfg.threads = std::stoi(env);
            } catch (const std::exception&) {
                return fail("ValidationError", std::string("TRANSONIC_THREADS is not an integer: ") + env);
            }
        }
    }
    return tc::run(cmd, cfg, std::cout, std::cerr);
}
