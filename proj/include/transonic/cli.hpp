#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace transonic::cli {

enum class Command { lump_check, kernel, kernel_scan, eigen, norms, construct, residual };

Command command_from_string(const std::string& s);
std::string to_string(Command c);

struct RunConfig {
    double epsilon = 0.1;
    int nx = 512;
    int ny = 512;
    double Lx = 40.0;
    double Ly = 40.0;
    double delta = 0.1;
    double tol = 1e-8;
    int max_iter = 200;
    std::string preset = "normalized";
    std::filesystem::path out_dir = "out";
    int threads = 0;  // 0 keeps the OpenMP default
    std::uint64_t seed = 1;

    // Command inputs that have no flag; settable from the --config file.
    std::filesystem::path in;                                   // norms: field; residual: construct directory
    int m = 0;                                                  // kernel-scan order
    int n = 2;
    std::vector<std::pair<int, int>> orders{{1, 0}, {2, 0}, {0, 2}, {1, 2}};  // kernel cross-check
    int points = 10;                                            // kernel cross-check points
    std::vector<double> radii{5.0, 7.5, 10.0, 15.0, 20.0};      // kernel-scan
    std::vector<double> rays{0.0, 15.0, 45.0, 75.0};            // kernel-scan, degrees
    int k = 2;                                                  // eigen
};

// Throws ValidationError on out-of-range fields.
void validate(const RunConfig& cfg);

// Overwrites the fields present in a JSON object; unknown keys are rejected.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

// Executes one command and returns the exit status: 0 success, 1 validation error, 2 solver failure.
// A failure writes a JSON error record to err and, when possible, error.json in out_dir.
int run(Command command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace transonic::cli
