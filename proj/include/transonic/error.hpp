#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace transonic {

// Compact %g rendering of a number for error messages.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

// Exit-code class of an error when surfaced through the command line.
enum class ErrorClass { validation = 1, solver = 2 };

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message, ErrorClass cls)
        : std::runtime_error(message), kind_(std::move(kind)), cls_(cls) {}
    const std::string& kind() const { return kind_; }
    ErrorClass error_class() const { return cls_; }

private:
    std::string kind_;
    ErrorClass cls_;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& m) : Error("ValidationError", m, ErrorClass::validation) {}
};
struct GridMismatch : Error {
    explicit GridMismatch(const std::string& m) : Error("GridMismatch", m, ErrorClass::validation) {}
};
struct SymmetryViolation : Error {
    explicit SymmetryViolation(const std::string& m) : Error("SymmetryViolation", m, ErrorClass::validation) {}
};
struct NonZeroMean : Error {
    explicit NonZeroMean(const std::string& m) : Error("NonZeroMean", m, ErrorClass::validation) {}
};
struct NotConverged : Error {
    explicit NotConverged(const std::string& m) : Error("NotConverged", m, ErrorClass::solver) {}
};
struct QuadratureNotConverged : Error {
    explicit QuadratureNotConverged(const std::string& m)
        : Error("QuadratureNotConverged", m, ErrorClass::solver) {}
};
struct GuardViolated : Error {
    explicit GuardViolated(const std::string& m) : Error("GuardViolated", m, ErrorClass::solver) {}
};
struct MultipleNegative : Error {
    explicit MultipleNegative(const std::string& m) : Error("MultipleNegative", m, ErrorClass::solver) {}
};

}  // namespace transonic
