#pragma once

#include <filesystem>
#include <string>

#include "transonic/grid_field.hpp"

namespace transonic {

// Writes `<stem>.bin` (little-endian float64, x fastest) and `<stem>.json`.
void write_field(const std::filesystem::path& stem, const RealField2D& f, const std::string& quantity);

struct LoadedField {
    RealField2D field;
    std::string quantity;
};

// Accepts either the stem or the `.bin` path.
LoadedField read_field(const std::filesystem::path& path);

}  // namespace transonic
