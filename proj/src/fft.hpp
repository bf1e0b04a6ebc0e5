#pragma once

#include <span>

#include "transonic/grid_field.hpp"

namespace transonic::fft {

// Unnormalised r2c transform into the ny x (nx/2+1) half spectrum.
void forward(const Grid2D& g, std::span<const double> in, std::span<cplx> out);
// Normalised c2r transform (divides by nx*ny).
void inverse(const Grid2D& g, std::span<const cplx> in, std::span<double> out);

}  // namespace transonic::fft
