// |s| on the g x g grid as a CSV matrix and an 8-bit binary PGM. Pixel
// (row, col) shows grid cell q = row * g + col; the peak maps to 255.

#pragma once

#include <string>

#include "crpca/numerics.hpp"

namespace crpca {

struct GridImage {
  Index side = 0;
  std::string csv;
  std::string pgm;
};

/// Throws std::invalid_argument unless s.size() == side * side. A side of 0
/// infers it from the length.
GridImage render_grid_image(const CVector& s, Index side = 0);

}  // namespace crpca
