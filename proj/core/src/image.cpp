#include "crpca/image.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace crpca {

GridImage render_grid_image(const CVector& s, Index side) {
  const Index q = s.size();
  const Index g = side > 0 ? side : static_cast<Index>(std::llround(std::sqrt(static_cast<double>(q))));
  if (q == 0 || g * g != q) {
    throw std::invalid_argument("vector length " + std::to_string(q) + " is not a square grid");
  }
  const RVector mag = s.cwiseAbs();
  const double peak = mag.maxCoeff();
  GridImage img;
  img.side = g;
  img.pgm = "P5\n" + std::to_string(g) + " " + std::to_string(g) + "\n255\n";
  char buf[32];
  for (Index r = 0; r < g; ++r) {
    for (Index c = 0; c < g; ++c) {
      const double v = mag(r * g + c);
      std::snprintf(buf, sizeof buf, "%.10g", v);
      if (c > 0) img.csv += ',';
      img.csv += buf;
      const long level = peak > 0.0 ? std::lround(255.0 * v / peak) : 0;
      img.pgm += static_cast<char>(static_cast<unsigned char>(level));
    }
    img.csv += '\n';
  }
  return img;
}

}  // namespace crpca
