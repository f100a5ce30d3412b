#include "divlab/grid.hpp"

#include <cmath>

namespace divlab {

Grid make_grid(int d, double R, double h) {
  if (d != 2 && d != 3)
    fail(ErrKind::schema, "grid: dimension must be 2 or 3, got " + fmt_i(d));
  if (!(R > 0.0) || !(h > 0.0)) fail(ErrKind::schema, "grid: R and h must be positive");
  const double steps = 2.0 * R / h;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, steps))
    fail(ErrKind::schema, "grid: 2R/h must be an integer (R = " + fmt_g(R) +
                              ", h = " + fmt_g(h) + ")");
  Grid g;
  g.d = d;
  g.R = R;
  g.h = h;
  g.m = static_cast<int>(rounded) - 1;
  if (g.m < 3) fail(ErrKind::schema, "grid: fewer than 3 interior nodes per axis");
  g.n = 1;
  for (int k = 0; k < d; ++k) g.n *= g.m;
  return g;
}

}  // namespace divlab
