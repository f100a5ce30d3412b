#pragma once
// Uniform tensor grid on [-R, R]^d with homogeneous Dirichlet truncation.
// Only interior nodes carry unknowns; boundary nodes are the zero extension.

#include <cstdint>
#include <vector>

#include "divlab/common.hpp"

namespace divlab {

struct Grid {
  int d = 2;
  double R = 8.0;
  double h = 0.25;
  int m = 0;            // interior nodes per axis: 2R/h - 1
  std::int64_t n = 0;   // total interior nodes: m^d

  // interior multi-index component in [0, m) -> coordinate
  double coord(int idx) const { return -R + (idx + 1) * h; }

  std::int64_t linear(const int* mi) const {
    std::int64_t idx = 0;
    for (int k = d - 1; k >= 0; --k) idx = idx * m + mi[k];
    return idx;
  }
  void multi(std::int64_t idx, int* mi) const {
    for (int k = 0; k < d; ++k) {
      mi[k] = static_cast<int>(idx % m);
      idx /= m;
    }
  }
  void point(const int* mi, double* x) const {
    for (int k = 0; k < d; ++k) x[k] = coord(mi[k]);
  }
  // Number of grid steps from this node to the nearest boundary node.
  int boundary_distance(const int* mi) const {
    int dist = m;  // interior index i is i+1 steps from the low wall
    for (int k = 0; k < d; ++k) dist = std::min(dist, std::min(mi[k] + 1, m - mi[k]));
    return dist;
  }
};

// Validates d in {2, 3}, R > 0, h > 0, and 2R/h integral (so the grid closes
// exactly); throws ErrKind::schema otherwise.
Grid make_grid(int d, double R, double h);

}  // namespace divlab
