#include "divlab/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace divlab {

namespace {

struct StencilEntry {
  std::int64_t col;
  double v;   // K value
  double vp;  // K' value
};

// Insertion sort: rows have at most 19 entries.
void sort_entries(StencilEntry* e, int n) {
  for (int i = 1; i < n; ++i) {
    StencilEntry key = e[i];
    int j = i - 1;
    while (j >= 0 && e[j].col > key.col) {
      e[j + 1] = e[j];
      --j;
    }
    e[j + 1] = key;
  }
}

struct Workspace {
  const Grid& g;
  int d, m, me;
  double factor;  // h^{d-2}
  std::vector<std::pair<int, int>> pairs;

  // Extended-grid coefficient arrays (boundary nodes included): diagonal
  // weights rho*a_kk per axis, pair weights rho*a_kl and rho*c_kl.
  std::vector<std::vector<double>> qa_diag, qa_pair, qc_pair;
  std::vector<double> mu;          // interior
  std::vector<double> bdrift;      // interior * d, only when Bbar present
  bool use_cross_a = false, use_c = false, use_b = false;

  explicit Workspace(const Grid& grid) : g(grid), d(grid.d), m(grid.m), me(grid.m + 2) {}

  std::int64_t ext_linear(const int* emi) const {
    std::int64_t idx = 0;
    for (int k = d - 1; k >= 0; --k) idx = idx * me + emi[k];
    return idx;
  }
  void ext_multi(std::int64_t idx, int* emi) const {
    for (int k = 0; k < d; ++k) {
      emi[k] = static_cast<int>(idx % me);
      idx /= me;
    }
  }
};

void fill_coefficient_arrays(const CoefficientField& f, Workspace& w) {
  const int d = w.d;
  std::int64_t n_ext = 1;
  for (int k = 0; k < d; ++k) n_ext *= w.me;

  w.use_cross_a = !f.a_diagonal;
  w.use_c = f.has_C() || static_cast<bool>(f.rho_C);
  w.use_b = f.has_B();

  for (int k = 0; k < d; ++k) (void)k;
  w.qa_diag.assign(d, std::vector<double>(n_ext));
  for (int k = 0; k < d; ++k)
    for (int l = k + 1; l < d; ++l) w.pairs.emplace_back(k, l);
  if (w.use_cross_a) w.qa_pair.assign(w.pairs.size(), std::vector<double>(n_ext));
  if (w.use_c) w.qc_pair.assign(w.pairs.size(), std::vector<double>(n_ext));

#pragma omp parallel for schedule(static)
  for (std::int64_t e = 0; e < n_ext; ++e) {
    int emi[3];
    double x[3];
    w.ext_multi(e, emi);
    for (int k = 0; k < d; ++k) x[k] = -w.g.R + emi[k] * w.g.h;
    double mat[9];
    eval_rho_A(f, x, mat);
    if (!all_finite(mat, d * d))
      fail(ErrKind::evaluation, "assemble: weighted diffusion matrix non-finite at a node");
    for (int k = 0; k < d; ++k) w.qa_diag[k][e] = mat[k * d + k];
    if (w.use_cross_a)
      for (size_t p = 0; p < w.pairs.size(); ++p)
        w.qa_pair[p][e] = mat[w.pairs[p].first * d + w.pairs[p].second];
    if (w.use_c) {
      eval_rho_C(f, x, mat);
      if (!all_finite(mat, d * d))
        fail(ErrKind::evaluation, "assemble: weighted C part non-finite at a node");
      for (size_t p = 0; p < w.pairs.size(); ++p)
        w.qc_pair[p][e] = mat[w.pairs[p].first * d + w.pairs[p].second];
    }
  }

  const double cell = std::pow(w.g.h, d);
  w.mu.assign(w.g.n, 0.0);
  if (w.use_b) w.bdrift.assign(static_cast<size_t>(w.g.n) * d, 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < w.g.n; ++i) {
    int mi[3];
    double x[3];
    w.g.multi(i, mi);
    w.g.point(mi, x);
    const double r = f.rho(x);
    if (!(r >= 0.0) || !std::isfinite(r))
      fail(ErrKind::evaluation, "assemble: rho non-finite or negative at a node");
    w.mu[i] = r * cell;
    if (w.use_b) {
      double b[3];
      eval_B(f, x, b);
      if (!all_finite(b, d))
        fail(ErrKind::evaluation, "assemble: drift non-finite at a node");
      for (int k = 0; k < d; ++k) w.bdrift[static_cast<size_t>(i) * d + k] = b[k];
    }
  }
}

// Builds the (sorted) row of interior node i. Returns the entry count.
int build_row(const Workspace& w, std::int64_t i, StencilEntry* out) {
  const int d = w.d;
  const int m = w.m;
  int mi[3];
  w.g.multi(i, mi);
  int emi[3];
  for (int k = 0; k < d; ++k) emi[k] = mi[k] + 1;
  const std::int64_t e0 = w.ext_linear(emi);

  std::int64_t ext_stride[3];
  ext_stride[0] = 1;
  for (int k = 1; k < d; ++k) ext_stride[k] = ext_stride[k - 1] * w.me;
  std::int64_t int_stride[3];
  int_stride[0] = 1;
  for (int k = 1; k < d; ++k) int_stride[k] = int_stride[k - 1] * m;

  // Accumulators: center, 2d cardinals, 4 corners per pair.
  double diag_v = 0.0, diag_vp = 0.0;
  double card_v[6] = {0, 0, 0, 0, 0, 0}, card_vp[6] = {0, 0, 0, 0, 0, 0};
  double corn_v[12] = {0}, corn_vp[12] = {0};

  const double half_factor = 0.5 * w.factor;
  for (int k = 0; k < d; ++k) {
    const double qc = w.qa_diag[k][e0];
    const double qp = w.qa_diag[k][e0 + ext_stride[k]];
    const double qm = w.qa_diag[k][e0 - ext_stride[k]];
    const double wp = 0.5 * (qc + qp);
    const double wm = 0.5 * (qm + qc);
    diag_v -= half_factor * (wp + wm);
    card_v[2 * k] += half_factor * wp;      // +e_k
    card_v[2 * k + 1] += half_factor * wm;  // -e_k
  }
  diag_vp = diag_v;
  for (int k = 0; k < 2 * d; ++k) card_vp[k] = card_v[k];

  const double eighth = 0.125 * w.factor;
  for (size_t p = 0; p < w.pairs.size(); ++p) {
    const int k = w.pairs[p].first;
    const int l = w.pairs[p].second;
    // corner slots: 4p + {0: (+k+l), 1: (+k-l), 2: (-k+l), 3: (-k-l)}
    if (w.use_cross_a) {
      const auto& q = w.qa_pair[p];
      const double qkp = q[e0 + ext_stride[k]], qkm = q[e0 - ext_stride[k]];
      const double qlp = q[e0 + ext_stride[l]], qlm = q[e0 - ext_stride[l]];
      const double c0 = eighth * (qkp + qlp);
      const double c1 = -eighth * (qkp + qlm);
      const double c2 = -eighth * (qkm + qlp);
      const double c3 = eighth * (qkm + qlm);
      corn_v[4 * p + 0] += c0;
      corn_v[4 * p + 1] += c1;
      corn_v[4 * p + 2] += c2;
      corn_v[4 * p + 3] += c3;
      corn_vp[4 * p + 0] += c0;
      corn_vp[4 * p + 1] += c1;
      corn_vp[4 * p + 2] += c2;
      corn_vp[4 * p + 3] += c3;
    }
    if (w.use_c) {
      const auto& q = w.qc_pair[p];
      const double qkp = q[e0 + ext_stride[k]], qkm = q[e0 - ext_stride[k]];
      const double qlp = q[e0 + ext_stride[l]], qlm = q[e0 - ext_stride[l]];
      const double c0 = eighth * (qkp - qlp);
      const double c1 = eighth * (-qkp + qlm);
      const double c2 = eighth * (-qkm + qlp);
      const double c3 = eighth * (qkm - qlm);
      corn_v[4 * p + 0] += c0;
      corn_v[4 * p + 1] += c1;
      corn_v[4 * p + 2] += c2;
      corn_v[4 * p + 3] += c3;
      corn_vp[4 * p + 0] -= c0;  // dual operator reverses C
      corn_vp[4 * p + 1] -= c1;
      corn_vp[4 * p + 2] -= c2;
      corn_vp[4 * p + 3] -= c3;
    }
  }

  if (w.use_b) {
    const double scale = w.mu[i] / (2.0 * w.g.h);
    for (int k = 0; k < d; ++k) {
      const double c = scale * w.bdrift[static_cast<size_t>(i) * d + k];
      card_v[2 * k] += c;
      card_v[2 * k + 1] -= c;
      card_vp[2 * k] -= c;  // dual operator reverses Bbar
      card_vp[2 * k + 1] += c;
    }
  }

  // Emit entries whose target node is interior and whose value pair is not
  // identically zero (the diagonal always stays).
  int n = 0;
  out[n++] = {i, diag_v, diag_vp};
  for (int k = 0; k < d; ++k) {
    if (mi[k] + 1 < m && (card_v[2 * k] != 0.0 || card_vp[2 * k] != 0.0))
      out[n++] = {i + int_stride[k], card_v[2 * k], card_vp[2 * k]};
    if (mi[k] - 1 >= 0 && (card_v[2 * k + 1] != 0.0 || card_vp[2 * k + 1] != 0.0))
      out[n++] = {i - int_stride[k], card_v[2 * k + 1], card_vp[2 * k + 1]};
  }
  if (w.use_cross_a || w.use_c) {
    for (size_t p = 0; p < w.pairs.size(); ++p) {
      const int k = w.pairs[p].first;
      const int l = w.pairs[p].second;
      const int sk[4] = {1, 1, -1, -1};
      const int sl[4] = {1, -1, 1, -1};
      for (int q = 0; q < 4; ++q) {
        const int ik = mi[k] + sk[q];
        const int il = mi[l] + sl[q];
        if (ik < 0 || ik >= m || il < 0 || il >= m) continue;
        const double v = corn_v[4 * p + q], vp = corn_vp[4 * p + q];
        if (v == 0.0 && vp == 0.0) continue;
        out[n++] = {i + sk[q] * int_stride[k] + sl[q] * int_stride[l], v, vp};
      }
    }
  }
  sort_entries(out, n);
  return n;
}

}  // namespace

std::int64_t DiscreteOperator::node_at(const double* x) const {
  const Grid& g = grid;
  int mi[3];
  for (int k = 0; k < g.d; ++k) {
    const double t = (x[k] + g.R) / g.h - 1.0;
    const int idx = static_cast<int>(std::lround(t));
    if (idx < 0 || idx >= g.m) return -1;
    mi[k] = idx;
  }
  return g.linear(mi);
}

DiscreteOperator assemble(const CoefficientField& f, const Grid& g,
                          const AssembleOptions& opts) {
  if (f.d != g.d) fail(ErrKind::schema, "assemble: field and grid dimensions differ");
  Workspace w(g);
  w.factor = std::pow(g.h, g.d - 2);
  fill_coefficient_arrays(f, w);

  DiscreteOperator op;
  op.grid = g;
  op.mu = std::move(w.mu);
  w.mu = op.mu;  // build_row still reads mu for the drift scale

  const std::int64_t n = g.n;
  op.K.n = n;
  op.K.rowptr.assign(n + 1, 0);

  std::vector<int> counts(n);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    StencilEntry row[24];
    counts[i] = build_row(w, i, row);
  }
  for (std::int64_t i = 0; i < n; ++i) op.K.rowptr[i + 1] = op.K.rowptr[i] + counts[i];
  const std::int64_t nnz = op.K.rowptr[n];
  op.K.col.resize(nnz);
  op.K.val.resize(nnz);
  if (opts.build_dual) op.valp.resize(nnz);

#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    StencilEntry row[24];
    const int cnt = build_row(w, i, row);
    std::int64_t at = op.K.rowptr[i];
    for (int q = 0; q < cnt; ++q) {
      op.K.col[at] = static_cast<std::int32_t>(row[q].col);
      op.K.val[at] = row[q].v;
      if (opts.build_dual) op.valp[at] = row[q].vp;
      ++at;
    }
  }
  op.has_dual = opts.build_dual;
  return op;
}

void apply_generator(const DiscreteOperator& op, const double* fvec, double* out) {
  spmv(op.K, op.K.val, fvec, out);
  const std::int64_t n = op.K.n;
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    if (!(op.mu[i] > 0.0))
      out[i] = 0.0;
    else
      out[i] /= op.mu[i];
  }
}

double invariance_residual(const DiscreteOperator& op, const std::vector<double>& fvec) {
  const Grid& g = op.grid;
  if (static_cast<std::int64_t>(fvec.size()) != g.n)
    fail(ErrKind::schema, "invariance_residual: vector size does not match grid");
  int mi[3];
  for (std::int64_t i = 0; i < g.n; ++i) {
    g.multi(i, mi);
    if (g.boundary_distance(mi) <= 2 && fvec[i] != 0.0)
      fail(ErrKind::precondition,
           "invariance_residual: test vector must vanish within two grid steps of the boundary");
  }
  std::vector<double> kf(g.n);
  spmv(op.K, op.K.val, fvec.data(), kf.data());
  return kahan_sum(kf.data(), g.n);
}

double duality_residual(const DiscreteOperator& op, int trials, std::uint64_t seed) {
  if (!op.has_dual)
    fail(ErrKind::precondition, "duality_residual: operator was assembled without its dual");
  const std::int64_t n = op.K.n;
  std::vector<double> fv(n), gv(n), tmp(n);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::int64_t i = 0; i < n; ++i) fv[i] = u(rng);
    for (std::int64_t i = 0; i < n; ++i) gv[i] = u(rng);
    // mu-normalize both vectors
    double nf = 0.0, ng = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      nf += op.mu[i] * fv[i] * fv[i];
      ng += op.mu[i] * gv[i] * gv[i];
    }
    nf = 1.0 / std::sqrt(std::max(nf, 1e-300));
    ng = 1.0 / std::sqrt(std::max(ng, 1e-300));
    for (std::int64_t i = 0; i < n; ++i) fv[i] *= nf;
    for (std::int64_t i = 0; i < n; ++i) gv[i] *= ng;

    spmv(op.K, op.K.val, fv.data(), tmp.data());
    const double lhs = dot(tmp.data(), gv.data(), n);
    spmv(op.K, op.valp, gv.data(), tmp.data());
    const double rhs = dot(fv.data(), tmp.data(), n);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace divlab
