#include "oclab/simplex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace oclab {

namespace {
constexpr double kReducedTol = 1e-9;
constexpr double kPivotEps = 1e-11;
constexpr double kPhase1Tol = 1e-8;
constexpr int kMaxPivots = 200000;
}  // namespace

SimplexResult revised_simplex(std::size_t m, std::size_t n,
                              const std::function<void(std::size_t, double*)>& column,
                              const std::vector<double>& c, const std::vector<double>& b_in) {
  if (c.size() != n || b_in.size() != m)
    throw std::invalid_argument("revised_simplex: dimension mismatch");

  // Flip rows so that b >= 0; the artificial start is then feasible.
  std::vector<double> sign(m, 1.0), b(b_in);
  for (std::size_t i = 0; i < m; ++i)
    if (b[i] < 0.0) {
      sign[i] = -1.0;
      b[i] = -b[i];
    }
  auto get_col = [&](std::size_t j, double* out) {
    column(j, out);
    for (std::size_t i = 0; i < m; ++i) out[i] *= sign[i];
  };

  std::vector<double> binv(m * m, 0.0);  // basis inverse, row-major
  for (std::size_t i = 0; i < m; ++i) binv[i * m + i] = 1.0;
  std::vector<std::size_t> basis(m);  // ids: 0..n-1 real, n..n+m-1 artificial
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;
  std::vector<char> in_basis(n, 0);

  std::vector<double> xb(b), y(m), col(m), d(m);
  SimplexResult res;

  auto update_xb = [&] {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t k = 0; k < m; ++k) s += binv[i * m + k] * b[k];
      xb[i] = s;
    }
  };

  auto pivot = [&](std::size_t row, std::size_t enter_id) {
    const double piv = d[row];
    for (std::size_t k = 0; k < m; ++k) binv[row * m + k] /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == row || d[i] == 0.0) continue;
      const double f = d[i];
      for (std::size_t k = 0; k < m; ++k) binv[i * m + k] -= f * binv[row * m + k];
    }
    if (basis[row] < n) in_basis[basis[row]] = 0;
    basis[row] = enter_id;
    if (enter_id < n) in_basis[enter_id] = 1;
    ++res.pivots;
    if (res.pivots > kMaxPivots) throw std::runtime_error("revised_simplex: pivot limit");
  };

  auto compute_duals = [&](bool phase1) {
    for (std::size_t k = 0; k < m; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const std::size_t id = basis[i];
        const double ci = phase1 ? (id >= n ? 1.0 : 0.0) : (id >= n ? 0.0 : c[id]);
        s += ci * binv[i * m + k];
      }
      y[k] = s;
    }
  };

  auto run_phase = [&](bool phase1) {
    for (;;) {
      update_xb();
      compute_duals(phase1);
      // Bland entering: first non-basic column with negative reduced cost.
      std::size_t enter = SIZE_MAX;
      for (std::size_t j = 0; j < n && enter == SIZE_MAX; ++j) {
        if (in_basis[j]) continue;
        get_col(j, col.data());
        double rc = phase1 ? 0.0 : c[j];
        for (std::size_t k = 0; k < m; ++k) rc -= y[k] * col[k];
        if (rc < -kReducedTol) enter = j;
      }
      if (enter == SIZE_MAX) return;

      get_col(enter, col.data());
      for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < m; ++k) s += binv[i * m + k] * col[k];
        d[i] = s;
      }
      double theta = std::numeric_limits<double>::infinity();
      std::size_t row = SIZE_MAX;
      for (std::size_t i = 0; i < m; ++i) {
        if (d[i] <= kPivotEps) continue;
        const double t = xb[i] / d[i];
        if (row == SIZE_MAX || t < theta - 1e-12 ||
            (t <= theta + 1e-12 && basis[i] < basis[row])) {
          theta = std::min(theta, t);
          row = i;
        }
      }
      if (row == SIZE_MAX) throw std::runtime_error("revised_simplex: unbounded direction");
      pivot(row, enter);
    }
  };

  run_phase(true);
  update_xb();
  double phase1_obj = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] >= n) phase1_obj += xb[i];
  if (phase1_obj > kPhase1Tol) {
    res.status = LpStatus::infeasible;
    res.objective = std::numeric_limits<double>::infinity();
    return res;
  }

  // Drive residual artificials out with degenerate pivots. Rows are required
  // to be independent, so a usable real column always exists.
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    bool replaced = false;
    for (std::size_t j = 0; j < n && !replaced; ++j) {
      if (in_basis[j]) continue;
      get_col(j, col.data());
      double dij = 0.0;
      for (std::size_t k = 0; k < m; ++k) dij += binv[i * m + k] * col[k];
      if (std::abs(dij) > 1e-9) {
        for (std::size_t r = 0; r < m; ++r) {
          double s = 0.0;
          for (std::size_t k = 0; k < m; ++k) s += binv[r * m + k] * col[k];
          d[r] = s;
        }
        pivot(i, j);
        replaced = true;
      }
    }
    if (!replaced) throw std::runtime_error("revised_simplex: dependent rows");
  }

  run_phase(false);
  update_xb();

  res.status = LpStatus::optimal;
  res.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) res.x[basis[i]] = std::max(0.0, xb[i]);
  res.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) res.objective += c[j] * res.x[j];

  compute_duals(false);
  res.duals.assign(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) res.duals[k] = y[k] * sign[k];
  double residual = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    get_col(j, col.data());
    double rc = c[j];
    for (std::size_t k = 0; k < m; ++k) rc -= y[k] * col[k];
    residual = std::max(residual, -rc);
  }
  res.dual_residual = std::max(0.0, residual);
  return res;
}

}  // namespace oclab
