#include "oclab/transport.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>
#include <stdexcept>

#include "oclab/numfmt.hpp"

namespace oclab {

namespace {

constexpr double kEnterTol = 1e-10;   // reduced cost must beat this to enter
constexpr double kDegenEps = 1e-12;   // allocations at or below are degenerate

struct Cell {
  std::size_t i, j;
};

// Spanning-tree basis over bipartite nodes: rows 0..m-1, cols m..m+n-1.
class Basis {
 public:
  Basis(std::size_t m, std::size_t n) : m_(m), n_(n), adj_(m + n) {}

  void add(Cell c) {
    cells_.push_back(c);
    rebuild_ = true;
  }
  void remove(std::size_t pos) {
    cells_[pos] = cells_.back();
    cells_.pop_back();
    rebuild_ = true;
  }
  const std::vector<Cell>& cells() const { return cells_; }

  const std::vector<std::vector<std::size_t>>& adjacency() {
    if (rebuild_) {
      for (auto& a : adj_) a.clear();
      for (std::size_t k = 0; k < cells_.size(); ++k) {
        adj_[cells_[k].i].push_back(k);
        adj_[m_ + cells_[k].j].push_back(k);
      }
      rebuild_ = false;
    }
    return adj_;
  }

  std::size_t m_, n_;

 private:
  std::vector<Cell> cells_;
  std::vector<std::vector<std::size_t>> adj_;
  bool rebuild_ = true;
};

void compute_potentials(Basis& basis, const std::vector<double>& cost, std::size_t m,
                        std::size_t n, std::vector<double>& u, std::vector<double>& v) {
  const auto& adj = basis.adjacency();
  const auto& cells = basis.cells();
  std::vector<char> seen(m + n, 0);
  u.assign(m, 0.0);
  v.assign(n, 0.0);
  std::queue<std::size_t> q;
  q.push(0);
  seen[0] = 1;
  while (!q.empty()) {
    std::size_t node = q.front();
    q.pop();
    for (std::size_t k : adj[node]) {
      const Cell c = cells[k];
      const std::size_t other = node < m ? m + c.j : c.i;
      if (seen[other]) continue;
      seen[other] = 1;
      if (other >= m)
        v[c.j] = cost[c.i * n + c.j] - u[c.i];
      else
        u[c.i] = cost[c.i * n + c.j] - v[c.j];
      q.push(other);
    }
  }
  for (char s : seen) {
    if (!s) throw std::runtime_error("transport: basis lost tree connectivity");
  }
}

// Vertex path between row i and col j through the basis tree.
std::vector<std::size_t> tree_path(Basis& basis, std::size_t m, std::size_t from_row,
                                   std::size_t to_col) {
  const auto& adj = basis.adjacency();
  const auto& cells = basis.cells();
  const std::size_t total = adj.size();
  std::vector<std::size_t> parent(total, SIZE_MAX);
  std::vector<char> seen(total, 0);
  std::queue<std::size_t> q;
  q.push(from_row);
  seen[from_row] = 1;
  const std::size_t target = m + to_col;
  while (!q.empty()) {
    std::size_t node = q.front();
    q.pop();
    if (node == target) break;
    for (std::size_t k : adj[node]) {
      const Cell c = cells[k];
      const std::size_t other = node < m ? m + c.j : c.i;
      if (seen[other]) continue;
      seen[other] = 1;
      parent[other] = node;
      q.push(other);
    }
  }
  std::vector<std::size_t> path;
  for (std::size_t node = target; node != SIZE_MAX; node = parent[node]) path.push_back(node);
  std::reverse(path.begin(), path.end());
  return path;  // from_row ... target
}

}  // namespace

TransportPlan solve_transport(const std::vector<double>& a_in, const std::vector<double>& b_in,
                              const std::vector<double>& cost) {
  const std::size_t m = a_in.size();
  const std::size_t n = b_in.size();
  if (m == 0 || n == 0 || cost.size() != m * n)
    throw std::invalid_argument("solve_transport: bad dimensions");
  double sa = 0.0, sb = 0.0;
  for (double x : a_in) {
    if (!(x >= 0.0)) throw std::invalid_argument("solve_transport: negative supply");
    sa += x;
  }
  for (double x : b_in) {
    if (!(x >= 0.0)) throw std::invalid_argument("solve_transport: negative demand");
    sb += x;
  }
  if (sa <= 0.0 || sb <= 0.0)
    throw std::invalid_argument("solve_transport: degenerate zero-mass marginals");
  if (std::abs(sa - sb) > 1e-9)
    throw std::invalid_argument("solve_transport: unbalanced marginals");

  std::vector<double> a(a_in), b(b_in);
  // Absorb round-off imbalance into the largest demand.
  b[std::max_element(b.begin(), b.end()) - b.begin()] += sa - sb;

  TransportPlan plan;
  plan.mass.assign(m * n, 0.0);
  Basis basis(m, n);

  // Northwest-corner initial basic feasible solution: m+n-1 cells.
  {
    std::vector<double> ar(a), br(b);
    std::size_t i = 0, j = 0;
    for (std::size_t count = 0; count < m + n - 1; ++count) {
      double t = std::max(0.0, std::min(ar[i], br[j]));
      plan.mass[i * n + j] = t;
      basis.add({i, j});
      ar[i] -= t;
      br[j] -= t;
      if (count == m + n - 2) break;
      if (ar[i] <= br[j] && i + 1 < m)
        ++i;
      else if (j + 1 < n)
        ++j;
      else
        ++i;
    }
  }

  std::vector<double> u, v;
  std::vector<char> basic(m * n, 0);
  for (const Cell& c : basis.cells()) basic[c.i * n + c.j] = 1;

  bool bland = false;
  int consecutive_degenerate = 0;
  const int max_pivots = 1000000;
  for (;; ++plan.pivots) {
    if (plan.pivots >= max_pivots)
      throw std::runtime_error("solve_transport: pivot limit exceeded");
    compute_potentials(basis, cost, m, n, u, v);

    // Entering cell: Dantzig most-negative reduced cost, or first eligible
    // in row-major order while in Bland anti-cycling mode.
    std::size_t ei = SIZE_MAX, ej = SIZE_MAX;
    double best = -kEnterTol;
    for (std::size_t i = 0; i < m && !(bland && ei != SIZE_MAX); ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (basic[i * n + j]) continue;
        const double r = cost[i * n + j] - u[i] - v[j];
        if (r < best) {
          best = r;
          ei = i;
          ej = j;
          if (bland) break;
        }
      }
    if (ei == SIZE_MAX) break;  // optimal

    const auto path = tree_path(basis, m, ei, ej);
    // Cycle: entering (+), then alternating -, +, ... along the tree path.
    std::vector<Cell> minus, plus;
    plus.push_back({ei, ej});
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      const std::size_t pa = path[k], pb = path[k + 1];
      const Cell c = pa < m ? Cell{pa, pb - m} : Cell{pb, pa - m};
      if (k % 2 == 0)
        minus.push_back(c);
      else
        plus.push_back(c);
    }

    double theta = std::numeric_limits<double>::infinity();
    for (const Cell& c : minus) theta = std::min(theta, plan.mass[c.i * n + c.j]);
    theta = std::max(0.0, theta);
    // The minimum is attained exactly; ties leave by smallest (i, j).
    Cell leave{SIZE_MAX, SIZE_MAX};
    for (const Cell& c : minus) {
      if (plan.mass[c.i * n + c.j] <= theta &&
          (c.i < leave.i || (c.i == leave.i && c.j < leave.j)))
        leave = c;
    }

    for (const Cell& c : plus) plan.mass[c.i * n + c.j] += theta;
    for (const Cell& c : minus) {
      double& x = plan.mass[c.i * n + c.j];
      x = std::max(0.0, x - theta);
    }
    plan.mass[leave.i * n + leave.j] = 0.0;

    std::size_t leave_pos = SIZE_MAX;
    for (std::size_t k = 0; k < basis.cells().size(); ++k) {
      if (basis.cells()[k].i == leave.i && basis.cells()[k].j == leave.j) {
        leave_pos = k;
        break;
      }
    }
    basis.remove(leave_pos);
    basis.add({ei, ej});
    basic[leave.i * n + leave.j] = 0;
    basic[ei * n + ej] = 1;

    if (theta <= kDegenEps) {
      if (++consecutive_degenerate > 50) bland = true;
    } else {
      consecutive_degenerate = 0;
      bland = false;
    }
  }

  plan.row_potential = u;
  plan.col_potential = v;
  plan.cost = 0.0;
  double residual = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      plan.cost += plan.mass[i * n + j] * cost[i * n + j];
      const double r = cost[i * n + j] - u[i] - v[j];
      residual = std::max(residual, basic[i * n + j] ? std::abs(r) : std::max(0.0, -r));
    }
  plan.dual_residual = residual;
  return plan;
}

TransportResult ot_solve(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho) {
  if (rho.rows() != mu.size() || rho.cols() != psi.size())
    throw std::invalid_argument("ot_solve: distortion shape mismatch");
  TransportPlan plan = solve_transport(mu.mass(), psi.mass(), rho.cost());
  JointPmf coupling(mu.alphabet(), psi.alphabet(), std::move(plan.mass));
  return TransportResult{std::move(coupling), plan.cost, plan.pivots, plan.dual_residual};
}

TransportResult quantile_coupling_1d(const Pmf& mu, const Pmf& psi) {
  const std::size_t m = mu.size(), n = psi.size();
  std::vector<double> mass(m * n, 0.0);
  double cost = 0.0;
  std::size_t i = 0, j = 0;
  double ar = mu[0], br = psi[0];
  int steps = 0;
  while (true) {
    const double t = std::max(0.0, std::min(ar, br));
    mass[i * n + j] += t;
    const double d = mu.alphabet().label(i) - psi.alphabet().label(j);
    cost += t * d * d;
    ar -= t;
    br -= t;
    ++steps;
    if (ar <= br) {
      if (i + 1 == m) break;
      ar = mu[++i];
    } else {
      if (j + 1 == n) break;
      br = psi[++j];
    }
  }
  // Sweep may end before exhausting the other side's round-off residue.
  JointPmf coupling(mu.alphabet(), psi.alphabet(), std::move(mass));
  return TransportResult{std::move(coupling), cost, steps,
                         std::numeric_limits<double>::quiet_NaN()};
}

std::size_t coupling_sampler(const TransportResult& t, std::size_t x, Rng& rng) {
  const JointPmf& v = t.coupling;
  if (x >= v.rows()) throw std::invalid_argument("coupling_sampler: x out of range");
  double row_mass = 0.0;
  for (std::size_t j = 0; j < v.cols(); ++j) row_mass += v.at(x, j);
  if (row_mass <= 0.0)
    throw std::invalid_argument("coupling_sampler: conditioning on zero-mass x");
  return rng.categorical(v.mass().data() + x * v.cols(), v.cols());
}

namespace {
// One Strassen feasibility sweep at level alpha; fills `witness` with the
// first violated subset if infeasible.
bool strassen_feasible(const std::vector<double>& a, const std::vector<double>& b,
                       const DistortionMatrix& d, double alpha, std::uint32_t* witness) {
  const std::size_t n = a.size();
  const std::uint32_t full = (1u << n) - 1u;
  std::vector<std::uint32_t> ball(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t e = 0; e < n; ++e)
      if (d.at(e, i) < alpha) ball[i] |= 1u << e;

  std::vector<double> am(full + 1, 0.0), bm(full + 1, 0.0);
  std::vector<std::uint32_t> blow(full + 1, 0);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const unsigned i = static_cast<unsigned>(std::countr_zero(mask));
    const std::uint32_t rest = mask & (mask - 1);
    am[mask] = am[rest] + a[i];
    bm[mask] = bm[rest] + b[i];
    blow[mask] = blow[rest] | ball[i];
  }
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    if (am[mask] > bm[blow[mask]] + alpha + 1e-15 ||
        bm[mask] > am[blow[mask]] + alpha + 1e-15) {
      if (witness) *witness = mask;
      return false;
    }
  }
  return true;
}
}  // namespace

ProkhorovResult prokhorov_distance(const Pmf& a, const Pmf& b, const DistortionMatrix& metric) {
  if (!(a.alphabet() == b.alphabet()))
    throw std::invalid_argument("prokhorov_distance: alphabets must match");
  const std::size_t n = a.size();
  if (n > 20) throw std::invalid_argument("prokhorov_distance: support larger than 20");
  if (metric.rows() != n || metric.cols() != n)
    throw std::invalid_argument("prokhorov_distance: metric shape mismatch");

  if (a.mass() == b.mass()) return ProkhorovResult{0.0, 0};

  double lo = 0.0, hi = 1.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (strassen_feasible(a.mass(), b.mass(), metric, mid, nullptr))
      hi = mid;
    else
      lo = mid;
  }
  ProkhorovResult r;
  r.distance = hi;
  if (lo > 0.0) strassen_feasible(a.mass(), b.mass(), metric, lo, &r.witness_set);
  return r;
}

double tv_distance(const Pmf& a, const Pmf& b) {
  if (!(a.alphabet() == b.alphabet()))
    throw std::invalid_argument("tv_distance: alphabets must match");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

double KlDivergence::bits() const { return nats / std::numbers::ln2; }

KlDivergence kl_divergence(const Pmf& a, const Pmf& b) {
  if (!(a.alphabet() == b.alphabet()))
    throw std::invalid_argument("kl_divergence: alphabets must match");
  double nats = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] <= 0.0) continue;
    if (b[i] <= 0.0) return KlDivergence{std::numeric_limits<double>::infinity()};
    nats += a[i] * std::log(a[i] / b[i]);
  }
  return KlDivergence{std::max(0.0, nats)};
}

void write_coupling_csv(std::ostream& os, const JointPmf& v) {
  os << "x_label,y_label,mass\n";
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) {
      if (v.at(i, j) <= 0.0) continue;
      os << format_double(v.x_alphabet().label(i)) << ',' << format_double(v.y_alphabet().label(j))
         << ',' << format_double(v.at(i, j)) << '\n';
    }
}

}  // namespace oclab
