#include "oclab/optquant.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "oclab/numfmt.hpp"
#include "oclab/rng.hpp"
#include "oclab/stats.hpp"
#include "oclab/transport.hpp"

namespace oclab {

namespace {

std::size_t distinct_outputs(const std::vector<std::size_t>& map) {
  std::vector<std::size_t> s(map);
  std::sort(s.begin(), s.end());
  return static_cast<std::size_t>(std::unique(s.begin(), s.end()) - s.begin());
}

void enumerate_all_maps(std::size_t x_size, std::size_t y_size, std::size_t m, std::size_t cap,
                        std::vector<DeterministicQuantizer>& out) {
  const double total = std::pow(static_cast<double>(y_size), static_cast<double>(x_size));
  if (total > static_cast<double>(cap))
    throw std::invalid_argument("enumerate_quantizer_maps: |Y|^|X| exceeds cap");
  std::vector<std::size_t> map(x_size, 0);
  for (;;) {
    if (distinct_outputs(map) <= m) out.emplace_back(map, m);
    std::size_t pos = x_size;
    while (pos > 0) {
      if (++map[pos - 1] < y_size) break;
      map[pos - 1] = 0;
      --pos;
    }
    if (pos == 0) break;
  }
}

// Interval-cell maps: compositions of [0, x_size) into j contiguous parts,
// each part labeled with a distinct output (injective, so every map is
// produced exactly once).
void enumerate_interval_maps(std::size_t x_size, std::size_t y_size, std::size_t m,
                             std::size_t cap, std::vector<DeterministicQuantizer>& out) {
  const std::size_t jmax = std::min({m, x_size, y_size});
  for (std::size_t j = 1; j <= jmax; ++j) {
    // Boundaries: j-1 cut positions out of x_size-1.
    std::vector<std::size_t> cuts(j - 1);
    for (std::size_t i = 0; i < cuts.size(); ++i) cuts[i] = i + 1;
    for (;;) {
      // Labels: ordered j-subsets of Y via subset + permutation.
      std::vector<std::size_t> subset(j);
      for (std::size_t i = 0; i < j; ++i) subset[i] = i;
      for (;;) {
        std::vector<std::size_t> perm(subset);
        std::sort(perm.begin(), perm.end());
        do {
          std::vector<std::size_t> map(x_size);
          std::size_t part = 0;
          for (std::size_t x = 0; x < x_size; ++x) {
            while (part < cuts.size() && x >= cuts[part]) ++part;
            map[x] = perm[part];
          }
          if (out.size() >= cap)
            throw std::invalid_argument("enumerate_quantizer_maps: interval enumeration cap");
          out.emplace_back(std::move(map), m);
        } while (std::next_permutation(perm.begin(), perm.end()));
        // next subset
        std::size_t i = j;
        while (i > 0 && subset[i - 1] == y_size - j + i - 1) --i;
        if (i == 0) break;
        ++subset[i - 1];
        for (std::size_t k = i; k < j; ++k) subset[k] = subset[k - 1] + 1;
      }
      if (cuts.empty()) break;
      std::size_t i = cuts.size();
      while (i > 0 && cuts[i - 1] == x_size - cuts.size() + i - 1) --i;
      if (i == 0) break;
      ++cuts[i - 1];
      for (std::size_t k = i; k < cuts.size(); ++k) cuts[k] = cuts[k - 1] + 1;
    }
  }
}

double column_cost(const DeterministicQuantizer& q, const Pmf& mu, const DistortionMatrix& rho) {
  double c = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) c += mu[x] * rho.at(x, q(x));
  return c;
}

Pmf column_output(const DeterministicQuantizer& q, const Pmf& mu, const Alphabet& y) {
  std::vector<double> out(y.size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) out[q(x)] += mu[x];
  return Pmf(y, std::move(out));
}

LpSolution finish_solution(const SimplexResult& lp, const std::vector<QuantizerColumn>& cols,
                           std::size_t n_real) {
  LpSolution sol;
  sol.status = lp.status;
  sol.pivots = lp.pivots;
  if (lp.status != LpStatus::optimal) {
    sol.objective = lp.objective;
    return sol;
  }
  sol.objective = 0.0;
  std::vector<double> weights;
  std::vector<DeterministicQuantizer> qs;
  double wsum = 0.0;
  for (std::size_t j = 0; j < n_real; ++j) {
    if (lp.x[j] <= 1e-12) continue;
    weights.push_back(lp.x[j]);
    qs.push_back(cols[j].quantizer);
    wsum += lp.x[j];
    sol.objective += lp.x[j] * cols[j].cost;
  }
  // The simplex row pins the total weight to 1 within solver precision; the
  // pruned leftovers are folded back by normalization.
  for (double& w : weights) w /= wsum;
  sol.mixture = FiniteMixtureQuantizer(std::move(weights), std::move(qs));
  sol.duals = lp.duals;
  sol.dual_residual = lp.dual_residual;
  return sol;
}

}  // namespace

std::vector<DeterministicQuantizer> enumerate_quantizer_maps(std::size_t x_size,
                                                             std::size_t y_size, std::size_t m,
                                                             CellShape shape, std::size_t cap) {
  if (x_size == 0 || y_size == 0 || m == 0)
    throw std::invalid_argument("enumerate_quantizer_maps: empty dimensions");
  std::vector<DeterministicQuantizer> out;
  if (shape == CellShape::all)
    enumerate_all_maps(x_size, y_size, m, cap, out);
  else
    enumerate_interval_maps(x_size, y_size, m, cap, out);
  return out;
}

std::vector<QuantizerColumn> enumerate_quantizers(const Pmf& mu, const Alphabet& y,
                                                  const DistortionMatrix& rho, std::size_t m,
                                                  CellShape shape, std::size_t cap) {
  if (rho.rows() != mu.size() || rho.cols() != y.size())
    throw std::invalid_argument("enumerate_quantizers: distortion shape mismatch");
  std::vector<QuantizerColumn> cols;
  for (auto& q : enumerate_quantizer_maps(mu.size(), y.size(), m, shape, cap)) {
    Pmf out = column_output(q, mu, y);
    const double c = column_cost(q, mu, rho);
    cols.push_back(QuantizerColumn{std::move(q), std::move(out), c});
  }
  return cols;
}

LpSolution solve_p1(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, std::size_t m,
                    CellShape shape) {
  const std::vector<QuantizerColumn> cols = enumerate_quantizers(mu, psi.alphabet(), rho, m, shape);
  const std::size_t ny = psi.size();
  // Output-marginal equalities for all but the last label (implied by the
  // total-weight row, every column's output summing to one) plus sum w = 1.
  const std::size_t rows = ny;
  std::vector<double> b(rows);
  for (std::size_t yb = 0; yb + 1 < ny; ++yb) b[yb] = psi[yb];
  b[rows - 1] = 1.0;
  std::vector<double> c(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) c[j] = cols[j].cost;

  auto column = [&](std::size_t j, double* out) {
    for (std::size_t yb = 0; yb + 1 < ny; ++yb) out[yb] = cols[j].output[yb];
    out[rows - 1] = 1.0;
  };
  SimplexResult lp = revised_simplex(rows, cols.size(), column, c, b);
  return finish_solution(lp, cols, cols.size());
}

LpSolution solve_p3(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, std::size_t m,
                    double delta, const DistortionMatrix& metric) {
  if (delta < 0.0) throw std::invalid_argument("solve_p3: delta must be >= 0");
  if (delta == 0.0) return solve_p1(mu, psi, rho, m, CellShape::all);
  const std::size_t ny = psi.size();
  if (ny > 20) throw std::invalid_argument("solve_p3: |Y| larger than 20");
  if (metric.rows() != ny || metric.cols() != ny)
    throw std::invalid_argument("solve_p3: metric shape mismatch");

  const std::vector<QuantizerColumn> cols =
      enumerate_quantizers(mu, psi.alphabet(), rho, m, CellShape::all);

  // Strassen rows over proper nonempty subsets A of Y with the strict blow-up
  // A^delta = { y : min_{y' in A} d(y, y') < delta }:
  //   marginal(A) <= psi(A^delta) + delta      (slack +1)
  //   marginal(A^delta) >= psi(A) - delta      (surplus -1)
  const std::uint32_t full = (1u << ny) - 1u;
  std::vector<std::uint32_t> balls(ny, 0);
  for (std::size_t i = 0; i < ny; ++i)
    for (std::size_t e = 0; e < ny; ++e)
      if (metric.at(e, i) < delta) balls[i] |= 1u << e;

  std::vector<std::uint32_t> subset_of_row, blow_of_row;
  std::vector<double> rhs_of_row;
  std::vector<int> slack_sign;
  auto psi_mass = [&](std::uint32_t mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < ny; ++i)
      if (mask & (1u << i)) s += psi[i];
    return s;
  };
  for (std::uint32_t mask = 1; mask < full; ++mask) {
    std::uint32_t blow = 0;
    for (std::size_t i = 0; i < ny; ++i)
      if (mask & (1u << i)) blow |= balls[i];
    subset_of_row.push_back(mask);
    blow_of_row.push_back(blow);
    rhs_of_row.push_back(psi_mass(blow) + delta);
    slack_sign.push_back(+1);
    subset_of_row.push_back(blow);
    blow_of_row.push_back(mask);
    rhs_of_row.push_back(psi_mass(mask) - delta);
    slack_sign.push_back(-1);
  }

  const std::size_t ineq = subset_of_row.size();
  const std::size_t rows = ineq + 1;
  const std::size_t n_real = cols.size();
  const std::size_t n_total = n_real + ineq;

  std::vector<double> b(rows);
  for (std::size_t r = 0; r < ineq; ++r) b[r] = rhs_of_row[r];
  b[rows - 1] = 1.0;
  std::vector<double> c(n_total, 0.0);
  for (std::size_t j = 0; j < n_real; ++j) c[j] = cols[j].cost;

  auto out_mass = [&](std::size_t j, std::uint32_t mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < ny; ++i)
      if (mask & (1u << i)) s += cols[j].output[i];
    return s;
  };
  auto column = [&](std::size_t j, double* out) {
    std::fill(out, out + rows, 0.0);
    if (j < n_real) {
      for (std::size_t r = 0; r < ineq; ++r) out[r] = out_mass(j, subset_of_row[r]);
      out[rows - 1] = 1.0;
    } else {
      const std::size_t r = j - n_real;
      out[r] = static_cast<double>(slack_sign[r]);
    }
  };

  SimplexResult lp = revised_simplex(rows, n_total, column, c, b);
  LpSolution sol = finish_solution(lp, cols, n_real);
  if (sol.status == LpStatus::optimal) {
    for (std::size_t r = 0; r < ineq; ++r) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < n_real; ++j)
        if (lp.x[j] > 0.0) lhs += lp.x[j] * out_mass(j, subset_of_row[r]);
      const double slack = slack_sign[r] > 0 ? rhs_of_row[r] - lhs : lhs - rhs_of_row[r];
      if (std::abs(slack) <= 1e-9) sol.boundary_attained = true;
    }
  }
  return sol;
}

FiniteRandomizationTable finite_randomization_experiment(const FiniteMixtureQuantizer& target,
                                                         const Pmf& mu, const Alphabet& y,
                                                         const DistortionMatrix& rho,
                                                         const std::vector<int>& sizes,
                                                         int reps, std::uint64_t seed) {
  if (reps < 1) throw std::invalid_argument("finite_randomization_experiment: reps must be >= 1");
  const std::size_t k = target.components();
  std::vector<double> comp_cost(k);
  for (std::size_t i = 0; i < k; ++i) comp_cost[i] = column_cost(target.quantizers()[i], mu, rho);
  double target_l = 0.0;
  for (std::size_t i = 0; i < k; ++i) target_l += target.weights()[i] * comp_cost[i];
  const Pmf target_out = output_marginal(mixture_joint(target, mu, y));

  DistortionMatrix label_metric = [&] {
    std::vector<double> d(y.size() * y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
      for (std::size_t j = 0; j < y.size(); ++j)
        d[i * y.size() + j] = std::abs(y.label(i) - y.label(j));
    return DistortionMatrix(y.size(), y.size(), std::move(d));
  }();

  FiniteRandomizationTable table;
  std::vector<double> log_sizes, log_errors;
  for (std::size_t si = 0; si < sizes.size(); ++si) {
    const int size = sizes[si];
    if (size < 1) throw std::invalid_argument("finite_randomization_experiment: bad size");
    std::vector<double> l_errors(reps), prokh(reps);
    for (int rep = 0; rep < reps; ++rep) {
      Rng rng = Rng::stream(seed, si, static_cast<std::uint64_t>(rep));
      std::vector<std::int64_t> counts(k, 0);
      double l_emp = 0.0;
      for (int s = 0; s < size; ++s) {
        const std::size_t pick = rng.categorical(target.weights());
        counts[pick]++;
        l_emp += comp_cost[pick];
      }
      l_emp /= static_cast<double>(size);
      l_errors[rep] = std::abs(l_emp - target_l);

      std::vector<double> out(y.size(), 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        if (counts[i] == 0) continue;
        const double w = static_cast<double>(counts[i]) / static_cast<double>(size);
        for (std::size_t x = 0; x < mu.size(); ++x)
          out[target.quantizers()[i](x)] += w * mu[x];
      }
      prokh[rep] = prokhorov_distance(Pmf(y, std::move(out)), target_out, label_metric).distance;
    }
    const MeanStderr le = mean_stderr(l_errors);
    const MeanStderr pr = mean_stderr(prokh);
    table.rows.push_back(FiniteRandomizationRow{size, le.mean, le.stderr_, pr.mean, pr.stderr_});
    if (le.mean > 0.0) {
      log_sizes.push_back(std::log10(static_cast<double>(size)));
      log_errors.push_back(std::log10(le.mean));
    }
  }
  table.slope = log_sizes.size() >= 2 ? regression_slope(log_sizes, log_errors) : 0.0;
  return table;
}

void write_finite_randomization_csv(std::ostream& os, const FiniteRandomizationTable& table) {
  os << "size,l_error_mean,l_error_stderr,prokhorov_mean,prokhorov_stderr\n";
  for (const auto& r : table.rows)
    os << r.size << ',' << format_double(r.l_error_mean) << ',' << format_double(r.l_error_stderr)
       << ',' << format_double(r.prokhorov_mean) << ',' << format_double(r.prokhorov_stderr)
       << '\n';
}

P1OtReport p1_vs_ot_check(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho,
                          std::size_t m) {
  P1OtReport rep;
  rep.p1_objective = solve_p1(mu, psi, rho, m).objective;
  rep.ot_cost = ot_solve(mu, psi, rho).cost;
  rep.gap = rep.p1_objective - rep.ot_cost;
  rep.equality_expected = m >= psi.size();
  rep.ok = rep.gap >= -1e-8 && (!rep.equality_expected || std::abs(rep.gap) <= 1e-8);
  return rep;
}

}  // namespace oclab
