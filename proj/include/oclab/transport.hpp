#ifndef OCLAB_TRANSPORT_HPP
#define OCLAB_TRANSPORT_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "oclab/core.hpp"
#include "oclab/rng.hpp"

namespace oclab {

// Raw solution of the balanced transportation problem
//   min sum c[i][j] x[i][j]  s.t.  row sums = a, col sums = b, x >= 0
// via primal transportation simplex (spanning-tree basis, Dantzig pricing with
// Bland anti-cycling, 1e-12 degeneracy epsilon).
struct TransportPlan {
  std::vector<double> mass;  // m*n row-major
  std::vector<double> row_potential;
  std::vector<double> col_potential;
  double cost = 0.0;
  int pivots = 0;
  // Max dual-feasibility violation; basic cells satisfy complementary
  // slackness exactly by construction.
  double dual_residual = 0.0;
};

TransportPlan solve_transport(const std::vector<double>& a, const std::vector<double>& b,
                              const std::vector<double>& cost_row_major);

struct TransportResult {
  JointPmf coupling;
  double cost = 0.0;
  int pivots = 0;
  double dual_residual = 0.0;
};

TransportResult ot_solve(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho);

// Comonotone (quantile) coupling of two pmfs on the real line; optimal for
// squared-error cost. The reported cost is in squared-error units; the result
// carries no dual certificate (dual_residual is NaN).
TransportResult quantile_coupling_1d(const Pmf& mu, const Pmf& psi);

// Draws y from the conditional law coupling(x, .) / marginal(x).
std::size_t coupling_sampler(const TransportResult& t, std::size_t x, Rng& rng);

struct ProkhorovResult {
  double distance = 0.0;
  // Subset of support indices witnessing the binding Strassen constraint just
  // below the reported distance (0 when none binds).
  std::uint32_t witness_set = 0;
};

// Prokhorov distance by Strassen subset enumeration plus bisection to 1e-9.
// Supports up to 20 points. The blow-up A^alpha uses the strict inequality
// min_{e' in A} d(e, e') < alpha; the reported value is the bisection's upper
// endpoint, a one-sided approximation of the infimum.
ProkhorovResult prokhorov_distance(const Pmf& a, const Pmf& b, const DistortionMatrix& metric);

double tv_distance(const Pmf& a, const Pmf& b);

struct KlDivergence {
  double nats = 0.0;
  double bits() const;
};

// KL divergence D(a||b); +infinity when a is not absolutely continuous
// with respect to b.
KlDivergence kl_divergence(const Pmf& a, const Pmf& b);

// Nonzero coupling cells as "x_label,y_label,mass" rows.
void write_coupling_csv(std::ostream& os, const JointPmf& v);

}  // namespace oclab

#endif  // OCLAB_TRANSPORT_HPP
