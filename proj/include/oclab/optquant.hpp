#ifndef OCLAB_OPTQUANT_HPP
#define OCLAB_OPTQUANT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "oclab/core.hpp"
#include "oclab/simplex.hpp"

namespace oclab {

enum class CellShape { all, interval };

// All maps from xSize inputs to ySize outputs with at most M distinct outputs.
// `interval` restricts to maps whose cells are contiguous index ranges (convex
// cells on the line), counted once via injective labelings.
std::vector<DeterministicQuantizer> enumerate_quantizer_maps(std::size_t x_size,
                                                             std::size_t y_size, std::size_t m,
                                                             CellShape shape,
                                                             std::size_t cap = 10000000);

struct QuantizerColumn {
  DeterministicQuantizer quantizer;
  Pmf output;   // output_marginal(induced_joint(q, mu))
  double cost;  // distortion under (mu, rho)
};

std::vector<QuantizerColumn> enumerate_quantizers(const Pmf& mu, const Alphabet& y,
                                                  const DistortionMatrix& rho, std::size_t m,
                                                  CellShape shape, std::size_t cap = 10000000);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  std::optional<FiniteMixtureQuantizer> mixture;
  double objective = 0.0;
  std::vector<double> duals;
  double dual_residual = 0.0;
  int pivots = 0;
  // P3 only: some Strassen constraint is tight at the optimum. The program
  // uses the closed constraint set, so a boundary optimum may sit on the
  // open ball's boundary.
  bool boundary_attained = false;
};

// (P1): minimize mixture distortion subject to exact output distribution psi.
LpSolution solve_p1(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, std::size_t m,
                    CellShape shape = CellShape::all);

// (P3): output distribution within Prokhorov distance delta of psi, encoded
// by the two Strassen inequality families over all subsets of Y. delta = 0
// falls back to the exact constraint of (P1).
LpSolution solve_p3(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, std::size_t m,
                    double delta, const DistortionMatrix& metric);

struct FiniteRandomizationRow {
  int size = 0;
  double l_error_mean = 0.0;
  double l_error_stderr = 0.0;
  double prokhorov_mean = 0.0;
  double prokhorov_stderr = 0.0;
};

struct FiniteRandomizationTable {
  std::vector<FiniteRandomizationRow> rows;
  double slope = 0.0;  // log-log regression slope of the mean L-error
};

// Draws i.i.d. component quantizers from the target mixture and compares the
// empirical mixture's distortion and output marginal against the target.
// The Prokhorov metric on Y uses |label difference|.
FiniteRandomizationTable finite_randomization_experiment(const FiniteMixtureQuantizer& target,
                                                         const Pmf& mu, const Alphabet& y,
                                                         const DistortionMatrix& rho,
                                                         const std::vector<int>& sizes,
                                                         int reps, std::uint64_t seed);

void write_finite_randomization_csv(std::ostream& os, const FiniteRandomizationTable& table);

struct P1OtReport {
  double p1_objective = 0.0;
  double ot_cost = 0.0;
  double gap = 0.0;
  bool equality_expected = false;  // M >= |Y| realizes every coupling
  bool ok = false;
};

P1OtReport p1_vs_ot_check(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho,
                          std::size_t m);

}  // namespace oclab

#endif  // OCLAB_OPTQUANT_HPP
