#ifndef OCLAB_INFO_HPP
#define OCLAB_INFO_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include "oclab/core.hpp"

namespace oclab {

double mutual_information_bits(const JointPmf& v);

struct LagrangianCoupling {
  JointPmf coupling;
  double beta = 0.0;
  int iterations = 0;
  double marginal_residual = 0.0;
  bool converged = false;
};

// Unique minimizer of I(v) + beta * E_v[rho] over couplings of (mu, psi),
// computed by iterative proportional fitting on the kernel
// mu(x) psi(y) exp(-beta rho(x,y)) in log domain. Zero-mass alphabet points
// are pruned before fitting and reinserted with zero mass.
LagrangianCoupling lagrangian_coupling(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho,
                                       double beta);

struct IminResult {
  double bits = 0.0;  // +infinity when no coupling meets the distortion budget
  std::optional<JointPmf> coupling;
  double beta = 0.0;
};

// Minimum mutual information over couplings of mu and psi with expected
// distortion at most D. Infinite below the optimal-transport cost; zero at or
// above the product-coupling distortion; solved by bisection on beta until
// |E[rho] - D| <= 1e-7 in between.
IminResult i_min(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double d);

// Inverse of i_min in D: least distortion achievable with mutual information
// at most R bits.
double d_curve(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double rate_bits);

// Classical distortion-rate function of mu with the output law free over the
// columns of rho (Blahut-Arimoto).
double d_classic(const Pmf& mu, const DistortionMatrix& rho, double rate_bits);

struct RateDistortionPoint {
  enum class Source { analytic, simulated };
  double rate_bits = 0.0;
  double distortion = 0.0;
  int n = 1;
  Source source = Source::analytic;
  double stderr_ = 0.0;  // Monte-Carlo standard error for simulated points
};

struct ConverseCheck {
  bool pass = false;
  double margin = 0.0;  // point.distortion - d_curve(point.rate)
  double tolerance = 0.0;
  double curve_distortion = 0.0;
};

// Lower-bound check: a point passes when its distortion is no more than
// `tolerance` below the curve (3 MC standard errors when simulated, 1e-9
// when analytic).
ConverseCheck converse_check(const RateDistortionPoint& point, const Pmf& mu, const Pmf& psi,
                             const DistortionMatrix& rho);

struct ImCurveSample {
  double beta = 0.0;
  double distortion = 0.0;
  double i_bits = 0.0;
};

struct ImCurve {
  std::vector<ImCurveSample> samples;  // ordered by increasing distortion
  double feasible_d_min = 0.0;         // optimal-transport cost
  double zero_i_d_max = 0.0;           // product-coupling distortion
};

// Samples the I_m curve at the given interior distortion values and checks
// the monotonicity / convexity invariants of the curve.
ImCurve make_im_curve(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho,
                      const std::vector<double>& d_values);

// Evenly spaced interior grid between the curve's distortion endpoints.
std::vector<double> im_curve_grid(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho,
                                  int points);

void write_im_curve_csv(std::ostream& os, const ImCurve& curve);

}  // namespace oclab

#endif  // OCLAB_INFO_HPP
