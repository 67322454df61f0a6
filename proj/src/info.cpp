#include "oclab/info.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "oclab/numfmt.hpp"
#include "oclab/transport.hpp"

namespace oclab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSinkhornTol = 1e-10;
constexpr int kSinkhornCap = 100000;
constexpr double kDistortionTol = 1e-7;  // |E[rho] - D| target for i_min
constexpr double kBetaCap = 18446744073709551616.0;  // 2^64

double product_distortion(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho) {
  double e = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j) e += mu[i] * psi[j] * rho.at(i, j);
  return e;
}

JointPmf product_joint(const Pmf& mu, const Pmf& psi) {
  std::vector<double> m(mu.size() * psi.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < psi.size(); ++j) m[i * psi.size() + j] = mu[i] * psi[j];
  return JointPmf(mu.alphabet(), psi.alphabet(), std::move(m));
}

double logsumexp(const std::vector<double>& terms) {
  double mx = -kInf;
  for (double t : terms) mx = std::max(mx, t);
  if (mx == -kInf) return -kInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

std::size_t support_size(const Pmf& p) {
  std::size_t s = 0;
  for (double m : p.mass()) s += m > 0.0;
  return s;
}

}  // namespace

double mutual_information_bits(const JointPmf& v) {
  std::vector<double> px(v.rows(), 0.0), py(v.cols(), 0.0);
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) {
      px[i] += v.at(i, j);
      py[j] += v.at(i, j);
    }
  double nats = 0.0;
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) {
      const double m = v.at(i, j);
      if (m <= 0.0) continue;
      nats += m * std::log(m / (px[i] * py[j]));
    }
  return std::max(0.0, nats) / std::log(2.0);
}

LagrangianCoupling lagrangian_coupling(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho,
                                       double beta) {
  if (!(beta >= 0.0)) throw std::invalid_argument("lagrangian_coupling: beta must be >= 0");
  if (rho.rows() != mu.size() || rho.cols() != psi.size())
    throw std::invalid_argument("lagrangian_coupling: distortion shape mismatch");

  // Prune zero-mass points; they re-enter as zero rows/columns.
  std::vector<std::size_t> xs, ys;
  for (std::size_t i = 0; i < mu.size(); ++i)
    if (mu[i] > 0.0) xs.push_back(i);
  for (std::size_t j = 0; j < psi.size(); ++j)
    if (psi[j] > 0.0) ys.push_back(j);
  const std::size_t nx = xs.size(), ny = ys.size();

  std::vector<double> log_mu(nx), log_psi(ny), bcost(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) log_mu[i] = std::log(mu[xs[i]]);
  for (std::size_t j = 0; j < ny; ++j) log_psi[j] = std::log(psi[ys[j]]);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) bcost[i * ny + j] = beta * rho.at(xs[i], ys[j]);

  std::vector<double> alpha(nx, 0.0), gamma(log_psi), terms;
  std::vector<double> sub(nx * ny, 0.0);
  int iter = 0;
  double residual = kInf;
  bool converged = false;
  for (; iter < kSinkhornCap; ++iter) {
    // Fit rows exactly.
    for (std::size_t i = 0; i < nx; ++i) {
      terms.assign(ny, 0.0);
      for (std::size_t j = 0; j < ny; ++j) terms[j] = gamma[j] - bcost[i * ny + j];
      alpha[i] = log_mu[i] - logsumexp(terms);
    }
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j)
        sub[i * ny + j] = std::exp(alpha[i] + gamma[j] - bcost[i * ny + j]);
    residual = 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < nx; ++i) col += sub[i * ny + j];
      residual = std::max(residual, std::abs(col - psi[ys[j]]));
    }
    if (residual <= kSinkhornTol) {
      converged = true;
      ++iter;
      break;
    }
    // Fit columns exactly.
    for (std::size_t j = 0; j < ny; ++j) {
      terms.assign(nx, 0.0);
      for (std::size_t i = 0; i < nx; ++i) terms[i] = alpha[i] - bcost[i * ny + j];
      gamma[j] = log_psi[j] - logsumexp(terms);
    }
  }

  std::vector<double> full(mu.size() * psi.size(), 0.0);
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) full[xs[i] * psi.size() + ys[j]] = sub[i * ny + j];
  return LagrangianCoupling{JointPmf(mu.alphabet(), psi.alphabet(), std::move(full)), beta, iter,
                            residual, converged};
}

IminResult i_min(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double d) {
  if (rho.rows() != mu.size() || rho.cols() != psi.size())
    throw std::invalid_argument("i_min: distortion shape mismatch");
  const double zero_i_d_max = product_distortion(mu, psi, rho);

  // A point-mass marginal forces the product coupling.
  if (support_size(mu) == 1 || support_size(psi) == 1) {
    if (d >= zero_i_d_max - 1e-12) return IminResult{0.0, product_joint(mu, psi), 0.0};
    return IminResult{kInf, std::nullopt, 0.0};
  }

  const double floor = ot_solve(mu, psi, rho).cost;
  if (d < floor - 1e-12) return IminResult{kInf, std::nullopt, 0.0};
  if (d >= zero_i_d_max) return IminResult{0.0, product_joint(mu, psi), 0.0};

  auto expected = [&](const JointPmf& v) { return distortion(v, rho); };

  double beta_lo = 0.0;
  double beta_hi = 1.0;
  LagrangianCoupling hi = lagrangian_coupling(mu, psi, rho, beta_hi);
  while (expected(hi.coupling) > d && beta_hi < kBetaCap) {
    beta_hi *= 2.0;
    beta_lo = beta_hi / 2.0;
    hi = lagrangian_coupling(mu, psi, rho, beta_hi);
  }

  LagrangianCoupling best = hi;
  double best_gap = std::abs(expected(hi.coupling) - d);
  for (int it = 0; it < 200 && best_gap > kDistortionTol; ++it) {
    const double mid = 0.5 * (beta_lo + beta_hi);
    LagrangianCoupling c = lagrangian_coupling(mu, psi, rho, mid);
    const double e = expected(c.coupling);
    if (std::abs(e - d) < best_gap) {
      best = c;
      best_gap = std::abs(e - d);
    }
    if (e > d)
      beta_lo = mid;
    else
      beta_hi = mid;
  }
  return IminResult{mutual_information_bits(best.coupling), best.coupling, best.beta};
}

double d_curve(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho, double rate_bits) {
  if (!(rate_bits >= 0.0)) throw std::invalid_argument("d_curve: rate must be >= 0");
  const double zero_i_d_max = product_distortion(mu, psi, rho);
  if (rate_bits == 0.0) return zero_i_d_max;
  if (support_size(mu) == 1 || support_size(psi) == 1) return zero_i_d_max;
  const double floor = ot_solve(mu, psi, rho).cost;
  if (zero_i_d_max - floor <= 1e-12) return floor;
  if (i_min(mu, psi, rho, floor).bits <= rate_bits + 1e-12) return floor;

  double lo = floor, hi = zero_i_d_max;
  const double tol = 1e-9 * std::max(1.0, zero_i_d_max);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (i_min(mu, psi, rho, mid).bits <= rate_bits + 1e-12)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

double d_classic(const Pmf& mu, const DistortionMatrix& rho, double rate_bits) {
  if (!(rate_bits >= 0.0)) throw std::invalid_argument("d_classic: rate must be >= 0");
  if (rho.rows() != mu.size()) throw std::invalid_argument("d_classic: shape mismatch");
  const std::size_t ny = rho.cols();

  if (rate_bits == 0.0) {
    double best = kInf;
    for (std::size_t j = 0; j < ny; ++j) {
      double e = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i) e += mu[i] * rho.at(i, j);
      best = std::min(best, e);
    }
    return best;
  }

  double d_min = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    double m = kInf;
    for (std::size_t j = 0; j < ny; ++j) m = std::min(m, rho.at(i, j));
    d_min += mu[i] * m;
  }

  // Blahut-Arimoto at slope s; returns (rate_bits, distortion).
  auto ba = [&](double s) {
    std::vector<double> q(ny, 1.0 / static_cast<double>(ny));
    std::vector<double> w(mu.size() * ny, 0.0);
    for (int it = 0; it < 50000; ++it) {
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu[i] <= 0.0) continue;
        double z = 0.0;
        for (std::size_t j = 0; j < ny; ++j) {
          w[i * ny + j] = q[j] * std::exp(-s * rho.at(i, j));
          z += w[i * ny + j];
        }
        for (std::size_t j = 0; j < ny; ++j) w[i * ny + j] /= z;
      }
      double delta = 0.0;
      for (std::size_t j = 0; j < ny; ++j) {
        double nq = 0.0;
        for (std::size_t i = 0; i < mu.size(); ++i)
          if (mu[i] > 0.0) nq += mu[i] * w[i * ny + j];
        delta = std::max(delta, std::abs(nq - q[j]));
        q[j] = nq;
      }
      if (delta <= 1e-13) break;
    }
    double rate = 0.0, dist = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (mu[i] <= 0.0) continue;
      for (std::size_t j = 0; j < ny; ++j) {
        const double m = mu[i] * w[i * ny + j];
        if (m <= 0.0) continue;
        rate += m * std::log(w[i * ny + j] / q[j]);
        dist += m * rho.at(i, j);
      }
    }
    return std::pair<double, double>(std::max(0.0, rate) / std::log(2.0), dist);
  };

  double s_lo = 0.0, s_hi = 1.0;
  auto at_hi = ba(s_hi);
  int doublings = 0;
  while (at_hi.first < rate_bits && doublings < 60) {
    s_lo = s_hi;
    s_hi *= 2.0;
    at_hi = ba(s_hi);
    ++doublings;
  }
  if (at_hi.first < rate_bits) return d_min;  // rate beyond the curve's range

  std::pair<double, double> best = at_hi;
  for (int it = 0; it < 100 && std::abs(best.first - rate_bits) > 1e-9; ++it) {
    const double mid = 0.5 * (s_lo + s_hi);
    const auto p = ba(mid);
    if (std::abs(p.first - rate_bits) < std::abs(best.first - rate_bits)) best = p;
    if (p.first < rate_bits)
      s_lo = mid;
    else
      s_hi = mid;
  }
  return best.second;
}

ConverseCheck converse_check(const RateDistortionPoint& point, const Pmf& mu, const Pmf& psi,
                             const DistortionMatrix& rho) {
  const double curve = d_curve(mu, psi, rho, point.rate_bits);
  const double tol =
      point.source == RateDistortionPoint::Source::simulated ? 3.0 * point.stderr_ : 1e-9;
  const double margin = point.distortion - curve;
  return ConverseCheck{margin >= -tol, margin, tol, curve};
}

ImCurve make_im_curve(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho,
                      const std::vector<double>& d_values) {
  ImCurve curve;
  curve.zero_i_d_max = product_distortion(mu, psi, rho);
  curve.feasible_d_min =
      (support_size(mu) == 1 || support_size(psi) == 1) ? curve.zero_i_d_max
                                                        : ot_solve(mu, psi, rho).cost;
  for (double d : d_values) {
    const IminResult r = i_min(mu, psi, rho, d);
    if (!r.coupling.has_value()) {
      curve.samples.push_back(ImCurveSample{kInf, d, kInf});
    } else {
      curve.samples.push_back(ImCurveSample{r.beta, distortion(*r.coupling, rho), r.bits});
    }
  }
  std::sort(curve.samples.begin(), curve.samples.end(),
            [](const ImCurveSample& a, const ImCurveSample& b) {
              return a.distortion < b.distortion;
            });

  // Curve invariants: I nonincreasing in D, D nonincreasing in beta, and
  // chord convexity of I in D on the sampled grid.
  for (std::size_t k = 0; k + 1 < curve.samples.size(); ++k) {
    const auto& a = curve.samples[k];
    const auto& b = curve.samples[k + 1];
    if (std::isinf(a.i_bits) || std::isinf(b.i_bits)) continue;
    if (a.i_bits < b.i_bits - 1e-9)
      throw std::logic_error("ImCurve: mutual information must be nonincreasing in distortion");
    if (a.beta < b.beta - 1e-9)
      throw std::logic_error("ImCurve: distortion must be nonincreasing in beta");
  }
  for (std::size_t k = 1; k + 1 < curve.samples.size(); ++k) {
    const auto& a = curve.samples[k - 1];
    const auto& m = curve.samples[k];
    const auto& b = curve.samples[k + 1];
    if (std::isinf(a.i_bits) || std::isinf(m.i_bits) || std::isinf(b.i_bits)) continue;
    const double span = b.distortion - a.distortion;
    if (span <= 1e-12) continue;
    const double interp = ((b.distortion - m.distortion) * a.i_bits +
                           (m.distortion - a.distortion) * b.i_bits) /
                          span;
    if (m.i_bits > interp + 1e-6)
      throw std::logic_error("ImCurve: mutual information must be convex in distortion");
  }
  return curve;
}

std::vector<double> im_curve_grid(const Pmf& mu, const Pmf& psi, const DistortionMatrix& rho,
                                  int points) {
  if (points < 1) throw std::invalid_argument("im_curve_grid: need >= 1 point");
  const double zero_i_d_max = product_distortion(mu, psi, rho);
  const double floor = (support_size(mu) == 1 || support_size(psi) == 1)
                           ? zero_i_d_max
                           : ot_solve(mu, psi, rho).cost;
  std::vector<double> grid;
  for (int k = 1; k <= points; ++k)
    grid.push_back(floor + (zero_i_d_max - floor) * static_cast<double>(k) /
                               static_cast<double>(points + 1));
  return grid;
}

void write_im_curve_csv(std::ostream& os, const ImCurve& curve) {
  os << "beta,D,I_bits\n";
  for (const auto& s : curve.samples)
    os << format_double(s.beta) << ',' << format_double(s.distortion) << ','
       << format_double(s.i_bits) << '\n';
}

}  // namespace oclab
