#include "oclab/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <stdexcept>

namespace oclab {

double entropy_bits(const std::vector<double>& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h;
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr r;
  r.n = static_cast<std::int64_t>(xs.size());
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return r;
  double ss = 0.0;
  for (double x : xs) ss += (x - r.mean) * (x - r.mean);
  double var = ss / static_cast<double>(xs.size() - 1);
  r.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
  return r;
}

double chi_square_pvalue(double stat, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi_square_pvalue: dof must be positive");
  if (!(stat >= 0.0)) return 0.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * stat);
}

double chi_square_gof_pvalue(const std::vector<std::int64_t>& counts,
                             const std::vector<double>& probs) {
  if (counts.size() != probs.size())
    throw std::invalid_argument("chi_square_gof_pvalue: size mismatch");
  std::int64_t total = 0;
  for (std::int64_t c : counts) total += c;
  if (total <= 0) throw std::invalid_argument("chi_square_gof_pvalue: empty sample");
  double stat = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (probs[i] <= 0.0) {
      if (counts[i] > 0) return 0.0;
      continue;
    }
    double e = probs[i] * static_cast<double>(total);
    double d = static_cast<double>(counts[i]) - e;
    stat += d * d / e;
    ++dof;
  }
  if (dof <= 0) return 1.0;
  return chi_square_pvalue(stat, dof);
}

double chi_square_independence_pvalue(const std::vector<std::int64_t>& table,
                                      std::size_t rows, std::size_t cols) {
  if (table.size() != rows * cols)
    throw std::invalid_argument("chi_square_independence_pvalue: size mismatch");
  std::vector<double> rsum(rows, 0.0), csum(cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      double v = static_cast<double>(table[i * cols + j]);
      rsum[i] += v;
      csum[j] += v;
      total += v;
    }
  if (total <= 0.0) throw std::invalid_argument("chi_square_independence_pvalue: empty table");
  double stat = 0.0;
  std::size_t nzr = 0, nzc = 0;
  for (double v : rsum) nzr += v > 0.0;
  for (double v : csum) nzc += v > 0.0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) {
      if (rsum[i] <= 0.0 || csum[j] <= 0.0) continue;
      double e = rsum[i] * csum[j] / total;
      double d = static_cast<double>(table[i * cols + j]) - e;
      stat += d * d / e;
    }
  int dof = static_cast<int>((nzr - 1) * (nzc - 1));
  if (dof <= 0) return 1.0;
  return chi_square_pvalue(stat, dof);
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("regression_slope: need >= 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace oclab
