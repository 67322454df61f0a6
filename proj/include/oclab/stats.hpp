#ifndef OCLAB_STATS_HPP
#define OCLAB_STATS_HPP

#include <cstdint>
#include <vector>

namespace oclab {

double entropy_bits(const std::vector<double>& p);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::int64_t n = 0;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

// Upper-tail probability of a chi-square variable with dof degrees of freedom.
double chi_square_pvalue(double stat, int dof);

// Goodness-of-fit p-value for observed counts against cell probabilities.
// Cells with zero probability must have zero counts (p-value 0 otherwise).
double chi_square_gof_pvalue(const std::vector<std::int64_t>& counts,
                             const std::vector<double>& probs);

// Pearson independence test on a contingency table (row-major, rows x cols).
double chi_square_independence_pvalue(const std::vector<std::int64_t>& table,
                                      std::size_t rows, std::size_t cols);

// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace oclab

#endif  // OCLAB_STATS_HPP
