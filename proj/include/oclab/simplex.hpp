#ifndef OCLAB_SIMPLEX_HPP
#define OCLAB_SIMPLEX_HPP

#include <cstddef>
#include <functional>
#include <vector>

namespace oclab {

enum class LpStatus { optimal, infeasible };

struct SimplexResult {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  double objective = 0.0;
  std::vector<double> duals;
  int pivots = 0;
  double dual_residual = 0.0;
};

// Two-phase revised primal simplex with Bland's rule for
//   min c.x  subject to  A x = b,  x >= 0.
// A is supplied column-wise: column(j, out) writes m entries. Rows must be
// linearly independent. Intended for small dense programs.
SimplexResult revised_simplex(std::size_t m, std::size_t n,
                              const std::function<void(std::size_t, double*)>& column,
                              const std::vector<double>& c, const std::vector<double>& b);

}  // namespace oclab

#endif  // OCLAB_SIMPLEX_HPP
