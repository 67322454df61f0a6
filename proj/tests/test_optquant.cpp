#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oclab/info.hpp"
#include "oclab/optquant.hpp"
#include "oclab/transport.hpp"
#include "oracles.hpp"

using namespace oclab;

namespace {
Alphabet binary() { return Alphabet({0.0, 1.0}); }
DistortionMatrix ham2() { return DistortionMatrix::hamming(binary(), binary()); }

bool has_interval_cells(const std::vector<std::size_t>& map) {
  std::set<std::size_t> closed;
  for (std::size_t x = 0; x < map.size(); ++x) {
    if (x > 0 && map[x] != map[x - 1]) closed.insert(map[x - 1]);
    if (closed.count(map[x])) return false;
  }
  return true;
}
}  // namespace

TEST_CASE("enumerate_quantizer_maps counts") {
  CHECK(enumerate_quantizer_maps(2, 2, 2, CellShape::all).size() == 4);
  CHECK(enumerate_quantizer_maps(2, 3, 1, CellShape::all).size() == 3);  // constants
  CHECK(enumerate_quantizer_maps(3, 3, 3, CellShape::all).size() == 27);
  // Budget filter: 3 inputs, 2 outputs, M=1 keeps only the two constants.
  CHECK(enumerate_quantizer_maps(3, 2, 1, CellShape::all).size() == 2);

  // Interval cells, |X|=3, |Y|=2, M=2: brute filter over all maps agrees.
  auto interval = enumerate_quantizer_maps(3, 2, 2, CellShape::interval);
  auto all = enumerate_quantizer_maps(3, 2, 2, CellShape::all);
  std::set<std::vector<std::size_t>> expect;
  for (const auto& q : all)
    if (has_interval_cells(q.map())) expect.insert(q.map());
  std::set<std::vector<std::size_t>> got;
  for (const auto& q : interval) got.insert(q.map());
  CHECK(got == expect);
  CHECK(interval.size() == got.size());  // no duplicates
  CHECK(interval.size() == 6);           // C(2,0)*2 + C(2,1)*2 = 2 + 4

  CHECK_THROWS(enumerate_quantizer_maps(30, 10, 2, CellShape::all));
}

TEST_CASE("solve_p1 one-level mixture is the product quantizer") {
  Pmf mu(binary(), {0.5, 0.5});
  Pmf psi(binary(), {0.25, 0.75});
  LpSolution sol = solve_p1(mu, psi, ham2(), 1);
  REQUIRE(sol.status == LpStatus::optimal);
  double product = 0.0;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) product += mu[i] * psi[j] * ham2().at(i, j);
  CHECK(sol.objective == doctest::Approx(product).epsilon(1e-12));
  // The unique feasible weights over constants are psi itself.
  REQUIRE(sol.mixture.has_value());
  Pmf out = output_marginal(mixture_joint(*sol.mixture, mu, binary()));
  CHECK(out[0] == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("solve_p1 binary benchmark M=2") {
  Pmf mu(binary(), {0.5, 0.5});
  Pmf psi(binary(), {0.25, 0.75});
  LpSolution sol = solve_p1(mu, psi, ham2(), 2);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(0.25).epsilon(1e-10));
  CHECK(sol.dual_residual <= 1e-8);
  REQUIRE(sol.mixture.has_value());
  // Output marginal matches psi within LP tolerance; x-marginal is exact.
  JointPmf v = mixture_joint(*sol.mixture, mu, binary());
  Pmf out = output_marginal(v);
  CHECK(std::abs(out[0] - 0.25) <= 1e-9);
  CHECK(std::abs(out[1] - 0.75) <= 1e-9);
  Pmf xm = x_marginal(v);
  CHECK(xm[0] == doctest::Approx(0.5).epsilon(1e-12));
  // Objective equals the weighted column costs.
  double obj = 0.0;
  for (std::size_t i = 0; i < sol.mixture->components(); ++i) {
    double c = 0.0;
    for (std::size_t x = 0; x < 2; ++x)
      c += mu[x] * ham2().at(x, sol.mixture->quantizers()[i](x));
    obj += sol.mixture->weights()[i] * c;
  }
  CHECK(obj == doctest::Approx(sol.objective).epsilon(1e-10));
}

TEST_CASE("solve_p1 with identity available achieves zero") {
  Alphabet a3({0.0, 1.0, 2.0});
  Pmf mu(a3, {0.2, 0.3, 0.5});
  LpSolution sol = solve_p1(mu, mu, DistortionMatrix::hamming(a3, a3), 3);
  REQUIRE(sol.status == LpStatus::optimal);
  CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("solve_p1 objective nonincreasing in M") {
  Rng rng = Rng::stream(55, 1);
  Pmf mu = oracles::random_pmf(oracles::seq_alphabet(3), rng);
  Pmf psi = oracles::random_pmf(oracles::seq_alphabet(3), rng);
  DistortionMatrix rho = oracles::random_distortion(3, 3, rng);
  double prev = 1e100;
  for (std::size_t m : {1u, 2u, 3u}) {
    LpSolution sol = solve_p1(mu, psi, rho, m);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.objective <= prev + 1e-10);
    prev = sol.objective;
  }
}

TEST_CASE("p1 equals ot when M >= |Y| and interval dominates all") {
  for (int trial = 0; trial < 6; ++trial) {
    Rng rng = Rng::stream(919, trial);
    const std::size_t nx = 3, ny = 2 + rng.below(3);
    Pmf mu = oracles::random_pmf(oracles::seq_alphabet(nx), rng);
    Pmf psi = oracles::random_pmf(oracles::seq_alphabet(ny), rng);
    DistortionMatrix rho = oracles::random_distortion(nx, ny, rng);
    P1OtReport rep = p1_vs_ot_check(mu, psi, rho, ny);
    CHECK(rep.equality_expected);
    CHECK(rep.ok);
    CHECK(std::abs(rep.gap) <= 1e-8);

    // M = 1 gap is the product-coupling excess over the transport cost.
    P1OtReport rep1 = p1_vs_ot_check(mu, psi, rho, 1);
    double product = 0.0;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) product += mu[i] * psi[j] * rho.at(i, j);
    CHECK(rep1.p1_objective == doctest::Approx(product).epsilon(1e-10));
    CHECK(rep1.gap >= -1e-8);

    // Interval-cell restriction can only increase the objective.
    LpSolution all_sol = solve_p1(mu, psi, rho, 2, CellShape::all);
    LpSolution int_sol = solve_p1(mu, psi, rho, 2, CellShape::interval);
    REQUIRE(all_sol.status == LpStatus::optimal);
    REQUIRE(int_sol.status == LpStatus::optimal);
    CHECK(int_sol.objective >= all_sol.objective - 1e-9);
  }
}

TEST_CASE("interval cells on a discretized density, equality reported") {
  // Scalar squared error with a discretized bell-shaped source: the interval
  // restriction is observed to match the unrestricted optimum here; only the
  // dominance direction is asserted.
  Alphabet grid({-1.5, -0.5, 0.5, 1.5});
  Pmf mu(grid, {0.15, 0.35, 0.35, 0.15});
  Pmf psi(grid, {0.2, 0.3, 0.3, 0.2});
  DistortionMatrix rho = DistortionMatrix::squared_error(grid, grid);
  LpSolution all_sol = solve_p1(mu, psi, rho, 2, CellShape::all);
  LpSolution int_sol = solve_p1(mu, psi, rho, 2, CellShape::interval);
  REQUIRE(all_sol.status == LpStatus::optimal);
  REQUIRE(int_sol.status == LpStatus::optimal);
  CHECK(int_sol.objective >= all_sol.objective - 1e-9);
  MESSAGE("interval objective ", int_sol.objective, " vs all ", all_sol.objective,
          " (gap ", int_sol.objective - all_sol.objective, ")");
}

TEST_CASE("solve_p3 delta regimes") {
  Pmf mu(binary(), {0.5, 0.5});
  Pmf psi(binary(), {0.25, 0.75});
  DistortionMatrix metric(2, 2, {0.0, 1.0, 1.0, 0.0});

  // delta >= 1: the ball covers every pmf, so the best single quantizer wins.
  LpSolution free_sol = solve_p3(mu, psi, ham2(), 2, 1.0, metric);
  REQUIRE(free_sol.status == LpStatus::optimal);
  CHECK(free_sol.objective == doctest::Approx(0.0).epsilon(1e-10));

  // delta sweep decreases toward the P1 objective.
  double prev = -1.0;
  for (double delta : {0.4, 0.2, 0.1, 0.05, 0.01}) {
    LpSolution sol = solve_p3(mu, psi, ham2(), 2, delta, metric);
    REQUIRE(sol.status == LpStatus::optimal);
    CHECK(sol.objective >= prev - 1e-10);
    prev = sol.objective;
  }
  LpSolution exact = solve_p3(mu, psi, ham2(), 2, 0.0, metric);
  CHECK(prev <= exact.objective + 1e-9);
  CHECK(exact.objective == doctest::Approx(0.25).epsilon(1e-10));

  // delta = 0.1: no cheaper than the best transport cost over the ball.
  LpSolution mid = solve_p3(mu, psi, ham2(), 2, 0.1, metric);
  CHECK(mid.objective <= 0.25 + 1e-10);
  double best_ball_ot = 1e100;
  for (int k = 0; k <= 40; ++k) {
    const double q0 = 0.25 - 0.1 + 0.2 * k / 40.0;
    Pmf ball_psi(binary(), {q0, 1.0 - q0});
    if (prokhorov_distance(ball_psi, psi, metric).distance > 0.1 + 1e-6) continue;
    best_ball_ot = std::min(best_ball_ot, ot_solve(mu, ball_psi, ham2()).cost);
  }
  CHECK(mid.objective >= best_ball_ot - 1e-6);
}

TEST_CASE("solve_p3 returned mixture is a valid model-3 object") {
  Pmf mu(binary(), {0.5, 0.5});
  Pmf psi(binary(), {0.3, 0.7});
  DistortionMatrix metric(2, 2, {0.0, 1.0, 1.0, 0.0});
  LpSolution sol = solve_p3(mu, psi, ham2(), 2, 0.05, metric);
  REQUIRE(sol.status == LpStatus::optimal);
  REQUIRE(sol.mixture.has_value());
  JointPmf v = mixture_joint(*sol.mixture, mu, binary());
  Pmf xm = x_marginal(v);
  CHECK(xm[0] == doctest::Approx(0.5).epsilon(1e-12));
  // Output marginal obeys the Strassen constraints at delta.
  Pmf out = output_marginal(v);
  CHECK(prokhorov_distance(out, psi, metric).distance <= 0.05 + 1e-6);
}

TEST_CASE("finite randomization experiment") {
  Pmf mu(binary(), {0.5, 0.5});

  // Point-mass mixing measure: zero error at every size.
  FiniteMixtureQuantizer point({1.0}, {DeterministicQuantizer({0, 1}, 2)});
  auto pt = finite_randomization_experiment(point, mu, binary(), ham2(), {10, 100}, 10, 7);
  for (const auto& row : pt.rows) {
    CHECK(row.l_error_mean == 0.0);
    CHECK(row.prokhorov_mean <= 1e-9);
  }

  // Two-component target: O(n^-1/2) L-error decay and vanishing Prokhorov
  // distance of the output marginals.
  FiniteMixtureQuantizer two({0.5, 0.5},
                             {DeterministicQuantizer({0, 1}, 2), DeterministicQuantizer({1, 1}, 2)});
  auto table =
      finite_randomization_experiment(two, mu, binary(), ham2(), {10, 100, 1000, 10000}, 60, 99);
  CHECK(table.slope == doctest::Approx(-0.5).epsilon(0.3));
  CHECK(table.rows.front().prokhorov_mean > table.rows.back().prokhorov_mean);
  CHECK(table.rows.back().prokhorov_mean < 0.02);
}
