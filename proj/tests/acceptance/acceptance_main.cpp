// Acceptance suite: runs every gate criterion and prints one line per
// criterion. Exit code is the number of failed criteria.
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include "oclab/cli.hpp"
#include "oclab/coding.hpp"
#include "oclab/info.hpp"
#include "oclab/optquant.hpp"
#include "oclab/stats.hpp"
#include "oclab/transport.hpp"
#include "oclab/types.hpp"

using namespace oclab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Alphabet binary() { return Alphabet({0.0, 1.0}); }
DistortionMatrix ham2() { return DistortionMatrix::hamming(binary(), binary()); }

double h2(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

Pmf random_pmf(std::size_t n, Rng& rng) {
  std::vector<double> pts(n), m(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = static_cast<double>(i);
  double s = 0.0;
  for (double& v : m) {
    v = 0.05 + rng.uniform01();
    s += v;
  }
  for (double& v : m) v /= s;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) acc += m[i];
  m.back() = 1.0 - acc;
  return Pmf(Alphabet(std::move(pts)), std::move(m));
}

DistortionMatrix random_rho(std::size_t r, std::size_t c, Rng& rng) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.uniform01();
  return DistortionMatrix(r, c, std::move(v));
}

// One-parameter grid over the 2x2 transportation polytope at 1e-6 resolution.
double binary_imin_grid_oracle(double p, double q, const DistortionMatrix& rho, double d) {
  const double lo = std::max(0.0, p + q - 1.0), hi = std::min(p, q);
  double best = std::numeric_limits<double>::infinity();
  const double res = 1e-6;
  const long long steps = static_cast<long long>(std::ceil((hi - lo) / res));
  const double px[2] = {p, 1 - p}, py[2] = {q, 1 - q};
  for (long long s = 0; s <= steps; ++s) {
    const double t = std::min(hi, lo + res * static_cast<double>(s));
    const double v[4] = {t, p - t, q - t, 1 - p - q + t};
    const double e = v[0] * rho.at(0, 0) + v[1] * rho.at(0, 1) + v[2] * rho.at(1, 0) +
                     v[3] * rho.at(1, 1);
    if (e > d + 1e-12) continue;
    double nats = 0.0;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double m = v[i * 2 + j];
        if (m > 0.0) nats += m * std::log(m / (px[i] * py[j]));
      }
    best = std::min(best, std::max(0.0, nats) / std::log(2.0));
  }
  return best;
}

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  Pmf u(binary(), {0.5, 0.5});
  double worst_closed = 0.0, worst_oracle = 0.0;
  for (int k = 1; k <= 9; ++k) {
    const double d = 0.05 * k;
    const double got = i_min(u, u, ham2(), d).bits;
    worst_closed = std::max(worst_closed, std::abs(got - (1.0 - h2(d))));
    worst_oracle = std::max(worst_oracle, std::abs(got - binary_imin_grid_oracle(0.5, 0.5, ham2(), d)));
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream os;
  os << "max |i_min - (1-h(D))| = " << worst_closed << " (tol 1e-3), max |i_min - grid oracle| = "
     << worst_oracle << " (tol 1e-4), runtime " << secs << "s (< 1s)";
  return Outcome{worst_closed <= 1e-3 && worst_oracle <= 1e-4 && secs < 1.0, os.str()};
}

Outcome criterion2() {
  double worst = 0.0;
  for (int inst = 0; inst < 3; ++inst) {
    Rng rng = Rng::stream(2026, inst);
    Pmf mu = random_pmf(3, rng);
    Pmf psi = random_pmf(3, rng);
    DistortionMatrix rho = random_rho(3, 3, rng);
    for (double d : im_curve_grid(mu, psi, rho, 9)) {
      const double r = i_min(mu, psi, rho, d).bits;
      worst = std::max(worst, std::abs(d_curve(mu, psi, rho, r) - d));
    }
  }
  std::ostringstream os;
  os << "max |d_curve(i_min(D)) - D| = " << worst << " over 27 interior points (tol 1e-4)";
  return Outcome{worst <= 1e-4, os.str()};
}

Outcome criterion3() {
  double worst_gap = 0.0, worst_m1 = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng = Rng::stream(33, inst);
    const std::size_t nx = 2 + rng.below(4), ny = 2 + rng.below(4);  // up to 5x5
    Pmf mu = random_pmf(nx, rng);
    Pmf psi = random_pmf(ny, rng);
    DistortionMatrix rho = random_rho(nx, ny, rng);
    const P1OtReport rep = p1_vs_ot_check(mu, psi, rho, ny);
    worst_gap = std::max(worst_gap, std::abs(rep.gap));
    double product = 0.0;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t j = 0; j < ny; ++j) product += mu[i] * psi[j] * rho.at(i, j);
    const double m1 = solve_p1(mu, psi, rho, 1).objective;
    worst_m1 = std::max(worst_m1, std::abs(m1 - product));
  }
  std::ostringstream os;
  os << "max |P1(M>=|Y|) - OT| = " << worst_gap << " (tol 1e-8), max |P1(M=1) - E_prod[rho]| = "
     << worst_m1;
  return Outcome{worst_gap <= 1e-8 && worst_m1 <= 1e-12, os.str()};
}

Outcome criterion4() {
  Pmf u(binary(), {0.5, 0.5});
  const double at4 = normalized_type_kl_bits(u, 4);
  bool ok = std::abs(at4 - 0.35376) <= 1e-5;
  double prev = at4, last = at4;
  bool decreasing = true, sandwich = true;
  for (int n : {4, 8, 16, 32, 64, 128}) {
    const double v = normalized_type_kl_bits(u, n);
    if (n > 4) {
      decreasing = decreasing && v < prev;
      prev = v;
    }
    last = v;
    const TypeClassInfo info = make_type_class_info(u, n);
    sandwich = sandwich && v >= info.kl_to_target_bits - 1e-12 &&
               v <= info.kl_to_target_bits + 2.0 * std::log2(n + 1.0) / n + 1e-12;
  }
  std::ostringstream os;
  os << "value(4) = " << at4 << " (0.35376 +- 1e-5), strictly decreasing: " << decreasing
     << ", value(128) = " << last << " (< 0.06), sandwich: " << sandwich;
  return Outcome{ok && decreasing && last < 0.06 && sandwich, os.str()};
}

Outcome criterion5() {
  NType t({2, 2}, 4);
  Rng rng = Rng::stream(42, 0x52);
  std::vector<std::vector<std::size_t>> samples;
  const int trials = 100000;
  samples.reserve(trials);
  for (int k = 0; k < trials; ++k) {
    std::vector<std::size_t> x(4);
    for (auto& v : x) v = rng.uniform01() < 0.5 ? 0 : 1;
    Codebook cb = generate_codebook(t, 1.0, rng);
    samples.push_back(nn_encode(x, cb, ham2()).word);
  }
  const double p = lemma2_uniformity_test(t, samples);
  std::ostringstream os;
  os << "chi-square p = " << p << " over T_4((2,2)), 1e5 trials, seed-fixed (> 0.01)";
  return Outcome{p > 0.01, os.str()};
}

// Exact enumeration of the sequential coupling's joint for type (1,1), n=2.
Outcome criterion6() {
  Pmf psi(binary(), {0.5, 0.5});
  // Enumerate the coupling tree exactly from the per-coordinate maximal
  // coupling of the remaining-counts law against psi.
  std::map<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>, double> joint;
  NType t({1, 1}, 2);
  struct Node {
    std::vector<std::size_t> xhat, y;
    std::vector<std::int64_t> used{0, 0};
    double prob = 1.0;
  };
  std::vector<Node> frontier{Node{}};
  for (int coord = 0; coord < 2; ++coord) {
    std::vector<Node> next;
    for (const Node& node : frontier) {
      const std::int64_t rem = 2 - coord;
      double p[2];
      for (int yv = 0; yv < 2; ++yv)
        p[yv] = static_cast<double>(t.counts()[yv] - node.used[yv]) / static_cast<double>(rem);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double overlap = std::min(p[a], psi[a]);
          double mass = 0.0;
          if (a == b) mass = overlap;
          double tv = 0.0;
          for (int yv = 0; yv < 2; ++yv) tv += std::max(0.0, p[yv] - psi[yv]);
          if (tv > 0.0)
            mass += std::max(0.0, p[a] - psi[a]) * std::max(0.0, psi[b] - p[b]) / tv;
          if (mass <= 0.0) continue;
          Node child = node;
          child.xhat.push_back(a);
          child.y.push_back(b);
          child.used[a]++;
          child.prob *= mass;
          next.push_back(std::move(child));
        }
    }
    frontier = std::move(next);
  }
  for (const Node& node : frontier) joint[{node.xhat, node.y}] += node.prob;

  bool four_outcomes = joint.size() == 4;
  std::map<std::vector<std::size_t>, double> ymarg;
  for (const auto& [k, v] : joint) ymarg[k.second] += v;
  bool exact = ymarg.size() == 4;
  for (const auto& [y, mass] : ymarg) exact = exact && mass == 0.25;  // psi^2 exactly

  // Measured mismatch against the transportation bound at n in {4,8,16}.
  bool bound_ok = true;
  std::ostringstream os;
  for (int n : {4, 8, 16}) {
    NType tn = closest_ntype(psi, n);
    const double bound =
        std::sqrt(n * normalized_type_kl_bits(psi, n) * std::numbers::ln2 / (2.0 * n));
    Rng rng = Rng::stream(42, 0x60, static_cast<std::uint64_t>(n));
    std::vector<double> mm(100000);
    for (auto& v : mm) {
      MartonPair pair = marton_coupling(tn, psi, rng);
      double d = 0.0;
      for (int i = 0; i < n; ++i) d += pair.xhat[i] != pair.y[i];
      v = d / n;
    }
    const MeanStderr ms = mean_stderr(mm);
    bound_ok = bound_ok && ms.mean <= bound + 3.0 * ms.stderr_;
    os << "n=" << n << ": " << ms.mean << " <= " << bound << "; ";
  }
  os << "n=2 exact tree: " << (four_outcomes && exact ? "y-marginal = psi^2 exactly" : "FAILED");
  return Outcome{bound_ok && four_outcomes && exact, os.str()};
}

Outcome criterion7() {
  const auto start = std::chrono::steady_clock::now();
  SimConfig cfg;
  cfg.mode = SimMode::finite;
  cfg.mu = Pmf(binary(), {0.5, 0.5});
  cfg.psi = Pmf(binary(), {0.5, 0.5});
  cfg.rho = ham2();
  cfg.rate_bits = 0.43872;  // (1 - h(0.25)) + 0.25
  cfg.n_list = {4, 8, 12, 16};
  cfg.trials = 10000;
  cfg.seed = 42;
  const SimResult r = simulate_finite(cfg, 2);
  bool marginal_ok = true, converse_ok = true;
  int violations = 0;
  double prev_gap = 1e100;
  std::ostringstream os;
  for (const auto& rec : r.records) {
    const double gap = rec.distortion_mean - 0.25;
    if (gap > prev_gap) ++violations;
    prev_gap = gap;
    marginal_ok = marginal_ok && rec.marginal_chi2_p > 0.01;
    converse_ok = converse_ok && rec.converse_pass;
    os << "n=" << rec.n << " gap=" << gap << " p=" << rec.marginal_chi2_p << "; ";
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  os << "violations=" << violations << " (<=1), runtime " << secs << "s (< 120s)";
  return Outcome{violations <= 1 && marginal_ok && converse_ok && secs < 120.0, os.str()};
}

Outcome criterion8() {
  Pmf mu(binary(), {0.5, 0.5});
  FiniteMixtureQuantizer target(
      {0.5, 0.5}, {DeterministicQuantizer({0, 1}, 2), DeterministicQuantizer({1, 1}, 2)});
  const FiniteRandomizationTable table = finite_randomization_experiment(
      target, mu, binary(), ham2(), {10, 100, 1000, 10000}, 200, 42);
  bool monotone = true;
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i)
    monotone = monotone && table.rows[i + 1].prokhorov_mean <= table.rows[i].prokhorov_mean;
  std::ostringstream os;
  os << "L-error slope = " << table.slope << " (-0.5 +- 0.15), prokhorov means";
  for (const auto& row : table.rows) os << ' ' << row.prokhorov_mean;
  os << (monotone ? " (monotone)" : " (NOT monotone)");
  return Outcome{std::abs(table.slope + 0.5) <= 0.15 && monotone, os.str()};
}

Outcome criterion9() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "oclab_acceptance";
  fs::create_directories(dir);
  nlohmann::json cfg{{"mode", "finite"},
                     {"mu", nlohmann::json{{"alphabet", {0.0, 1.0}}, {"mass", {0.5, 0.5}}}},
                     {"psi", nlohmann::json{{"alphabet", {0.0, 1.0}}, {"mass", {0.5, 0.5}}}},
                     {"rho", "hamming"},
                     {"R", 0.43872},
                     {"nList", {4, 8}},
                     {"trials", 1500u},
                     {"seed", 42u}};
  auto slurp = [](const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
  };
  std::map<std::string, std::string> outputs;
  const std::pair<const char*, const char*> runs[] = {
      {"a", "1"}, {"b", "1"}, {"c", "4"}};
  for (const auto& [tag, threads] : runs) {
    const std::string stem = (dir / (std::string("det_") + tag)).string();
    cfg["outputPath"] = stem;
    setenv("OCLAB_THREADS", threads, 1);
    if (cli::run_command("simulate", cfg) != cli::kExitOk)
      return Outcome{false, "simulate command failed"};
    outputs[tag] = slurp(stem + ".csv") + "\x1e" + slurp(stem + ".json");
  }
  unsetenv("OCLAB_THREADS");
  const bool rerun_same = outputs["a"] == outputs["b"];
  const bool threads_same = outputs["a"] == outputs["c"];
  std::ostringstream os;
  os << "rerun byte-identical: " << rerun_same << ", threads {1,4} byte-identical: " << threads_same;
  return Outcome{rerun_same && threads_same, os.str()};
}

}  // namespace

int main() {
  struct Entry {
    const char* title;
    Outcome (*fn)();
  };
  const Entry entries[] = {
      {"constrained MI closed form & grid oracle", criterion1},
      {"inverse consistency of i_min and d_curve", criterion2},
      {"LP/OT bridge and one-level product value", criterion3},
      {"normalized type-class KL sequence", criterion4},
      {"encoder uniformity on the type class", criterion5},
      {"sequential coupling bound and exact n=2 tree", criterion6},
      {"binary benchmark distortion trend", criterion7},
      {"finite randomization convergence", criterion8},
      {"simulate determinism across runs and threads", criterion9},
  };
  int failures = 0;
  int index = 0;
  for (const auto& e : entries) {
    ++index;
    const Outcome o = e.fn();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << index << " (" << e.title
              << "): " << o.detail << '\n';
    if (!o.pass) ++failures;
  }
  return failures;
}
