#include "oclab/verify.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "oclab/coding.hpp"
#include "oclab/info.hpp"
#include "oclab/numfmt.hpp"
#include "oclab/stats.hpp"
#include "oclab/optquant.hpp"
#include "oclab/transport.hpp"
#include "oclab/types.hpp"

namespace oclab {

namespace {

using nlohmann::json;

Alphabet binary() { return Alphabet({0.0, 1.0}); }

double opt_param(const json& overrides, const std::string& check, const char* key,
                 double fallback) {
  if (!overrides.contains(check)) return fallback;
  const json& o = overrides.at(check);
  if (!o.is_object())
    throw std::invalid_argument("verify: override for " + check + " must be an object");
  for (const auto& [k, v] : o.items()) {
    (void)v;
    if (k != "alpha" && k != "finalMaxBits" && k != "tol" && k != "trials" && k != "slack")
      throw std::invalid_argument("verify: unknown override parameter " + k + " for " + check);
  }
  return o.contains(key) ? o.at(key).get<double>() : fallback;
}

Pmf random_pmf(const Alphabet& a, Rng& rng) {
  std::vector<double> m(a.size());
  double s = 0.0;
  for (double& v : m) {
    v = 0.05 + rng.uniform01();
    s += v;
  }
  for (double& v : m) v /= s;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) acc += m[i];
  m.back() = 1.0 - acc;
  return Pmf(a, std::move(m));
}

Alphabet seq_alphabet(std::size_t n) {
  std::vector<double> pts(n);
  for (std::size_t i = 0; i < n; ++i) pts[i] = static_cast<double>(i);
  return Alphabet(std::move(pts));
}

DistortionMatrix random_rho(std::size_t r, std::size_t c, Rng& rng) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = rng.uniform01();
  return DistortionMatrix(r, c, std::move(v));
}

CheckResult check_lemma1(const json& ov, std::uint64_t seed, int threads) {
  const int trials = static_cast<int>(opt_param(ov, "lemma1_converse", "trials", 2000));
  SimConfig cfg;
  cfg.mode = SimMode::finite;
  cfg.mu = Pmf(binary(), {0.5, 0.5});
  cfg.psi = Pmf(binary(), {0.5, 0.5});
  cfg.rho = DistortionMatrix::hamming(binary(), binary());
  cfg.rate_bits = 0.43872;
  cfg.n_list = {4, 8};
  cfg.trials = trials;
  cfg.seed = seed;
  SimResult r = simulate_finite(cfg, threads);
  const double slack = opt_param(ov, "lemma1_converse", "slack", 0.0);
  bool pass = true;
  std::ostringstream os;
  for (const auto& rec : r.records) {
    const bool ok = rec.converse_pass && rec.converse_margin >= slack - 1e-15;
    pass = pass && ok;
    os << "n=" << rec.n << " margin=" << format_double(rec.converse_margin) << ' ';
  }
  return CheckResult{"lemma1_converse", pass, os.str()};
}

CheckResult check_lemma2(const json& ov, std::uint64_t seed, int) {
  const int trials = static_cast<int>(opt_param(ov, "lemma2_uniformity", "trials", 20000));
  const double alpha = opt_param(ov, "lemma2_uniformity", "alpha", 0.01);
  NType t({2, 2}, 4);
  Rng rng(Rng::mix(seed, 0x11, 0));
  const DistortionMatrix rho = DistortionMatrix::hamming(binary(), binary());
  std::vector<std::vector<std::size_t>> samples;
  samples.reserve(trials);
  for (int k = 0; k < trials; ++k) {
    std::vector<std::size_t> x(4);
    for (auto& v : x) v = rng.uniform01() < 0.5 ? 0 : 1;
    Codebook cb = generate_codebook(t, 1.0, rng);
    samples.push_back(nn_encode(x, cb, rho).word);
  }
  const double p = lemma2_uniformity_test(t, samples);
  return CheckResult{"lemma2_uniformity", p > alpha,
                     "p=" + format_double(p) + " alpha=" + format_double(alpha)};
}

CheckResult check_lemma3(const json& ov, std::uint64_t, int) {
  const double final_max = opt_param(ov, "lemma3_sequence", "finalMaxBits", 0.06);
  Pmf u(binary(), {0.5, 0.5});
  double prev = 1e100;
  bool pass = true;
  double last = 0.0;
  for (int n : {4, 8, 16, 32, 64, 128}) {
    const double v = normalized_type_kl_bits(u, n);
    const TypeClassInfo info = make_type_class_info(u, n);
    const bool sandwich = v >= info.kl_to_target_bits - 1e-12 &&
                          v <= info.kl_to_target_bits + 2.0 * std::log2(n + 1.0) / n + 1e-12;
    pass = pass && v < prev && sandwich;
    prev = v;
    last = v;
  }
  const double at4 = normalized_type_kl_bits(u, 4);
  pass = pass && std::abs(at4 - 0.25 * std::log2(16.0 / 6.0)) <= 1e-12 && last < final_max;
  return CheckResult{"lemma3_sequence", pass,
                     "at n=4: " + format_double(at4) + ", final: " + format_double(last)};
}

CheckResult check_lemma4(const json& ov, std::uint64_t seed, int) {
  const int runs = static_cast<int>(opt_param(ov, "lemma4_marton", "trials", 20000));
  const double slack = opt_param(ov, "lemma4_marton", "slack", 0.0);
  Pmf psi(binary(), {0.5, 0.5});
  bool pass = true;
  std::ostringstream os;
  for (int n : {4, 8, 16}) {
    NType t = closest_ntype(psi, n);
    const double bound =
        std::sqrt(n * normalized_type_kl_bits(psi, n) * std::numbers::ln2 / (2.0 * n));
    Rng rng(Rng::mix(seed, 0x14, static_cast<std::uint64_t>(n)));
    std::vector<double> mm(runs);
    for (int k = 0; k < runs; ++k) {
      MartonPair p = marton_coupling(t, psi, rng);
      double d = 0.0;
      for (int i = 0; i < n; ++i) d += p.xhat[i] != p.y[i];
      mm[k] = d / n;
    }
    const MeanStderr ms = mean_stderr(mm);
    const bool ok = ms.mean <= bound + 3.0 * ms.stderr_ - slack;
    pass = pass && ok;
    os << "n=" << n << " observed=" << format_double(ms.mean)
       << " bound=" << format_double(bound) << ' ';
  }
  return CheckResult{"lemma4_marton", pass, os.str()};
}

CheckResult check_lp_ot_bridge(const json& ov, std::uint64_t seed, int) {
  const double tol = opt_param(ov, "lp_ot_bridge", "tol", 1e-8);
  const int trials = static_cast<int>(opt_param(ov, "lp_ot_bridge", "trials", 5));
  bool pass = true;
  double worst = 0.0;
  for (int k = 0; k < trials; ++k) {
    Rng rng(Rng::mix(seed, 0x1b, static_cast<std::uint64_t>(k)));
    const std::size_t nx = 2 + rng.below(3), ny = 2 + rng.below(3);
    Pmf mu = random_pmf(seq_alphabet(nx), rng);
    Pmf psi = random_pmf(seq_alphabet(ny), rng);
    DistortionMatrix rho = random_rho(nx, ny, rng);
    P1OtReport rep = p1_vs_ot_check(mu, psi, rho, ny);
    worst = std::max(worst, std::abs(rep.gap));
    pass = pass && rep.ok && std::abs(rep.gap) <= tol;
  }
  return CheckResult{"lp_ot_bridge", pass, "worst gap=" + format_double(worst)};
}

CheckResult check_imin_convexity(const json& ov, std::uint64_t seed, int) {
  (void)ov;
  bool pass = true;
  std::string detail = "curves monotone and convex";
  try {
    Pmf u(binary(), {0.5, 0.5});
    const DistortionMatrix ham = DistortionMatrix::hamming(binary(), binary());
    make_im_curve(u, u, ham, im_curve_grid(u, u, ham, 9));
    Rng rng(Rng::mix(seed, 0x1c, 0));
    Pmf mu = random_pmf(seq_alphabet(3), rng);
    Pmf psi = random_pmf(seq_alphabet(3), rng);
    DistortionMatrix rho = random_rho(3, 3, rng);
    make_im_curve(mu, psi, rho, im_curve_grid(mu, psi, rho, 9));
  } catch (const std::exception& e) {
    pass = false;
    detail = e.what();
  }
  return CheckResult{"imin_convexity", pass, detail};
}

CheckResult check_quantile_vs_ot(const json& ov, std::uint64_t seed, int) {
  const double tol = opt_param(ov, "quantile_vs_ot", "tol", 1e-9);
  bool pass = true;
  double worst = 0.0;
  for (int k = 0; k < 8; ++k) {
    Rng rng(Rng::mix(seed, 0x1d, static_cast<std::uint64_t>(k)));
    std::vector<double> xl, yl;
    double v = 0.0;
    for (int i = 0; i < 4; ++i) {
      v += 0.1 + rng.uniform01();
      xl.push_back(v);
    }
    v = 0.2;
    for (int i = 0; i < 5; ++i) {
      v += 0.1 + rng.uniform01();
      yl.push_back(v);
    }
    Pmf mu = random_pmf(Alphabet(xl), rng);
    Pmf psi = random_pmf(Alphabet(yl), rng);
    const double q = quantile_coupling_1d(mu, psi).cost;
    const double o =
        ot_solve(mu, psi, DistortionMatrix::squared_error(mu.alphabet(), psi.alphabet())).cost;
    worst = std::max(worst, std::abs(q - o));
    pass = pass && std::abs(q - o) <= tol;
  }
  return CheckResult{"quantile_vs_ot", pass, "worst diff=" + format_double(worst)};
}

CheckResult check_pinsker(const json& ov, std::uint64_t seed, int) {
  const double tol = opt_param(ov, "pinsker", "tol", 1e-12);
  bool pass = true;
  for (int k = 0; k < 25; ++k) {
    Rng rng(Rng::mix(seed, 0x1e, static_cast<std::uint64_t>(k)));
    Alphabet a = seq_alphabet(2 + rng.below(5));
    Pmf p = random_pmf(a, rng);
    Pmf q = random_pmf(a, rng);
    pass = pass && tv_distance(p, q) <= std::sqrt(kl_divergence(p, q).nats / 2.0) + tol;
  }
  return CheckResult{"pinsker", pass, pass ? "tv <= sqrt(kl/2)" : "violated"};
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"lemma1_converse", "lemma2_uniformity", "lemma3_sequence", "lemma4_marton",
          "lp_ot_bridge",    "imin_convexity",    "quantile_vs_ot",  "pinsker"};
}

std::vector<CheckResult> run_verify_suite(const std::vector<std::string>& names,
                                          std::uint64_t seed, const nlohmann::json& overrides,
                                          int threads) {
  for (const auto& [key, value] : overrides.items()) {
    (void)value;
    bool known = false;
    for (const auto& n : verify_suite_names()) known = known || n == key;
    if (!known) throw std::invalid_argument("verify: unknown check in overrides: " + key);
  }
  std::vector<CheckResult> out;
  for (const auto& name : names) {
    if (name == "lemma1_converse")
      out.push_back(check_lemma1(overrides, seed, threads));
    else if (name == "lemma2_uniformity")
      out.push_back(check_lemma2(overrides, seed, threads));
    else if (name == "lemma3_sequence")
      out.push_back(check_lemma3(overrides, seed, threads));
    else if (name == "lemma4_marton")
      out.push_back(check_lemma4(overrides, seed, threads));
    else if (name == "lp_ot_bridge")
      out.push_back(check_lp_ot_bridge(overrides, seed, threads));
    else if (name == "imin_convexity")
      out.push_back(check_imin_convexity(overrides, seed, threads));
    else if (name == "quantile_vs_ot")
      out.push_back(check_quantile_vs_ot(overrides, seed, threads));
    else if (name == "pinsker")
      out.push_back(check_pinsker(overrides, seed, threads));
    else
      throw std::invalid_argument("verify: unknown check: " + name);
  }
  return out;
}

}  // namespace oclab
