#include "oclab/coding.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "oclab/numfmt.hpp"
#include "oclab/stats.hpp"
#include "oclab/transport.hpp"

namespace oclab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double phi_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Acklam's rational approximation with one Halley refinement.
double probit(double u) {
  if (!(u > 0.0 && u < 1.0)) {
    if (u <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::infinity();
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (u < plow) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - plow) {
    const double q = u - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double e = phi_cdf(x) - u;
  const double v = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - v / (1.0 + 0.5 * x * v);
}

std::size_t draw_from_cdf(const std::vector<double>& cdf, double u) {
  for (std::size_t i = 0; i < cdf.size(); ++i)
    if (u < cdf[i]) return i;
  return cdf.size() - 1;
}

std::vector<double> cumulative(const std::vector<double>& mass) {
  std::vector<double> cdf(mass.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    acc += mass[i];
    cdf[i] = acc;
  }
  return cdf;
}

void run_trials(int trials, int threads, const std::function<void(int, int)>& body) {
  threads = std::max(1, threads);
  if (threads == 1) {
    for (int t = 0; t < trials; ++t) body(0, t);
    return;
  }
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    const int lo = static_cast<int>(static_cast<long long>(trials) * w / threads);
    const int hi = static_cast<int>(static_cast<long long>(trials) * (w + 1) / threads);
    pool.emplace_back([&body, w, lo, hi] {
      for (int t = lo; t < hi; ++t) body(w, t);
    });
  }
  for (auto& th : pool) th.join();
}

double per_letter_distortion(const std::vector<std::size_t>& x, const std::vector<std::size_t>& y,
                             const DistortionMatrix& rho) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += rho.at(x[i], y[i]);
  return s / static_cast<double>(x.size());
}

// Maximal coupling of the remaining-counts law against psi, one coordinate.
struct MartonState {
  std::vector<std::int64_t> remaining;
  std::int64_t total;

  explicit MartonState(const NType& t)
      : remaining(t.counts()), total(t.n()) {}

  double p(std::size_t y) const {
    return static_cast<double>(remaining[y]) / static_cast<double>(total);
  }
  void consume(std::size_t y) {
    remaining[y]--;
    total--;
  }
};

std::size_t draw_positive_part(const std::vector<double>& w, Rng& rng) {
  return rng.categorical(w.data(), w.size());
}

}  // namespace

Codebook generate_codebook(const NType& t, double rate_bits, Rng& rng, std::size_t cap) {
  if (!(rate_bits >= 0.0))
    throw std::invalid_argument("generate_codebook: rate must be nonnegative");
  const double raw = std::exp2(rate_bits * static_cast<double>(t.n()));
  if (raw > static_cast<double>(cap))
    throw std::invalid_argument("generate_codebook: codebook size exceeds cap");
  const std::size_t count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(raw)));
  Codebook cb{{}, std::log2(static_cast<double>(count)) / static_cast<double>(t.n()), t};
  cb.words.reserve(count);
  for (std::size_t i = 0; i < count; ++i) cb.words.push_back(sample_uniform_type_class(t, rng));
  return cb;
}

Encoded nn_encode(const std::vector<std::size_t>& x, const Codebook& cb,
                  const DistortionMatrix& rho) {
  if (cb.words.empty()) throw std::invalid_argument("nn_encode: empty codebook");
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < cb.words.size(); ++i) {
    const auto& w = cb.words[i];
    if (w.size() != x.size()) throw std::invalid_argument("nn_encode: length mismatch");
    double c = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) c += rho.at(x[k], w[k]);
    if (c < best_cost) {
      best_cost = c;
      best = i;
    }
  }
  return Encoded{best, cb.words[best]};
}

MartonPair marton_coupling(const NType& t, const Pmf& psi, Rng& rng) {
  if (psi.size() != t.alphabet_size())
    throw std::invalid_argument("marton_coupling: alphabet mismatch");
  MartonPair out;
  const std::size_t n = static_cast<std::size_t>(t.n());
  out.xhat.reserve(n);
  out.y.reserve(n);
  MartonState st(t);
  const std::size_t k = psi.size();
  std::vector<double> overlap(k), px_extra(k), py_extra(k);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t yv = 0; yv < k; ++yv) {
      const double p = st.p(yv);
      overlap[yv] = std::min(p, psi[yv]);
      px_extra[yv] = std::max(0.0, p - psi[yv]);
      py_extra[yv] = std::max(0.0, psi[yv] - p);
      s += overlap[yv];
    }
    if (rng.uniform01() < s) {
      const std::size_t yv = draw_positive_part(overlap, rng);
      out.xhat.push_back(yv);
      out.y.push_back(yv);
    } else {
      out.xhat.push_back(draw_positive_part(px_extra, rng));
      out.y.push_back(draw_positive_part(py_extra, rng));
    }
    st.consume(out.xhat.back());
  }
  return out;
}

std::vector<std::size_t> marton_conditional_y(const NType& t,
                                              const std::vector<std::size_t>& xhat,
                                              const Pmf& psi, Rng& rng) {
  if (xhat.size() != static_cast<std::size_t>(t.n()))
    throw std::invalid_argument("marton_conditional_y: length mismatch");
  std::vector<std::size_t> y;
  y.reserve(xhat.size());
  MartonState st(t);
  const std::size_t k = psi.size();
  std::vector<double> py_extra(k);
  for (std::size_t i = 0; i < xhat.size(); ++i) {
    const std::size_t a = xhat[i];
    const double p = st.p(a);
    if (p <= 0.0) throw std::invalid_argument("marton_conditional_y: xhat not in the class");
    const double accept = std::min(p, psi[a]) / p;
    if (rng.uniform01() < accept) {
      y.push_back(a);
    } else {
      for (std::size_t yv = 0; yv < k; ++yv) py_extra[yv] = std::max(0.0, psi[yv] - st.p(yv));
      y.push_back(draw_positive_part(py_extra, rng));
    }
    st.consume(a);
  }
  return y;
}

double DensitySpec::cdf(double x) const {
  if (family == Family::gaussian) return phi_cdf((x - a) / b);
  if (a == b) return x >= a ? 1.0 : 0.0;
  return std::clamp((x - a) / (b - a), 0.0, 1.0);
}

double DensitySpec::quantile(double u) const {
  u = std::clamp(u, 1e-300, 1.0 - 1e-16);
  if (family == Family::gaussian) return a + b * probit(u);
  return a + (b - a) * u;
}

double DensitySpec::sample(Rng& rng) const {
  if (family == Family::gaussian) return a + b * rng.gaussian();
  return a + (b - a) * rng.uniform01();
}

double DensitySpec::partial_second_moment(double c, double lo, double hi) const {
  if (family == Family::gaussian) {
    const double zl = (lo - a) / b, zh = (hi - a) / b;
    const double dphi = phi_cdf(zh) - phi_cdf(zl);
    const double p_lo = std::isinf(zl) ? 0.0 : phi_pdf(zl);
    const double p_hi = std::isinf(zh) ? 0.0 : phi_pdf(zh);
    const double m1 = p_lo - p_hi;                                           // int z phi
    const double m2 = dphi + (std::isinf(zl) ? 0.0 : zl * p_lo) - (std::isinf(zh) ? 0.0 : zh * p_hi);
    const double shift = a - c;
    return b * b * m2 + 2.0 * b * shift * m1 + shift * shift * dphi;
  }
  if (a == b) return (a > lo && a <= hi) ? (a - c) * (a - c) : 0.0;
  const double l = std::max(lo, a), h = std::min(hi, b);
  if (h <= l) return 0.0;
  const auto cube = [c](double x) { return (x - c) * (x - c) * (x - c) / 3.0; };
  return (cube(h) - cube(l)) / (b - a);
}

Pmf discretize(const DensitySpec& density, double k, int levels) {
  if (!(k > 0.0)) throw std::invalid_argument("discretize: k must be positive");
  if (levels < 1) throw std::invalid_argument("discretize: levels must be >= 1");
  if (density.family == DensitySpec::Family::gaussian && !(density.b > 0.0))
    throw std::invalid_argument("discretize: gaussian std must be positive");
  if (density.family == DensitySpec::Family::uniform && !(density.b >= density.a))
    throw std::invalid_argument("discretize: uniform needs a <= b");
  const double step = 2.0 * k / levels;
  std::vector<double> labels(levels), mass(levels);
  for (int i = 0; i < levels; ++i) labels[i] = -k + (i + 0.5) * step;
  double prev = 0.0;  // F(-inf)
  for (int i = 0; i < levels; ++i) {
    const double upper =
        i + 1 == levels ? 1.0 : density.cdf(-k + (i + 1) * step);
    mass[i] = std::max(0.0, upper - prev);
    prev = upper;
  }
  return Pmf(Alphabet(std::move(labels)), std::move(mass));
}

double lemma2_uniformity_test(const NType& t,
                              const std::vector<std::vector<std::size_t>>& samples,
                              std::size_t cap) {
  const auto cls = enumerate_type_class(t, cap);
  std::vector<std::int64_t> counts(cls.size(), 0);
  for (const auto& s : samples) {
    const auto it = std::lower_bound(cls.begin(), cls.end(), s);
    if (it == cls.end() || *it != s)
      throw std::invalid_argument("lemma2_uniformity_test: sample outside the class");
    counts[static_cast<std::size_t>(it - cls.begin())]++;
  }
  return chi_square_gof_pvalue(counts,
                               std::vector<double>(cls.size(), 1.0 / static_cast<double>(cls.size())));
}

namespace {

// Exact optimal coupling between the uniform law on the type class and the
// product law psi^n, solved once per block length.
struct ExactCoupling {
  std::vector<std::vector<std::size_t>> class_seqs;  // lexicographic
  std::vector<double> mass;                          // |T| x |Y|^n
  std::size_t cols = 0;
  std::size_t ysize = 0;
  std::size_t n = 0;

  std::vector<std::size_t> decode(std::size_t col) const {
    std::vector<std::size_t> seq(n);
    for (std::size_t i = n; i-- > 0;) {
      seq[i] = col % ysize;
      col /= ysize;
    }
    return seq;
  }
};

ExactCoupling build_exact_coupling(const NType& t, const Pmf& psi, const DistortionMatrix& rho,
                                   double cap) {
  ExactCoupling ec;
  ec.ysize = psi.size();
  ec.n = static_cast<std::size_t>(t.n());
  ec.class_seqs = enumerate_type_class(t, static_cast<std::size_t>(cap));
  double colsd = 1.0;
  for (std::size_t i = 0; i < ec.n; ++i) colsd *= static_cast<double>(ec.ysize);
  ec.cols = static_cast<std::size_t>(colsd);
  const std::size_t rows = ec.class_seqs.size();

  std::vector<double> a(rows, 1.0 / static_cast<double>(rows));
  std::vector<double> b(ec.cols, 0.0);
  for (std::size_t c = 0; c < ec.cols; ++c) {
    double p = 1.0;
    std::size_t v = c;
    for (std::size_t i = 0; i < ec.n; ++i) {
      p *= psi[v % ec.ysize];
      v /= ec.ysize;
    }
    b[c] = p;
  }
  std::vector<double> cost(rows * ec.cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < ec.cols; ++c)
      cost[r * ec.cols + c] = per_letter_distortion(ec.class_seqs[r], ec.decode(c), rho);
  TransportPlan plan = solve_transport(a, b, cost);
  ec.mass = std::move(plan.mass);
  return ec;
}

struct TrialAccumulator {
  std::vector<double> distortion;  // per trial
  std::vector<double> mismatch;    // per trial
  std::vector<double> extra_a, extra_b, extra_c, type_l1;
  // one block per thread, merged in thread order (integer counts, so the
  // merge order cannot change results)
  std::vector<std::vector<std::int64_t>> ycounts;     // [thread][i*ysize+y]
  std::vector<std::vector<std::int64_t>> rank_counts;  // [thread][rank]
};

struct CommonSetup {
  NType ntype;
  std::size_t codebook_count = 0;
  double rate_bits = 0.0;
  bool exact_ot = false;
  bool tabulate = false;
  std::optional<ExactCoupling> coupling;
  std::vector<std::vector<std::size_t>> class_seqs;  // for rank lookups
};

CommonSetup prepare_block(const SimConfig& cfg, const Pmf& psi, const DistortionMatrix& rho,
                          int n, bool with_coupling) {
  CommonSetup s{closest_ntype(psi, n), 0, 0.0, false, false, {}, {}};
  if (!(cfg.rate_bits > 0.0)) throw std::invalid_argument("simulate: rate must be positive");
  const double raw = std::exp2(cfg.rate_bits * n);
  if (raw > static_cast<double>(cfg.codebook_cap))
    throw std::invalid_argument("simulate: codebook size exceeds cap");
  s.codebook_count = static_cast<std::size_t>(std::ceil(raw));
  s.rate_bits = std::log2(static_cast<double>(s.codebook_count)) / n;

  const double class_bits = type_class_log_size_bits(s.ntype);
  const double class_size = std::exp2(class_bits);
  const double ypow = std::pow(static_cast<double>(psi.size()), n);
  s.exact_ot =
      with_coupling && class_bits < 40.0 && class_size * ypow <= cfg.product_space_cap;
  s.tabulate = class_bits < 40.0 && class_size <= static_cast<double>(cfg.uniformity_cap);
  if (s.exact_ot)
    s.coupling = build_exact_coupling(s.ntype, psi, rho, cfg.product_space_cap);
  if (s.tabulate && !s.exact_ot)
    s.class_seqs = enumerate_type_class(s.ntype, cfg.uniformity_cap);
  return s;
}

const std::vector<std::vector<std::size_t>>& class_list(const CommonSetup& s) {
  return s.exact_ot ? s.coupling->class_seqs : s.class_seqs;
}

std::size_t class_rank(const std::vector<std::vector<std::size_t>>& cls,
                       const std::vector<std::size_t>& seq) {
  const auto it = std::lower_bound(cls.begin(), cls.end(), seq);
  return static_cast<std::size_t>(it - cls.begin());
}

PerNRecord finalize_common(const SimConfig& cfg, const CommonSetup& s, const Pmf& psi,
                           TrialAccumulator& acc, int n, int threads) {
  PerNRecord rec;
  rec.n = n;
  rec.rate_bits = s.rate_bits;
  rec.coupling = cfg.mode == SimMode::iid_codebook ? "none" : (s.exact_ot ? "exact_ot" : "marton");

  const MeanStderr d = mean_stderr(acc.distortion);
  rec.distortion_mean = d.mean;
  rec.distortion_stderr = d.stderr_;

  const std::size_t ysize = psi.size();
  std::vector<std::int64_t> merged(static_cast<std::size_t>(n) * ysize, 0);
  for (int w = 0; w < threads; ++w)
    for (std::size_t k = 0; k < merged.size(); ++k) merged[k] += acc.ycounts[w][k];
  rec.per_coordinate_output_pmf.assign(n, std::vector<double>(ysize, 0.0));
  double stat = 0.0;
  int dof = 0;
  for (int i = 0; i < n; ++i) {
    std::int64_t rowsum = 0;
    for (std::size_t y = 0; y < ysize; ++y) rowsum += merged[i * ysize + y];
    int cells = 0;
    for (std::size_t y = 0; y < ysize; ++y) {
      rec.per_coordinate_output_pmf[i][y] =
          static_cast<double>(merged[i * ysize + y]) / static_cast<double>(rowsum);
      if (psi[y] > 0.0) {
        const double e = psi[y] * static_cast<double>(rowsum);
        const double diff = static_cast<double>(merged[i * ysize + y]) - e;
        stat += diff * diff / e;
        ++cells;
      } else if (merged[i * ysize + y] > 0) {
        stat = std::numeric_limits<double>::infinity();
      }
    }
    dof += cells - 1;
  }
  rec.marginal_chi2_p = dof > 0 ? chi_square_pvalue(stat, dof) : 1.0;

  rec.uniformity_chi2_p = kNaN;
  if (s.tabulate) {
    const auto& cls = class_list(s);
    std::vector<std::int64_t> ranks(cls.size(), 0);
    for (int w = 0; w < threads; ++w)
      for (std::size_t r = 0; r < cls.size(); ++r) ranks[r] += acc.rank_counts[w][r];
    rec.uniformity_chi2_p = chi_square_gof_pvalue(
        ranks, std::vector<double>(cls.size(), 1.0 / static_cast<double>(cls.size())));
  }

  const double kl_nats = n * normalized_type_kl_bits(psi, n) * std::numbers::ln2;
  rec.marton_bound = std::sqrt(kl_nats / (2.0 * n));
  rec.marton_observed = mean_stderr(acc.mismatch).mean;
  rec.marton_slack = rec.marton_bound - rec.marton_observed;
  return rec;
}

}  // namespace

SimResult simulate_finite(const SimConfig& cfg, int threads) {
  if (cfg.mode != SimMode::finite)
    throw std::invalid_argument("simulate_finite: config mode mismatch");
  if (!cfg.mu || !cfg.psi || !cfg.rho)
    throw std::invalid_argument("simulate_finite: mu, psi, rho required");
  if (cfg.trials < 1 || cfg.n_list.empty())
    throw std::invalid_argument("simulate_finite: need trials >= 1 and block lengths");
  const Pmf& mu = *cfg.mu;
  const Pmf& psi = *cfg.psi;
  const DistortionMatrix& rho = *cfg.rho;
  if (rho.rows() != mu.size() || rho.cols() != psi.size())
    throw std::invalid_argument("simulate_finite: distortion shape mismatch");
  threads = std::max(1, threads);

  SimResult result{cfg.mode, cfg.seed, cfg.trials, {}};
  const std::vector<double> mu_cdf = cumulative(mu.mass());

  for (std::size_t n_idx = 0; n_idx < cfg.n_list.size(); ++n_idx) {
    const int n = cfg.n_list[n_idx];
    CommonSetup setup = prepare_block(cfg, psi, rho, n, true);
    const auto& cls = class_list(setup);

    std::optional<Codebook> fixed;
    if (cfg.fixed_codebook) {
      Rng rng = Rng::stream(cfg.seed, n_idx, 0);
      fixed = generate_codebook(setup.ntype, cfg.rate_bits, rng, cfg.codebook_cap);
    }

    TrialAccumulator acc;
    acc.distortion.assign(cfg.trials, 0.0);
    acc.mismatch.assign(cfg.trials, 0.0);
    acc.ycounts.assign(threads, std::vector<std::int64_t>(static_cast<std::size_t>(n) * psi.size(), 0));
    acc.rank_counts.assign(threads, std::vector<std::int64_t>(setup.tabulate ? cls.size() : 0, 0));

    run_trials(cfg.trials, threads, [&](int w, int trial) {
      Rng rng = Rng::stream(cfg.seed, n_idx, static_cast<std::uint64_t>(trial) + 1);
      std::vector<std::size_t> x(n);
      for (int i = 0; i < n; ++i) x[i] = draw_from_cdf(mu_cdf, rng.uniform01());

      Encoded enc = [&] {
        if (fixed) return nn_encode(x, *fixed, rho);
        Codebook cb = generate_codebook(setup.ntype, cfg.rate_bits, rng, cfg.codebook_cap);
        return nn_encode(x, cb, rho);
      }();

      std::vector<std::size_t> y;
      if (setup.exact_ot) {
        const ExactCoupling& ec = *setup.coupling;
        const std::size_t row = class_rank(ec.class_seqs, enc.word);
        const std::size_t col =
            rng.categorical(ec.mass.data() + row * ec.cols, ec.cols);
        y = ec.decode(col);
      } else {
        y = marton_conditional_y(setup.ntype, enc.word, psi, rng);
      }

      acc.distortion[trial] = per_letter_distortion(x, y, rho);
      double mm = 0.0;
      for (int i = 0; i < n; ++i) mm += enc.word[i] != y[i];
      acc.mismatch[trial] = mm / n;
      for (int i = 0; i < n; ++i) acc.ycounts[w][i * psi.size() + y[i]]++;
      if (setup.tabulate) acc.rank_counts[w][class_rank(cls, enc.word)]++;
    });

    PerNRecord rec = finalize_common(cfg, setup, psi, acc, n, threads);
    RateDistortionPoint point{rec.rate_bits, rec.distortion_mean, n,
                              RateDistortionPoint::Source::simulated, rec.distortion_stderr};
    const ConverseCheck cc = converse_check(point, mu, psi, rho);
    rec.converse_margin = cc.margin;
    rec.converse_pass = cc.pass;
    result.records.push_back(std::move(rec));
  }
  return result;
}

SimResult simulate_iid_codebook(const SimConfig& cfg, int threads) {
  if (cfg.mode != SimMode::iid_codebook)
    throw std::invalid_argument("simulate_iid_codebook: config mode mismatch");
  if (!cfg.mu || !cfg.psi || !cfg.rho)
    throw std::invalid_argument("simulate_iid_codebook: mu, psi, rho required");
  const Pmf& mu = *cfg.mu;
  const Pmf& psi = *cfg.psi;
  const DistortionMatrix& rho = *cfg.rho;
  threads = std::max(1, threads);

  SimResult result{cfg.mode, cfg.seed, cfg.trials, {}};
  const std::vector<double> mu_cdf = cumulative(mu.mass());
  const std::vector<double> psi_cdf = cumulative(psi.mass());

  for (std::size_t n_idx = 0; n_idx < cfg.n_list.size(); ++n_idx) {
    const int n = cfg.n_list[n_idx];
    CommonSetup setup = prepare_block(cfg, psi, rho, n, false);
    setup.tabulate = false;

    TrialAccumulator acc;
    acc.distortion.assign(cfg.trials, 0.0);
    acc.mismatch.assign(cfg.trials, 0.0);
    acc.type_l1.assign(cfg.trials, 0.0);
    acc.ycounts.assign(threads,
                       std::vector<std::int64_t>(static_cast<std::size_t>(n) * psi.size(), 0));
    acc.rank_counts.assign(threads, {});

    run_trials(cfg.trials, threads, [&](int w, int trial) {
      Rng rng = Rng::stream(cfg.seed, n_idx, static_cast<std::uint64_t>(trial) + 1);
      std::vector<std::size_t> x(n);
      for (int i = 0; i < n; ++i) x[i] = draw_from_cdf(mu_cdf, rng.uniform01());

      Codebook cb{{}, setup.rate_bits, setup.ntype};
      cb.words.assign(setup.codebook_count, std::vector<std::size_t>(n));
      for (auto& word : cb.words)
        for (int i = 0; i < n; ++i) word[i] = draw_from_cdf(psi_cdf, rng.uniform01());

      Encoded enc = nn_encode(x, cb, rho);
      acc.distortion[trial] = per_letter_distortion(x, enc.word, rho);
      std::vector<std::int64_t> counts(psi.size(), 0);
      for (int i = 0; i < n; ++i) {
        acc.ycounts[w][i * psi.size() + enc.word[i]]++;
        counts[enc.word[i]]++;
      }
      double l1 = 0.0;
      for (std::size_t y = 0; y < psi.size(); ++y)
        l1 += std::abs(static_cast<double>(counts[y]) / n - psi[y]);
      acc.type_l1[trial] = l1;
    });

    PerNRecord rec = finalize_common(cfg, setup, psi, acc, n, threads);
    rec.marton_bound = kNaN;
    rec.marton_observed = kNaN;
    rec.marton_slack = kNaN;
    const MeanStderr tl = mean_stderr(acc.type_l1);
    rec.output_type_l1_mean = tl.mean;
    rec.output_type_l1_stderr = tl.stderr_;
    double ref = 0.0;
    for (std::size_t y = 0; y < psi.size(); ++y)
      ref += std::abs(static_cast<double>(setup.ntype.counts()[y]) / n - psi[y]);
    rec.type_scheme_l1 = ref;
    RateDistortionPoint point{rec.rate_bits, rec.distortion_mean, n,
                              RateDistortionPoint::Source::simulated, rec.distortion_stderr};
    const ConverseCheck cc = converse_check(point, mu, psi, rho);
    rec.converse_margin = cc.margin;
    rec.converse_pass = cc.pass;
    result.records.push_back(std::move(rec));
  }
  return result;
}

SimResult simulate_continuous(const SimConfig& cfg, int threads) {
  if (cfg.mode != SimMode::continuous)
    throw std::invalid_argument("simulate_continuous: config mode mismatch");
  if (!cfg.mu_density || !cfg.psi_density)
    throw std::invalid_argument("simulate_continuous: densities required");
  threads = std::max(1, threads);

  const Pmf mu_k = discretize(*cfg.mu_density, cfg.k, cfg.levels);
  const Pmf psi_k = discretize(*cfg.psi_density, cfg.k, cfg.levels);
  const DistortionMatrix rho_k =
      DistortionMatrix::squared_error(mu_k.alphabet(), psi_k.alphabet());
  const double step = 2.0 * cfg.k / cfg.levels;

  double t1_mu = 0.0, t1_psi = 0.0;
  for (int i = 0; i < cfg.levels; ++i) {
    const double lo = i == 0 ? -std::numeric_limits<double>::infinity() : -cfg.k + i * step;
    const double hi = i + 1 == cfg.levels ? std::numeric_limits<double>::infinity()
                                          : -cfg.k + (i + 1) * step;
    t1_mu += cfg.mu_density->partial_second_moment(mu_k.alphabet().label(i), lo, hi);
    t1_psi += cfg.psi_density->partial_second_moment(psi_k.alphabet().label(i), lo, hi);
  }

  auto cell_of = [&](double x) {
    if (x <= -cfg.k) return std::size_t{0};
    const std::size_t up = static_cast<std::size_t>(std::ceil((x + cfg.k) / step));
    return std::min<std::size_t>(up - 1, cfg.levels - 1);
  };
  const std::vector<double> psi_cum = cumulative(psi_k.mass());

  SimResult result{cfg.mode, cfg.seed, cfg.trials, {}};
  for (std::size_t n_idx = 0; n_idx < cfg.n_list.size(); ++n_idx) {
    const int n = cfg.n_list[n_idx];
    CommonSetup setup = prepare_block(cfg, psi_k, rho_k, n, true);
    const auto& cls = class_list(setup);

    TrialAccumulator acc;
    acc.distortion.assign(cfg.trials, 0.0);
    acc.mismatch.assign(cfg.trials, 0.0);
    acc.extra_a.assign(cfg.trials, 0.0);
    acc.extra_b.assign(cfg.trials, 0.0);
    acc.extra_c.assign(cfg.trials, 0.0);
    acc.ycounts.assign(threads,
                       std::vector<std::int64_t>(static_cast<std::size_t>(n) * psi_k.size(), 0));
    acc.rank_counts.assign(threads, std::vector<std::int64_t>(setup.tabulate ? cls.size() : 0, 0));

    run_trials(cfg.trials, threads, [&](int w, int trial) {
      Rng rng = Rng::stream(cfg.seed, n_idx, static_cast<std::uint64_t>(trial) + 1);
      std::vector<double> x(n);
      std::vector<std::size_t> xk(n);
      for (int i = 0; i < n; ++i) {
        x[i] = cfg.mu_density->sample(rng);
        xk[i] = cell_of(x[i]);
      }

      Codebook cb = generate_codebook(setup.ntype, cfg.rate_bits, rng, cfg.codebook_cap);
      Encoded enc = nn_encode(xk, cb, rho_k);

      std::vector<std::size_t> yk;
      if (setup.exact_ot) {
        const ExactCoupling& ec = *setup.coupling;
        const std::size_t row = class_rank(ec.class_seqs, enc.word);
        const std::size_t col = rng.categorical(ec.mass.data() + row * ec.cols, ec.cols);
        yk = ec.decode(col);
      } else {
        yk = marton_conditional_y(setup.ntype, enc.word, psi_k, rng);
      }

      double a = 0.0, bsum = 0.0, csum = 0.0, total = 0.0, mm = 0.0;
      for (int i = 0; i < n; ++i) {
        const double xl = mu_k.alphabet().label(xk[i]);
        const double yl = psi_k.alphabet().label(yk[i]);
        const double base = yk[i] == 0 ? 0.0 : psi_cum[yk[i] - 1];
        const double u = base + rng.uniform01() * (psi_cum[yk[i]] - base);
        const double y = cfg.psi_density->quantile(u);
        a += (x[i] - xl) * (x[i] - xl);
        bsum += (xl - yl) * (xl - yl);
        csum += (yl - y) * (yl - y);
        total += (x[i] - y) * (x[i] - y);
        mm += enc.word[i] != yk[i];
        acc.ycounts[w][i * psi_k.size() + yk[i]]++;
      }
      acc.extra_a[trial] = a / n;
      acc.extra_b[trial] = bsum / n;
      acc.extra_c[trial] = csum / n;
      acc.distortion[trial] = total / n;
      acc.mismatch[trial] = mm / n;
      if (setup.tabulate) acc.rank_counts[w][class_rank(cls, enc.word)]++;
    });

    PerNRecord rec = finalize_common(cfg, setup, psi_k, acc, n, threads);
    rec.step_a_mean = mean_stderr(acc.extra_a).mean;
    rec.step_b_mean = mean_stderr(acc.extra_b).mean;
    rec.step_c_mean = mean_stderr(acc.extra_c).mean;
    rec.t1_mu_analytic = t1_mu;
    rec.t1_psi_analytic = t1_psi;
    // Converse applies to the finite inner stage against its own curve.
    const MeanStderr sb = mean_stderr(acc.extra_b);
    RateDistortionPoint point{rec.rate_bits, sb.mean, n, RateDistortionPoint::Source::simulated,
                              sb.stderr_};
    const ConverseCheck cc = converse_check(point, mu_k, psi_k, rho_k);
    rec.converse_margin = cc.margin;
    rec.converse_pass = cc.pass;
    result.records.push_back(std::move(rec));
  }
  return result;
}

void write_sim_csv(std::ostream& os, const SimResult& result) {
  os << "n,rate_bits,distortion_mean,distortion_stderr,marginal_chi2_p,uniformity_chi2_p,"
        "marton_bound,marton_observed,converse_margin\n";
  for (const auto& r : result.records)
    os << r.n << ',' << format_double(r.rate_bits) << ',' << format_double(r.distortion_mean)
       << ',' << format_double(r.distortion_stderr) << ',' << format_double(r.marginal_chi2_p)
       << ',' << format_double(r.uniformity_chi2_p) << ',' << format_double(r.marton_bound) << ','
       << format_double(r.marton_observed) << ',' << format_double(r.converse_margin) << '\n';
}

std::string sim_result_to_json(const SimResult& result) {
  nlohmann::json j;
  j["mode"] = result.mode == SimMode::finite
                  ? "finite"
                  : (result.mode == SimMode::continuous ? "continuous" : "iid");
  j["seed"] = result.seed;
  j["trials"] = result.trials;
  j["records"] = nlohmann::json::array();
  for (const auto& r : result.records) {
    nlohmann::json rec{{"n", r.n},
                       {"rate_bits", r.rate_bits},
                       {"distortion_mean", r.distortion_mean},
                       {"distortion_stderr", r.distortion_stderr},
                       {"marginal_chi2_p", r.marginal_chi2_p},
                       {"coupling", r.coupling},
                       {"converse_margin", r.converse_margin},
                       {"converse_pass", r.converse_pass},
                       {"per_coordinate_output_pmf", r.per_coordinate_output_pmf}};
    auto set_opt = [&rec](const char* key, double v) {
      if (std::isnan(v))
        rec[key] = nullptr;
      else
        rec[key] = v;
    };
    set_opt("uniformity_chi2_p", r.uniformity_chi2_p);
    set_opt("marton_bound", r.marton_bound);
    set_opt("marton_observed", r.marton_observed);
    set_opt("marton_slack", r.marton_slack);
    if (result.mode == SimMode::continuous) {
      rec["step_a_mean"] = r.step_a_mean;
      rec["step_b_mean"] = r.step_b_mean;
      rec["step_c_mean"] = r.step_c_mean;
      rec["t1_mu_analytic"] = r.t1_mu_analytic;
      rec["t1_psi_analytic"] = r.t1_psi_analytic;
    }
    if (result.mode == SimMode::iid_codebook) {
      rec["output_type_l1_mean"] = r.output_type_l1_mean;
      rec["output_type_l1_stderr"] = r.output_type_l1_stderr;
      rec["type_scheme_l1"] = r.type_scheme_l1;
    }
    j["records"].push_back(std::move(rec));
  }
  return j.dump(2) + "\n";
}

}  // namespace oclab
