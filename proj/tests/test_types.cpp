#include <doctest.h>

#include <cmath>
#include <map>

#include "oclab/stats.hpp"
#include "oclab/transport.hpp"
#include "oclab/types.hpp"
#include "oracles.hpp"

using namespace oclab;

namespace {
Alphabet binary() { return Alphabet({0.0, 1.0}); }
}  // namespace

TEST_CASE("closest ntype") {
  CHECK(closest_ntype(Pmf(binary(), {0.5, 0.5}), 4).counts() ==
        std::vector<std::int64_t>({2, 2}));
  CHECK(closest_ntype(Pmf(binary(), {1.0, 0.0}), 7).counts() ==
        std::vector<std::int64_t>({7, 0}));

  // Enumerate all five binary 4-types and pick the l1-closest by hand.
  Pmf psi(binary(), {0.7, 0.3});
  NType got = closest_ntype(psi, 4);
  double best = 1e9;
  std::vector<std::int64_t> best_counts;
  for (std::int64_t k = 0; k <= 4; ++k) {
    const double l1 = std::abs(k / 4.0 - 0.7) + std::abs((4 - k) / 4.0 - 0.3);
    if (l1 < best - 1e-15) {
      best = l1;
      best_counts = {k, 4 - k};
    }
  }
  CHECK(got.counts() == best_counts);
  CHECK(got.counts() == std::vector<std::int64_t>({3, 1}));

  // Tie at n*psi = (1.5, 1.5): smaller label takes the extra unit.
  CHECK(closest_ntype(Pmf(binary(), {0.5, 0.5}), 3).counts() ==
        std::vector<std::int64_t>({2, 1}));

  // Absolute continuity: zero-mass labels keep zero counts.
  Alphabet tri({0.0, 1.0, 2.0});
  NType t = closest_ntype(Pmf(tri, {0.5, 0.0, 0.5}), 5);
  CHECK(t.counts()[1] == 0);
}

TEST_CASE("type class log size") {
  CHECK(type_class_log_size_bits(NType({2, 2}, 4)) == doctest::Approx(std::log2(6.0)).epsilon(1e-12));
  CHECK(type_class_log_size_bits(NType({4, 0}, 4)) == 0.0);
  CHECK(type_class_log_size_bits(NType({3, 1}, 4)) == doctest::Approx(2.0).epsilon(1e-12));
  // Exact 128-bit path against lgamma for a larger class.
  NType big({40, 40}, 80);
  const double lg = (std::lgamma(81.0) - 2 * std::lgamma(41.0)) / std::log(2.0);
  CHECK(type_class_log_size_bits(big) == doctest::Approx(lg).epsilon(1e-9));
  // Very large classes fall back to log-gamma and stay finite.
  NType huge(std::vector<std::int64_t>(200, 1), 200);
  CHECK(std::isfinite(type_class_log_size_bits(huge)));
}

TEST_CASE("type class info sandwich") {
  for (int n : {4, 8, 16, 32, 64, 128}) {
    TypeClassInfo info = make_type_class_info(Pmf(binary(), {0.5, 0.5}), n);
    const double nh = n * info.entropy_bits;
    CHECK(info.log_size_bits <= nh + 1e-9);
    CHECK(info.log_size_bits >= nh - 2.0 * std::log2(n + 1.0) - 1e-9);
  }
}

TEST_CASE("uniform type class sampling") {
  // Singleton class.
  Rng rng = Rng::stream(5, 0);
  auto s = sample_uniform_type_class(NType({2, 0}, 2), rng);
  CHECK(s == std::vector<std::size_t>({0, 0}));

  // Empirical type equals the type on every draw.
  NType t22({2, 2}, 4);
  for (int k = 0; k < 100; ++k) {
    auto seq = sample_uniform_type_class(t22, rng);
    std::int64_t ones = 0;
    for (auto y : seq) ones += y == 1;
    CHECK(ones == 2);
  }

  // Chi-square uniformity over the two arrangements of (1,1).
  NType t11({1, 1}, 2);
  std::vector<std::int64_t> c2(2, 0);
  for (int k = 0; k < 100000; ++k) c2[sample_uniform_type_class(t11, rng)[0]]++;
  CHECK(chi_square_gof_pvalue(c2, {0.5, 0.5}) > 0.01);

  // Chi-square uniformity over the six sequences of (2,2).
  auto cls = enumerate_type_class(t22);
  CHECK(cls.size() == 6);
  std::map<std::vector<std::size_t>, std::size_t> rank;
  for (std::size_t i = 0; i < cls.size(); ++i) rank[cls[i]] = i;
  std::vector<std::int64_t> c6(6, 0);
  for (int k = 0; k < 120000; ++k) c6[rank.at(sample_uniform_type_class(t22, rng))]++;
  CHECK(chi_square_gof_pvalue(c6, std::vector<double>(6, 1.0 / 6.0)) > 0.01);
}

TEST_CASE("conditional remaining") {
  Alphabet b = binary();
  NType t({2, 2}, 4);
  Pmf p0 = conditional_remaining(t, {0, 0}, b);
  CHECK(p0[0] == 0.5);

  Pmf p1 = conditional_remaining(t, {2, 0}, b);
  CHECK(p1[0] == 0.0);
  CHECK(p1[1] == 1.0);

  Pmf p2 = conditional_remaining(t, {1, 0}, b);
  CHECK(p2[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(p2[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS(conditional_remaining(t, {2, 2}, b));
  CHECK_THROWS(conditional_remaining(t, {3, 0}, b));
}

TEST_CASE("sequential conditional probabilities integrate to 1/|T_n|") {
  Alphabet b = binary();
  NType t({3, 2}, 5);
  const auto cls = enumerate_type_class(t);
  // Exact rational check: along each sequence the product of remaining-count
  // fractions is prod(remaining numerators)/prod(remaining totals).
  for (const auto& seq : cls) {
    __int128 num = 1, den = 1;
    std::vector<std::int64_t> prefix(2, 0);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const std::int64_t remaining_total = static_cast<std::int64_t>(seq.size() - i);
      num *= t.counts()[seq[i]] - prefix[seq[i]];
      den *= remaining_total;
      prefix[seq[i]]++;
    }
    CHECK(static_cast<__int128>(cls.size()) * num == den);
  }
}

TEST_CASE("normalized type kl closed form and decrease") {
  Pmf u(binary(), {0.5, 0.5});
  const double v4 = normalized_type_kl_bits(u, 4);
  CHECK(v4 == doctest::Approx(0.25 * std::log2(16.0 / 6.0)).epsilon(1e-12));
  CHECK(v4 == doctest::Approx(0.35376).epsilon(1e-4));

  double prev = v4;
  for (int n : {8, 16, 32, 64, 128}) {
    const double v = normalized_type_kl_bits(u, n);
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < 0.06);

  // Point-mass target: singleton class, zero divergence.
  CHECK(normalized_type_kl_bits(Pmf(binary(), {1.0, 0.0}), 9) == 0.0);
}

TEST_CASE("normalized type kl sandwich bounds") {
  Pmf u(binary(), {0.5, 0.5});
  for (int n : {4, 8, 16, 32, 64, 128}) {
    TypeClassInfo info = make_type_class_info(u, n);
    const double v = normalized_type_kl_bits(u, n);
    CHECK(v >= info.kl_to_target_bits - 1e-12);
    CHECK(v <= info.kl_to_target_bits + 2.0 * std::log2(n + 1.0) / n + 1e-12);
  }
}
