#include "oclab/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oclab/stats.hpp"
#include "oclab/transport.hpp"

namespace oclab {

NType::NType(std::vector<std::int64_t> counts, int n) : counts_(std::move(counts)), n_(n) {
  if (n_ < 1) throw std::invalid_argument("NType: n must be >= 1");
  if (counts_.empty()) throw std::invalid_argument("NType: empty counts");
  std::int64_t total = 0;
  for (std::int64_t c : counts_) {
    if (c < 0) throw std::invalid_argument("NType: negative count");
    total += c;
  }
  if (total != n_) throw std::invalid_argument("NType: counts must sum to n");
}

std::vector<double> NType::pmf_mass() const {
  std::vector<double> m(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i)
    m[i] = static_cast<double>(counts_[i]) / static_cast<double>(n_);
  return m;
}

NType closest_ntype(const Pmf& psi, int n) {
  if (n < 1) throw std::invalid_argument("closest_ntype: n must be >= 1");
  const std::size_t k = psi.size();
  std::vector<std::int64_t> counts(k, 0);
  std::vector<double> frac(k, 0.0);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    if (psi[i] <= 0.0) continue;
    const double target = psi[i] * static_cast<double>(n);
    counts[i] = static_cast<std::int64_t>(std::floor(target));
    frac[i] = target - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::int64_t deficit = static_cast<std::int64_t>(n) - assigned;
  // Give the remaining units to the largest fractional parts; ties prefer
  // smaller labels.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < k; ++i)
    if (psi[i] > 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; deficit > 0; ++r) {
    counts[order[r % order.size()]] += 1;
    --deficit;
  }
  return NType(std::move(counts), n);
}

namespace {
bool mul_overflow(unsigned __int128 a, unsigned __int128 b, unsigned __int128* out) {
  if (a != 0 && b > static_cast<unsigned __int128>(-1) / a) return true;
  *out = a * b;
  return false;
}

// Multinomial coefficient if it fits 128 bits, else 0 with *exact = false.
unsigned __int128 multinomial_128(const std::vector<std::int64_t>& counts, bool* exact) {
  unsigned __int128 result = 1;
  std::int64_t total = 0;
  *exact = true;
  for (std::int64_t c : counts) {
    for (std::int64_t k = 1; k <= c; ++k) {
      ++total;
      unsigned __int128 tmp;
      if (mul_overflow(result, static_cast<unsigned __int128>(total), &tmp)) {
        *exact = false;
        return 0;
      }
      result = tmp / static_cast<unsigned __int128>(k);  // exact: C(total,k) chain
    }
  }
  return result;
}
}  // namespace

double type_class_log_size_bits(const NType& t) {
  bool exact = false;
  const unsigned __int128 v = multinomial_128(t.counts(), &exact);
  if (exact) {
    // log2 of a 128-bit integer via its leading 64 bits.
    const std::uint64_t hi = static_cast<std::uint64_t>(v >> 64);
    if (hi == 0) return std::log2(static_cast<double>(static_cast<std::uint64_t>(v)));
    return 64.0 + std::log2(static_cast<double>(hi) +
                            static_cast<double>(static_cast<std::uint64_t>(v)) * 0x1.0p-64);
  }
  double lg = std::lgamma(static_cast<double>(t.n()) + 1.0);
  for (std::int64_t c : t.counts()) lg -= std::lgamma(static_cast<double>(c) + 1.0);
  return lg / std::log(2.0);
}

TypeClassInfo make_type_class_info(const Pmf& psi, int n) {
  NType t = closest_ntype(psi, n);
  const std::vector<double> p = t.pmf_mass();
  const double h = entropy_bits(p);
  const double kl = kl_divergence(Pmf(psi.alphabet(), p), psi).bits();
  const double logsize = type_class_log_size_bits(t);
  return TypeClassInfo{std::move(t), logsize, h, kl};
}

std::vector<std::size_t> sample_uniform_type_class(const NType& t, Rng& rng) {
  std::vector<std::size_t> seq;
  seq.reserve(static_cast<std::size_t>(t.n()));
  for (std::size_t y = 0; y < t.alphabet_size(); ++y)
    for (std::int64_t c = 0; c < t.counts()[y]; ++c) seq.push_back(y);
  rng.shuffle(seq);
  return seq;
}

Pmf conditional_remaining(const NType& t, const std::vector<std::int64_t>& prefix_counts,
                          const Alphabet& y) {
  if (prefix_counts.size() != t.alphabet_size() || y.size() != t.alphabet_size())
    throw std::invalid_argument("conditional_remaining: size mismatch");
  std::int64_t remaining = 0;
  std::vector<double> m(t.alphabet_size(), 0.0);
  for (std::size_t i = 0; i < t.alphabet_size(); ++i) {
    const std::int64_t r = t.counts()[i] - prefix_counts[i];
    if (r < 0) throw std::invalid_argument("conditional_remaining: prefix exceeds type");
    remaining += r;
  }
  if (remaining == 0) throw std::invalid_argument("conditional_remaining: prefix exhausts type");
  for (std::size_t i = 0; i < t.alphabet_size(); ++i)
    m[i] = static_cast<double>(t.counts()[i] - prefix_counts[i]) / static_cast<double>(remaining);
  return Pmf(y, std::move(m));
}

double normalized_type_kl_bits(const Pmf& psi, int n) {
  const TypeClassInfo info = make_type_class_info(psi, n);
  const double total =
      static_cast<double>(n) * (info.entropy_bits + info.kl_to_target_bits) - info.log_size_bits;
  return std::max(0.0, total / static_cast<double>(n));
}

std::vector<std::vector<std::size_t>> enumerate_type_class(const NType& t, std::size_t cap) {
  std::vector<std::size_t> seq;
  for (std::size_t y = 0; y < t.alphabet_size(); ++y)
    for (std::int64_t c = 0; c < t.counts()[y]; ++c) seq.push_back(y);
  const double log_size = type_class_log_size_bits(t);
  if (log_size > std::log2(static_cast<double>(cap)) + 1e-9)
    throw std::invalid_argument("enumerate_type_class: class larger than cap");
  std::vector<std::vector<std::size_t>> out;
  do {
    out.push_back(seq);
  } while (std::next_permutation(seq.begin(), seq.end()));
  return out;
}

}  // namespace oclab
