#ifndef OCLAB_TYPES_HPP
#define OCLAB_TYPES_HPP

#include <cstdint>
#include <vector>

#include "oclab/core.hpp"
#include "oclab/rng.hpp"

namespace oclab {

// Empirical type of length-n sequences over Y: counts summing to n.
class NType {
 public:
  NType(std::vector<std::int64_t> counts, int n);

  const std::vector<std::int64_t>& counts() const { return counts_; }
  int n() const { return n_; }
  std::size_t alphabet_size() const { return counts_.size(); }
  std::vector<double> pmf_mass() const;

 private:
  std::vector<std::int64_t> counts_;
  int n_;
};

// Closest n-type to psi in l1 distance among types absolutely continuous
// w.r.t. psi. Ties are broken by loading smaller labels first, which makes
// the count vector lexicographically largest; this convention is a choice,
// equidistant types do occur.
NType closest_ntype(const Pmf& psi, int n);

// log2 of the exact multinomial coefficient n! / prod(counts!). Exact integer
// arithmetic while the coefficient fits 128 bits, log-gamma otherwise.
double type_class_log_size_bits(const NType& t);

struct TypeClassInfo {
  NType ntype;
  double log_size_bits;
  double entropy_bits;
  double kl_to_target_bits;
};

TypeClassInfo make_type_class_info(const Pmf& psi, int n);

// Uniform draw from the type class: random permutation of the canonical
// sequence with the given counts.
std::vector<std::size_t> sample_uniform_type_class(const NType& t, Rng& rng);

// Law of the next symbol of a uniform type-class draw given the prefix
// counts: proportional to the remaining counts.
Pmf conditional_remaining(const NType& t, const std::vector<std::int64_t>& prefix_counts,
                          const Alphabet& y);

// (1/n) * D(uniform-on-class || psi^n) in bits, evaluated in closed form as
// (1/n) * [n (H(type) + D(type||psi)) - log2 |T_n|].
double normalized_type_kl_bits(const Pmf& psi, int n);

// All sequences of the class in lexicographic order; throws above `cap`.
std::vector<std::vector<std::size_t>> enumerate_type_class(const NType& t,
                                                           std::size_t cap = 10000);

}  // namespace oclab

#endif  // OCLAB_TYPES_HPP
