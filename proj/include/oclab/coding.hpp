#ifndef OCLAB_CODING_HPP
#define OCLAB_CODING_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "oclab/core.hpp"
#include "oclab/info.hpp"
#include "oclab/rng.hpp"
#include "oclab/types.hpp"

namespace oclab {

struct Codebook {
  std::vector<std::vector<std::size_t>> words;  // y-index sequences of length n
  double rate_bits = 0.0;                       // log2(count)/n actually realized
  NType ntype;
};

// ceil(2^{n R}) codewords drawn i.i.d. uniformly from the type class.
Codebook generate_codebook(const NType& t, double rate_bits, Rng& rng,
                           std::size_t cap = 1u << 20);

struct Encoded {
  std::size_t index = 0;
  std::vector<std::size_t> word;
};

// Nearest-neighbor encoding under per-letter average distortion; ties go to
// the smallest index.
Encoded nn_encode(const std::vector<std::size_t>& x, const Codebook& cb,
                  const DistortionMatrix& rho);

struct MartonPair {
  std::vector<std::size_t> xhat;
  std::vector<std::size_t> y;
};

// Sequential per-coordinate maximal coupling of a uniform type-class draw
// against the i.i.d. law psi^n. The xhat marginal is exactly uniform on the
// class, the y marginal exactly psi^n, and the expected per-letter Hamming
// mismatch is bounded by sqrt(KL_nats(class||psi^n) / (2n)).
MartonPair marton_coupling(const NType& t, const Pmf& psi, Rng& rng);

// Conditional leg of the same coupling: draws y given an xhat already
// distributed uniformly on the class.
std::vector<std::size_t> marton_conditional_y(const NType& t,
                                              const std::vector<std::size_t>& xhat,
                                              const Pmf& psi, Rng& rng);

struct DensitySpec {
  enum class Family { gaussian, uniform };
  Family family = Family::gaussian;
  double a = 0.0;  // gaussian: mean, uniform: lower endpoint
  double b = 1.0;  // gaussian: standard deviation, uniform: upper endpoint

  double cdf(double x) const;
  double quantile(double u) const;
  double sample(Rng& rng) const;
  // E[(X - c)^2 ; lo < X <= hi]
  double partial_second_moment(double c, double lo, double hi) const;
};

// L-level uniform quantizer on [-k, k] extended to the line by the
// nearest-level rule; labels are cell midpoints and the outer cells absorb
// the tails. Probabilities are CDF differences.
Pmf discretize(const DensitySpec& density, double k, int levels);

enum class SimMode { finite, continuous, iid_codebook };

struct SimConfig {
  SimMode mode = SimMode::finite;
  // finite / iid_codebook mode
  std::optional<Pmf> mu;
  std::optional<Pmf> psi;
  std::optional<DistortionMatrix> rho;
  // continuous mode (squared error on the discretized grid)
  std::optional<DensitySpec> mu_density;
  std::optional<DensitySpec> psi_density;
  double k = 4.0;
  int levels = 16;

  double rate_bits = 0.5;
  std::vector<int> n_list;
  int trials = 1000;
  std::uint64_t seed = 0;
  // Variance studies only: freezing the codebook removes the common
  // randomness behind the encoder-uniformity and exact-output-law guarantees.
  bool fixed_codebook = false;
  std::size_t codebook_cap = 1u << 20;
  double product_space_cap = 1e6;     // exact OT coupling when |T_n|*|Y|^n fits
  std::size_t uniformity_cap = 10000;  // tabulate encoder law when |T_n| fits
};

struct PerNRecord {
  int n = 0;
  double rate_bits = 0.0;
  double distortion_mean = 0.0;
  double distortion_stderr = 0.0;
  std::vector<std::vector<double>> per_coordinate_output_pmf;
  double marginal_chi2_p = 0.0;
  double uniformity_chi2_p = 0.0;  // NaN when the class is too large
  double marton_bound = 0.0;
  double marton_observed = 0.0;
  double marton_slack = 0.0;
  double converse_margin = 0.0;
  bool converse_pass = false;
  std::string coupling;  // "exact_ot", "marton" or "none"

  // continuous mode: measured legs and analytic per-letter coupling costs
  double step_a_mean = 0.0;
  double step_b_mean = 0.0;
  double step_c_mean = 0.0;
  double t1_mu_analytic = 0.0;
  double t1_psi_analytic = 0.0;

  // iid_codebook mode: mean l1 distance of the output type from psi, and the
  // fixed distance the type-class scheme attains
  double output_type_l1_mean = 0.0;
  double output_type_l1_stderr = 0.0;
  double type_scheme_l1 = 0.0;
};

struct SimResult {
  SimMode mode = SimMode::finite;
  std::uint64_t seed = 0;
  int trials = 0;
  std::vector<PerNRecord> records;
};

SimResult simulate_finite(const SimConfig& cfg, int threads = 1);
SimResult simulate_iid_codebook(const SimConfig& cfg, int threads = 1);
SimResult simulate_continuous(const SimConfig& cfg, int threads = 1);

// Chi-square goodness of fit of encoder outputs against the uniform law on
// the type class (tabulated classes only).
double lemma2_uniformity_test(const NType& t,
                              const std::vector<std::vector<std::size_t>>& samples,
                              std::size_t cap = 10000);

void write_sim_csv(std::ostream& os, const SimResult& result);
struct SimResultJson;  // see json_io usage in cli
std::string sim_result_to_json(const SimResult& result);

}  // namespace oclab

#endif  // OCLAB_CODING_HPP
