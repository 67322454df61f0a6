#ifndef OCLAB_CORE_HPP
#define OCLAB_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace oclab {

// Finite ordered set of real-valued point labels, strictly increasing.
class Alphabet {
 public:
  explicit Alphabet(std::vector<double> points);

  std::size_t size() const { return points_.size(); }
  double label(std::size_t i) const { return points_[i]; }
  const std::vector<double>& points() const { return points_; }

  bool operator==(const Alphabet& other) const { return points_ == other.points_; }

 private:
  std::vector<double> points_;
};

// Probability mass function over an Alphabet. Entries nonnegative, total mass
// within 1e-12 of one.
class Pmf {
 public:
  Pmf(Alphabet alphabet, std::vector<double> mass);

  const Alphabet& alphabet() const { return alphabet_; }
  const std::vector<double>& mass() const { return mass_; }
  double operator[](std::size_t i) const { return mass_[i]; }
  std::size_t size() const { return mass_.size(); }

  static Pmf uniform(Alphabet alphabet);
  static Pmf point_mass(Alphabet alphabet, std::size_t index);

 private:
  Alphabet alphabet_;
  std::vector<double> mass_;
};

// Joint probability mass on X x Y, stored row-major. Entries below -1e-12 are
// rejected; tiny negative round-off is clamped to zero.
class JointPmf {
 public:
  JointPmf(Alphabet x, Alphabet y, std::vector<double> mass_row_major);

  const Alphabet& x_alphabet() const { return x_; }
  const Alphabet& y_alphabet() const { return y_; }
  std::size_t rows() const { return x_.size(); }
  std::size_t cols() const { return y_.size(); }
  double at(std::size_t i, std::size_t j) const { return mass_[i * cols() + j]; }
  const std::vector<double>& mass() const { return mass_; }

 private:
  Alphabet x_;
  Alphabet y_;
  std::vector<double> mass_;
};

Pmf x_marginal(const JointPmf& v);
Pmf output_marginal(const JointPmf& v);

// Nonnegative finite cost table rho(x, y).
class DistortionMatrix {
 public:
  DistortionMatrix(std::size_t rows, std::size_t cols, std::vector<double> cost_row_major);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t i, std::size_t j) const { return cost_[i * cols_ + j]; }
  const std::vector<double>& cost() const { return cost_; }

  static DistortionMatrix squared_error(const Alphabet& x, const Alphabet& y);
  static DistortionMatrix hamming(const Alphabet& x, const Alphabet& y);

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> cost_;
};

// Deterministic map from X indices to Y indices using at most `level_budget`
// distinct outputs.
class DeterministicQuantizer {
 public:
  DeterministicQuantizer(std::vector<std::size_t> map, std::size_t level_budget);

  const std::vector<std::size_t>& map() const { return map_; }
  std::size_t operator()(std::size_t x) const { return map_[x]; }
  std::size_t input_size() const { return map_.size(); }
  std::size_t level_budget() const { return level_budget_; }

 private:
  std::vector<std::size_t> map_;
  std::size_t level_budget_;
};

// Shared-randomness quantizer: a table q(x, z) of Y indices where every
// z-column is an M-level quantizer, together with the randomizer law nu.
class Model2Quantizer {
 public:
  Model2Quantizer(std::size_t x_size, std::vector<std::size_t> table_row_major, Pmf nu,
                  std::size_t level_budget);

  std::size_t x_size() const { return x_size_; }
  std::size_t z_size() const { return nu_.size(); }
  const Alphabet& z_alphabet() const { return nu_.alphabet(); }
  const Pmf& nu() const { return nu_; }
  std::size_t level_budget() const { return level_budget_; }
  std::size_t at(std::size_t x, std::size_t z) const { return table_[x * z_size() + z]; }
  const std::vector<std::size_t>& table() const { return table_; }
  DeterministicQuantizer column(std::size_t z) const;

 private:
  std::size_t x_size_;
  std::vector<std::size_t> table_;
  Pmf nu_;
  std::size_t level_budget_;
};

// Encoder/decoder pair with shared randomizer: encoder(x, z) yields an index
// in [0, M); decoder(index, z) yields a Y index.
class Model1Code {
 public:
  Model1Code(std::size_t x_size, std::vector<std::size_t> encoder_row_major,
             std::size_t level_budget, std::vector<std::size_t> decoder_row_major, Pmf nu);

  std::size_t x_size() const { return x_size_; }
  std::size_t z_size() const { return nu_.size(); }
  std::size_t level_budget() const { return level_budget_; }
  const Pmf& nu() const { return nu_; }
  std::size_t encode(std::size_t x, std::size_t z) const { return encoder_[x * z_size() + z]; }
  std::size_t decode(std::size_t index, std::size_t z) const {
    return decoder_[index * z_size() + z];
  }
  const std::vector<std::size_t>& encoder() const { return encoder_; }
  const std::vector<std::size_t>& decoder() const { return decoder_; }

 private:
  std::size_t x_size_;
  std::vector<std::size_t> encoder_;
  std::vector<std::size_t> decoder_;
  Pmf nu_;
  std::size_t level_budget_;
};

// Finitely randomized quantizer: convex weights over deterministic quantizers
// sharing input size and level budget.
class FiniteMixtureQuantizer {
 public:
  FiniteMixtureQuantizer(std::vector<double> weights,
                         std::vector<DeterministicQuantizer> quantizers);

  const std::vector<double>& weights() const { return weights_; }
  const std::vector<DeterministicQuantizer>& quantizers() const { return quantizers_; }
  std::size_t components() const { return weights_.size(); }

 private:
  std::vector<double> weights_;
  std::vector<DeterministicQuantizer> quantizers_;
};

// v(x, y) = mu(x) when y = q(x), zero otherwise; the X-marginal reproduces mu
// exactly, entry by entry.
JointPmf induced_joint(const DeterministicQuantizer& q, const Pmf& mu, const Alphabet& y);

JointPmf mixture_joint(const FiniteMixtureQuantizer& m, const Pmf& mu, const Alphabet& y);

double distortion(const JointPmf& v, const DistortionMatrix& rho);

FiniteMixtureQuantizer model2_to_model3(const Model2Quantizer& m2);

Model2Quantizer model1_to_model2(const Model1Code& m1);

// Indices are assigned per z-column in order of first appearance; decoder rows
// never reached by the encoder are filled with the column's first output.
Model1Code model2_to_model1(const Model2Quantizer& m2);

enum class DitherMode { subtractive, nonsubtractive };

struct DitherDemo {
  Alphabet x_alphabet;
  Alphabet y_alphabet;
  Model2Quantizer quantizer;
};

// Scalar dithered uniform quantizer on an L-level grid with spacing `step`
// centered at zero. The input alphabet is the grid itself; outputs are
// q_u(x+z)-z (subtractive) or q_u(x+z) (nonsubtractive) where q_u is the
// nearest-level map with ties broken toward the smaller label. Inputs x+z
// that would saturate the grid (beyond the outer half-cells) are an error.
DitherDemo dither_demo(int levels, double step, const Alphabet& z_alphabet, const Pmf& nu,
                       DitherMode mode);

}  // namespace oclab

#endif  // OCLAB_CORE_HPP
