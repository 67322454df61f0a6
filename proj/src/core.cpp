#include "oclab/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace oclab {

namespace {
constexpr double kMassTol = 1e-12;

void check_mass_vector(const std::vector<double>& mass, const char* what) {
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0) || !std::isfinite(m))
      throw std::invalid_argument(std::string(what) + ": entries must be nonnegative and finite");
    total += m;
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw std::invalid_argument(std::string(what) + ": total mass must be 1 within 1e-12");
}
}  // namespace

Alphabet::Alphabet(std::vector<double> points) : points_(std::move(points)) {
  if (points_.empty()) throw std::invalid_argument("Alphabet: must be nonempty");
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    if (!(points_[i] < points_[i + 1]))
      throw std::invalid_argument("Alphabet: labels must be strictly increasing");
  }
  for (double p : points_) {
    if (!std::isfinite(p)) throw std::invalid_argument("Alphabet: labels must be finite");
  }
}

Pmf::Pmf(Alphabet alphabet, std::vector<double> mass)
    : alphabet_(std::move(alphabet)), mass_(std::move(mass)) {
  if (mass_.size() != alphabet_.size())
    throw std::invalid_argument("Pmf: mass length must equal alphabet size");
  check_mass_vector(mass_, "Pmf");
}

Pmf Pmf::uniform(Alphabet alphabet) {
  std::vector<double> m(alphabet.size(), 1.0 / static_cast<double>(alphabet.size()));
  return Pmf(std::move(alphabet), std::move(m));
}

Pmf Pmf::point_mass(Alphabet alphabet, std::size_t index) {
  if (index >= alphabet.size()) throw std::invalid_argument("Pmf::point_mass: index out of range");
  std::vector<double> m(alphabet.size(), 0.0);
  m[index] = 1.0;
  return Pmf(std::move(alphabet), std::move(m));
}

JointPmf::JointPmf(Alphabet x, Alphabet y, std::vector<double> mass_row_major)
    : x_(std::move(x)), y_(std::move(y)), mass_(std::move(mass_row_major)) {
  if (mass_.size() != x_.size() * y_.size())
    throw std::invalid_argument("JointPmf: mass size must be |X|*|Y|");
  double total = 0.0;
  for (double& m : mass_) {
    if (!std::isfinite(m)) throw std::invalid_argument("JointPmf: entries must be finite");
    if (m < 0.0) {
      if (m < -kMassTol) throw std::invalid_argument("JointPmf: negative entry");
      m = 0.0;
    }
    total += m;
  }
  if (std::abs(total - 1.0) > kMassTol)
    throw std::invalid_argument("JointPmf: total mass must be 1 within 1e-12");
}

Pmf x_marginal(const JointPmf& v) {
  std::vector<double> m(v.rows(), 0.0);
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) m[i] += v.at(i, j);
  return Pmf(v.x_alphabet(), std::move(m));
}

Pmf output_marginal(const JointPmf& v) {
  std::vector<double> m(v.cols(), 0.0);
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) m[j] += v.at(i, j);
  return Pmf(v.y_alphabet(), std::move(m));
}

DistortionMatrix::DistortionMatrix(std::size_t rows, std::size_t cols,
                                   std::vector<double> cost_row_major)
    : rows_(rows), cols_(cols), cost_(std::move(cost_row_major)) {
  if (cost_.size() != rows_ * cols_)
    throw std::invalid_argument("DistortionMatrix: cost size must be rows*cols");
  for (double c : cost_) {
    if (!(c >= 0.0) || !std::isfinite(c))
      throw std::invalid_argument("DistortionMatrix: entries must be nonnegative and finite");
  }
}

DistortionMatrix DistortionMatrix::squared_error(const Alphabet& x, const Alphabet& y) {
  std::vector<double> c(x.size() * y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j) {
      double d = x.label(i) - y.label(j);
      c[i * y.size() + j] = d * d;
    }
  return DistortionMatrix(x.size(), y.size(), std::move(c));
}

DistortionMatrix DistortionMatrix::hamming(const Alphabet& x, const Alphabet& y) {
  std::vector<double> c(x.size() * y.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < y.size(); ++j)
      c[i * y.size() + j] = x.label(i) == y.label(j) ? 0.0 : 1.0;
  return DistortionMatrix(x.size(), y.size(), std::move(c));
}

DeterministicQuantizer::DeterministicQuantizer(std::vector<std::size_t> map,
                                               std::size_t level_budget)
    : map_(std::move(map)), level_budget_(level_budget) {
  if (map_.empty()) throw std::invalid_argument("DeterministicQuantizer: empty map");
  if (level_budget_ == 0) throw std::invalid_argument("DeterministicQuantizer: budget must be >= 1");
  std::set<std::size_t> outputs(map_.begin(), map_.end());
  if (outputs.size() > level_budget_)
    throw std::invalid_argument("DeterministicQuantizer: more distinct outputs than level budget");
}

Model2Quantizer::Model2Quantizer(std::size_t x_size, std::vector<std::size_t> table_row_major,
                                 Pmf nu, std::size_t level_budget)
    : x_size_(x_size), table_(std::move(table_row_major)), nu_(std::move(nu)),
      level_budget_(level_budget) {
  if (x_size_ == 0) throw std::invalid_argument("Model2Quantizer: empty input alphabet");
  if (table_.size() != x_size_ * nu_.size())
    throw std::invalid_argument("Model2Quantizer: table size must be |X|*|Z|");
  for (std::size_t z = 0; z < nu_.size(); ++z) {
    std::set<std::size_t> outputs;
    for (std::size_t x = 0; x < x_size_; ++x) outputs.insert(at(x, z));
    if (outputs.size() > level_budget_)
      throw std::invalid_argument("Model2Quantizer: column exceeds level budget");
  }
}

DeterministicQuantizer Model2Quantizer::column(std::size_t z) const {
  std::vector<std::size_t> m(x_size_);
  for (std::size_t x = 0; x < x_size_; ++x) m[x] = at(x, z);
  return DeterministicQuantizer(std::move(m), level_budget_);
}

Model1Code::Model1Code(std::size_t x_size, std::vector<std::size_t> encoder_row_major,
                       std::size_t level_budget, std::vector<std::size_t> decoder_row_major,
                       Pmf nu)
    : x_size_(x_size), encoder_(std::move(encoder_row_major)),
      decoder_(std::move(decoder_row_major)), nu_(std::move(nu)), level_budget_(level_budget) {
  if (x_size_ == 0) throw std::invalid_argument("Model1Code: empty input alphabet");
  if (level_budget_ == 0) throw std::invalid_argument("Model1Code: budget must be >= 1");
  if (encoder_.size() != x_size_ * nu_.size())
    throw std::invalid_argument("Model1Code: encoder size must be |X|*|Z|");
  if (decoder_.size() != level_budget_ * nu_.size())
    throw std::invalid_argument("Model1Code: decoder size must be M*|Z|");
  for (std::size_t e : encoder_) {
    if (e >= level_budget_) throw std::invalid_argument("Model1Code: encoder index out of range");
  }
}

FiniteMixtureQuantizer::FiniteMixtureQuantizer(std::vector<double> weights,
                                               std::vector<DeterministicQuantizer> quantizers)
    : weights_(std::move(weights)), quantizers_(std::move(quantizers)) {
  if (weights_.size() != quantizers_.size() || weights_.empty())
    throw std::invalid_argument("FiniteMixtureQuantizer: weights/quantizers mismatch");
  check_mass_vector(weights_, "FiniteMixtureQuantizer weights");
  for (const auto& q : quantizers_) {
    if (q.input_size() != quantizers_.front().input_size() ||
        q.level_budget() != quantizers_.front().level_budget())
      throw std::invalid_argument("FiniteMixtureQuantizer: components must share shape and budget");
  }
}

JointPmf induced_joint(const DeterministicQuantizer& q, const Pmf& mu, const Alphabet& y) {
  if (q.input_size() != mu.size())
    throw std::invalid_argument("induced_joint: quantizer / mu size mismatch");
  std::vector<double> m(mu.size() * y.size(), 0.0);
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (q(x) >= y.size()) throw std::invalid_argument("induced_joint: output index out of range");
    m[x * y.size() + q(x)] = mu[x];
  }
  return JointPmf(mu.alphabet(), y, std::move(m));
}

JointPmf mixture_joint(const FiniteMixtureQuantizer& mix, const Pmf& mu, const Alphabet& y) {
  std::vector<double> m(mu.size() * y.size(), 0.0);
  for (std::size_t k = 0; k < mix.components(); ++k) {
    const auto& q = mix.quantizers()[k];
    if (q.input_size() != mu.size())
      throw std::invalid_argument("mixture_joint: quantizer / mu size mismatch");
    const double w = mix.weights()[k];
    for (std::size_t x = 0; x < mu.size(); ++x) {
      if (q(x) >= y.size())
        throw std::invalid_argument("mixture_joint: output index out of range");
      m[x * y.size() + q(x)] += w * mu[x];
    }
  }
  return JointPmf(mu.alphabet(), y, std::move(m));
}

double distortion(const JointPmf& v, const DistortionMatrix& rho) {
  if (rho.rows() != v.rows() || rho.cols() != v.cols())
    throw std::invalid_argument("distortion: shape mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < v.rows(); ++i)
    for (std::size_t j = 0; j < v.cols(); ++j) total += v.at(i, j) * rho.at(i, j);
  return total;
}

FiniteMixtureQuantizer model2_to_model3(const Model2Quantizer& m2) {
  std::vector<double> weights(m2.nu().mass());
  std::vector<DeterministicQuantizer> qs;
  qs.reserve(m2.z_size());
  for (std::size_t z = 0; z < m2.z_size(); ++z) qs.push_back(m2.column(z));
  return FiniteMixtureQuantizer(std::move(weights), std::move(qs));
}

Model2Quantizer model1_to_model2(const Model1Code& m1) {
  std::vector<std::size_t> table(m1.x_size() * m1.z_size());
  for (std::size_t x = 0; x < m1.x_size(); ++x)
    for (std::size_t z = 0; z < m1.z_size(); ++z)
      table[x * m1.z_size() + z] = m1.decode(m1.encode(x, z), z);
  return Model2Quantizer(m1.x_size(), std::move(table), m1.nu(), m1.level_budget());
}

Model1Code model2_to_model1(const Model2Quantizer& m2) {
  const std::size_t zs = m2.z_size();
  const std::size_t M = m2.level_budget();
  std::vector<std::size_t> encoder(m2.x_size() * zs);
  std::vector<std::size_t> decoder(M * zs);
  for (std::size_t z = 0; z < zs; ++z) {
    std::vector<std::size_t> seen;  // output y-index per assigned code index
    for (std::size_t x = 0; x < m2.x_size(); ++x) {
      const std::size_t y = m2.at(x, z);
      std::size_t idx = seen.size();
      for (std::size_t k = 0; k < seen.size(); ++k) {
        if (seen[k] == y) {
          idx = k;
          break;
        }
      }
      if (idx == seen.size()) seen.push_back(y);
      encoder[x * zs + z] = idx;
    }
    for (std::size_t k = 0; k < M; ++k)
      decoder[k * zs + z] = k < seen.size() ? seen[k] : seen.front();
  }
  return Model1Code(m2.x_size(), std::move(encoder), M, std::move(decoder), m2.nu());
}

namespace {
// Nearest grid level for t on centers c0 + i*step, ties toward the smaller label.
std::size_t nearest_level(double t, double c0, double step, std::size_t levels) {
  const double u = (t - c0) / step;
  if (u <= 0.0) return 0;
  if (u >= static_cast<double>(levels - 1)) return levels - 1;
  double k = std::floor(u + 0.5);
  if (u + 0.5 == k) k -= 1.0;  // exact midpoint
  return static_cast<std::size_t>(k);
}
}  // namespace

DitherDemo dither_demo(int levels, double step, const Alphabet& z_alphabet, const Pmf& nu,
                       DitherMode mode) {
  if (levels < 1) throw std::invalid_argument("dither_demo: levels must be >= 1");
  if (!(step > 0.0)) throw std::invalid_argument("dither_demo: step must be positive");
  if (!(nu.alphabet() == z_alphabet))
    throw std::invalid_argument("dither_demo: nu must live on the randomizer alphabet");
  const std::size_t L = static_cast<std::size_t>(levels);
  const double c0 = -0.5 * static_cast<double>(L - 1) * step;
  std::vector<double> centers(L);
  for (std::size_t i = 0; i < L; ++i) centers[i] = c0 + static_cast<double>(i) * step;

  const double lo = centers.front() - 0.5 * step;
  const double hi = centers.back() + 0.5 * step;
  std::vector<double> outputs(L * z_alphabet.size());
  for (std::size_t xi = 0; xi < L; ++xi)
    for (std::size_t zi = 0; zi < z_alphabet.size(); ++zi) {
      const double t = centers[xi] + z_alphabet.label(zi);
      if (t < lo || t > hi)
        throw std::invalid_argument("dither_demo: dithered input outside representable grid");
      const double q = centers[nearest_level(t, c0, step, L)];
      outputs[xi * z_alphabet.size() + zi] =
          mode == DitherMode::subtractive ? q - z_alphabet.label(zi) : q;
    }

  std::vector<double> ylabels(outputs);
  std::sort(ylabels.begin(), ylabels.end());
  ylabels.erase(std::unique(ylabels.begin(), ylabels.end()), ylabels.end());
  Alphabet y(ylabels);

  std::vector<std::size_t> table(outputs.size());
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto it = std::lower_bound(ylabels.begin(), ylabels.end(), outputs[i]);
    table[i] = static_cast<std::size_t>(it - ylabels.begin());
  }
  Alphabet x(centers);
  return DitherDemo{x, y, Model2Quantizer(L, std::move(table), nu, L)};
}

}  // namespace oclab
