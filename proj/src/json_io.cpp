#include "oclab/json_io.hpp"

#include <stdexcept>

namespace oclab {

using nlohmann::json;

namespace {
void check_shape(const json& j, std::size_t r, std::size_t c, const char* what) {
  if (!j.contains("shape") || !j["shape"].is_array() || j["shape"].size() != 2)
    throw std::invalid_argument(std::string(what) + ": missing shape");
  if (j["shape"][0].get<std::size_t>() != r || j["shape"][1].get<std::size_t>() != c)
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
}
}  // namespace

void to_json(json& j, const Alphabet& a) { j = a.points(); }

void from_json(const json& j, Alphabet& a) { a = Alphabet(j.get<std::vector<double>>()); }

void to_json(json& j, const Pmf& p) {
  j = json{{"alphabet", p.alphabet()}, {"mass", p.mass()}};
}

Pmf pmf_from_json(const json& j) {
  return Pmf(Alphabet(j.at("alphabet").get<std::vector<double>>()),
             j.at("mass").get<std::vector<double>>());
}

void to_json(json& j, const JointPmf& v) {
  j = json{{"xAlphabet", v.x_alphabet()},
           {"yAlphabet", v.y_alphabet()},
           {"shape", {v.rows(), v.cols()}},
           {"mass", v.mass()}};
}

JointPmf joint_pmf_from_json(const json& j) {
  Alphabet x(j.at("xAlphabet").get<std::vector<double>>());
  Alphabet y(j.at("yAlphabet").get<std::vector<double>>());
  check_shape(j, x.size(), y.size(), "JointPmf");
  return JointPmf(std::move(x), std::move(y), j.at("mass").get<std::vector<double>>());
}

void to_json(json& j, const DistortionMatrix& d) {
  j = json{{"shape", {d.rows(), d.cols()}}, {"cost", d.cost()}};
}

DistortionMatrix distortion_matrix_from_json(const json& j) {
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 2) throw std::invalid_argument("DistortionMatrix: bad shape");
  return DistortionMatrix(shape[0], shape[1], j.at("cost").get<std::vector<double>>());
}

void to_json(json& j, const DeterministicQuantizer& q) {
  j = json{{"map", q.map()}, {"levelBudget", q.level_budget()}};
}

DeterministicQuantizer deterministic_quantizer_from_json(const json& j) {
  return DeterministicQuantizer(j.at("map").get<std::vector<std::size_t>>(),
                                j.at("levelBudget").get<std::size_t>());
}

void to_json(json& j, const Model2Quantizer& q) {
  j = json{{"zAlphabet", q.z_alphabet()},
           {"shape", {q.x_size(), q.z_size()}},
           {"table", q.table()},
           {"nu", q.nu()},
           {"levelBudget", q.level_budget()}};
}

Model2Quantizer model2_from_json(const json& j) {
  Pmf nu = pmf_from_json(j.at("nu"));
  if (!(Alphabet(j.at("zAlphabet").get<std::vector<double>>()) == nu.alphabet()))
    throw std::invalid_argument("Model2Quantizer: zAlphabet and nu disagree");
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 2 || shape[1] != nu.size())
    throw std::invalid_argument("Model2Quantizer: bad shape");
  return Model2Quantizer(shape[0], j.at("table").get<std::vector<std::size_t>>(), std::move(nu),
                         j.at("levelBudget").get<std::size_t>());
}

void to_json(json& j, const Model1Code& c) {
  j = json{{"shape", {c.x_size(), c.z_size()}},
           {"encoder", c.encoder()},
           {"decoder", c.decoder()},
           {"nu", c.nu()},
           {"levelBudget", c.level_budget()}};
}

Model1Code model1_from_json(const json& j) {
  Pmf nu = pmf_from_json(j.at("nu"));
  const auto shape = j.at("shape").get<std::vector<std::size_t>>();
  if (shape.size() != 2 || shape[1] != nu.size())
    throw std::invalid_argument("Model1Code: bad shape");
  return Model1Code(shape[0], j.at("encoder").get<std::vector<std::size_t>>(),
                    j.at("levelBudget").get<std::size_t>(),
                    j.at("decoder").get<std::vector<std::size_t>>(), std::move(nu));
}

void to_json(json& j, const FiniteMixtureQuantizer& m) {
  json qs = json::array();
  for (const auto& q : m.quantizers()) qs.push_back(q);
  j = json{{"weights", m.weights()}, {"quantizers", qs}};
}

FiniteMixtureQuantizer mixture_from_json(const json& j) {
  std::vector<DeterministicQuantizer> qs;
  for (const auto& q : j.at("quantizers")) qs.push_back(deterministic_quantizer_from_json(q));
  return FiniteMixtureQuantizer(j.at("weights").get<std::vector<double>>(), std::move(qs));
}

}  // namespace oclab
