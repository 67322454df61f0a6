#ifndef OCLAB_JSON_IO_HPP
#define OCLAB_JSON_IO_HPP

#include <json.hpp>

#include "oclab/core.hpp"

// JSON forms (field names are part of the interface):
//   Alphabet                  -> [labels...]
//   Pmf                       -> {"alphabet":[...], "mass":[...]}
//   JointPmf                  -> {"xAlphabet":[...], "yAlphabet":[...],
//                                 "shape":[nx,ny], "mass":[... row-major ...]}
//   DistortionMatrix          -> {"shape":[nx,ny], "cost":[... row-major ...]}
//   DeterministicQuantizer    -> {"map":[...], "levelBudget":M}
//   Model2Quantizer           -> {"zAlphabet":[...], "shape":[nx,nz],
//                                 "table":[... row-major ...], "nu":{...}, "levelBudget":M}
//   Model1Code                -> {"shape":[nx,nz], "encoder":[...], "decoder":[...],
//                                 "nu":{...}, "levelBudget":M}
//   FiniteMixtureQuantizer    -> {"weights":[...], "quantizers":[{...}...]}
namespace oclab {

void to_json(nlohmann::json& j, const Alphabet& a);
void from_json(const nlohmann::json& j, Alphabet& a);

void to_json(nlohmann::json& j, const Pmf& p);
Pmf pmf_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const JointPmf& v);
JointPmf joint_pmf_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const DistortionMatrix& d);
DistortionMatrix distortion_matrix_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const DeterministicQuantizer& q);
DeterministicQuantizer deterministic_quantizer_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const Model2Quantizer& q);
Model2Quantizer model2_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const Model1Code& c);
Model1Code model1_from_json(const nlohmann::json& j);

void to_json(nlohmann::json& j, const FiniteMixtureQuantizer& m);
FiniteMixtureQuantizer mixture_from_json(const nlohmann::json& j);

}  // namespace oclab

#endif  // OCLAB_JSON_IO_HPP
