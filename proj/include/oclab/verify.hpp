#ifndef OCLAB_VERIFY_HPP
#define OCLAB_VERIFY_HPP

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace oclab {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Named invariant checks runnable from the CLI `verify` command. `overrides`
// maps check name to a parameter object ({"alpha":...}, {"finalMaxBits":...},
// {"tol":...}, {"trials":...}); unknown names or parameters are rejected.
std::vector<std::string> verify_suite_names();
std::vector<CheckResult> run_verify_suite(const std::vector<std::string>& names,
                                          std::uint64_t seed, const nlohmann::json& overrides,
                                          int threads);

}  // namespace oclab

#endif  // OCLAB_VERIFY_HPP
