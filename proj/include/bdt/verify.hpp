#pragma once

// Cross-validation suite: W times its explicit inverse is the identity, closed
// form against the renewal-reward oracle, and reference values of the
// example systems.

#include <cstdint>
#include <string>
#include <vector>

namespace bdt {

struct VerifyOptions {
  std::uint64_t seed = 20240601;
  int inverse_models = 200;
  int equivalence_models = 500;
};

struct VerifyCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<VerifyCheck> run_verify(const VerifyOptions& options = {});

}  // namespace bdt
