#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "softquant/oracle.hpp"
#include "softquant/rng.hpp"

namespace softquant {

// Randomized cross-check of the discrete solver against its independent
// brute-force counterpart, plus the smoothed-minimum property suite.
struct VerifyOptions {
  std::size_t instances = 100;      // random discrete instances
  std::uint64_t seed = 20260816;
  double value_tol = 1e-6;          // |closed form - brute force|
  double plan_tol = 1e-5;           // entrywise plan agreement
  // Injection point for the closed-form evaluator, so a deliberately
  // corrupted implementation can be shown to fail the suite.
  std::function<double(const DiscreteInstance&)> closed_form;
};

struct VerifyReport {
  bool passed = false;
  std::size_t failures = 0;
  std::string text;  // key: value records, one line per check
};

VerifyReport run_verification(const VerifyOptions& opts = {});

// Random instance with 1..4 rows/columns, i.i.d. uniform [0,1) costs, flat
// Dirichlet marginals, and lambda cycling over {0.1, 0.5, 2.0}.
DiscreteInstance random_instance(Rng& rng);

}  // namespace softquant
