#pragma once

#include <cstdint>
#include <memory>

#include "partlasso/design.hpp"

namespace partlasso {

/// Synthetic instance with known truth: Y = X beta0 + epsilon.
struct ModelInstance {
  std::shared_ptr<const PartitionedDesign> design;
  Vector y;
  Vector beta0;    // length p, original column order
  Vector epsilon;  // kept for oracle checks
  double sigma = 0.0;
  IndexSet support;  // {j : beta0_j != 0}, ascending
  std::uint64_t seed = 0;

  Vector beta0_g() const { return beta0(design->g()); }
  Vector beta0_minus_g() const { return beta0(design->minus_g()); }
  /// Positions (inside minus_g()) of the signal columns outside G.
  IndexSet support_minus_g() const;
};

inline IndexSet ModelInstance::support_minus_g() const {
  IndexSet out;
  for (Index j : support) {
    const Index pos = design->position_in_minus_g(j);
    if (pos >= 0) out.push_back(pos);
  }
  return out;
}

}  // namespace partlasso
