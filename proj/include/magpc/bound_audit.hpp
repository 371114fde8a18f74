#pragma once

#include "magpc/bounds.hpp"
#include "magpc/costs.hpp"
#include "magpc/lds.hpp"
#include "magpc/trace.hpp"

#include <string>
#include <vector>

namespace magpc {

struct BoundCheck {
  std::string name;
  long evaluated = 0;
  long violations = 0;
  double worst_ratio = 0.0;  // max measured / bound
};

struct BoundAudit {
  std::vector<BoundCheck> checks;
  long violations() const;
  const BoundCheck& check(const std::string& name) const;
};

struct BoundAuditOptions {
  int from = -1;            // first audited round; -1 selects H + 1
  double rel_tol = 1e-9;    // slack for rounding in the measured side
};

// Measures an all-DAC trace (x_0 = 0, every agent a DAC learner sharing the
// global closed loop A - sum_j B_j K_j) against the closed-form transfer,
// magnitude, deviation, gradient and surrogate-deviation bounds.
BoundAudit audit_bounds(const Trace& trace, const LdsSystem& sys, const CostAssignment& costs,
                        const BoundInputs& in, const BoundAuditOptions& opts = {});

}  // namespace magpc
