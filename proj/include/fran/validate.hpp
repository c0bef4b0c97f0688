// validate.hpp: re-evaluates the original (non-convex) delivery constraints
// at a DeliverySolution: exact SIC rates, exact fronthaul usage/load, per-eRRH
// power, PSD-ness and hard-mode availability structure. Residuals are
// relative: (lhs - rhs) / max(1, |rhs|).
#pragma once

#include "fran/model.hpp"

namespace fran {

struct ViolationReport {
  struct Entry {
    std::string family;
    std::string detail;
    double residual = 0.0;
  };
  std::vector<Entry> entries;  // all families with residual > 1e-6

  bool empty() const { return entries.empty(); }
  double max_residual() const;
  std::string summary() const;
};

ViolationReport validate_solution(const DeliverySolution& sol, const ProblemInstance& inst);

}  // namespace fran
