#include "fran/subproblem.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fran {

double LinExpr::eval(const SubPoint& p) const {
  double v = constant;
  for (auto& [s, c] : scalars) v += c * p.scalars[s];
  for (auto& [m, cmat] : mats) v += (cmat * p.mats[m]).trace().real();
  return v;
}

Cmat PsdMap::eval(const SubPoint& p) const {
  Cmat m = constant;
  for (const auto& term : terms) m += term.t * p.mats[term.var] * term.t.adjoint();
  return m;
}

double SubConstraint::eval(const SubPoint& p) const {
  double v = lin.eval(p);
  if (logdet) {
    Cmat m = logdet->eval(p);
    Eigen::LLT<Cmat> llt(m);
    if (llt.info() != Eigen::Success)
      return std::numeric_limits<double>::infinity();
    v -= log2det_psd(m);
  }
  return v;
}

void DcSubproblem::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("DcSubproblem: " + m); };
  if (objective < 0 || objective >= static_cast<int>(scalar_vars.size()))
    fail("objective scalar out of range");
  if (scalar_vars[objective].pinned) fail("objective scalar pinned");
  for (const auto& mv : mat_vars) {
    if (mv.dim < 1) fail("matrix variable with dim < 1");
    int prev = -1;
    for (int r : mv.support) {
      if (r <= prev || r >= mv.dim) fail("bad support for " + mv.name);
      prev = r;
    }
  }
  for (const auto& c : constraints) {
    for (auto& [s, coef] : c.lin.scalars) {
      (void)coef;
      if (s < 0 || s >= static_cast<int>(scalar_vars.size())) fail("scalar index in " + c.name);
    }
    for (auto& [m, cmat] : c.lin.mats) {
      if (m < 0 || m >= static_cast<int>(mat_vars.size())) fail("matrix index in " + c.name);
      if (cmat.rows() != mat_vars[m].dim || cmat.cols() != mat_vars[m].dim)
        fail("coefficient shape in " + c.name);
    }
    if (c.logdet) {
      if (c.logdet->constant.rows() != c.logdet->dim) fail("map constant shape in " + c.name);
      for (const auto& term : c.logdet->terms) {
        if (term.var < 0 || term.var >= static_cast<int>(mat_vars.size()))
          fail("map var index in " + c.name);
        if (term.t.rows() != c.logdet->dim || term.t.cols() != mat_vars[term.var].dim)
          fail("map term shape in " + c.name);
      }
    }
  }
}

}  // namespace fran
