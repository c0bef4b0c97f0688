// subproblem.hpp: canonical convex subproblem solved inside each CCCP
// iteration. One constraint form covers every mode:
//
//     lin(x) - log2 det(M(x)) <= rhs        (logdet map present)
//     lin(x)                  <= rhs        (pure linear)
//
// over Hermitian PSD matrix variables and nonnegative scalars, maximizing a
// designated scalar (R_min). lin(x) is affine in the scalars and in the
// matrix entries (trace pairings); M(x) = K0 + sum_j T_j X_{v_j} T_j^H is an
// affine PSD map whose constant K0 keeps a strict interior (N_0 I for rate
// constraints, the Omega floor for fronthaul constraints).
#pragma once

#include <optional>
#include <string>

#include "fran/linalg.hpp"

namespace fran {

// Hermitian PSD matrix variable. Entries outside support x support are
// structurally zero (pinned); the PSD cone applies to the supported
// principal submatrix. An empty support pins the whole variable to zero.
struct MatVar {
  int dim = 0;
  std::vector<int> support;  // sorted row indices allowed to be nonzero
  std::string name;
};

// Nonnegative scalar variable; pinned variables are fixed at zero.
struct ScalarVar {
  std::string name;
  bool pinned = false;
};

// Candidate/solution point: full-size matrices (zero outside support).
struct SubPoint {
  std::vector<Cmat> mats;
  std::vector<double> scalars;
};

// Affine functional: sum_s c_s x_s + sum_v Re tr(C_v X_v) + constant.
struct LinExpr {
  std::vector<std::pair<int, double>> scalars;
  std::vector<std::pair<int, Cmat>> mats;  // C_v Hermitian
  double constant = 0.0;

  double eval(const SubPoint& p) const;
};

struct PsdMapTerm {
  int var = 0;
  Cmat t;  // contributes t X_var t^H
};

struct PsdMap {
  int dim = 0;
  Cmat constant;
  std::vector<PsdMapTerm> terms;

  Cmat eval(const SubPoint& p) const;
};

struct SubConstraint {
  std::string name;
  LinExpr lin;
  std::optional<PsdMap> logdet;
  double rhs = 0.0;

  // lin(x) - log2det(map) (or just lin(x)); +inf if the map is not PD.
  double eval(const SubPoint& p) const;
};

struct DcSubproblem {
  std::vector<MatVar> mat_vars;
  std::vector<ScalarVar> scalar_vars;
  int objective = -1;  // scalar index being maximized
  std::vector<SubConstraint> constraints;

  void validate() const;  // shape checks; throws std::invalid_argument
};

}  // namespace fran
