// solver.hpp: primal interior-point solver for DcSubproblem instances.
// Log-barrier path following: minimize -R_min/mu + Phi(x) with damped Newton
// steps (Armijo backtracking), mu shrinking 1 -> 1e-8 by factors of 10. The
// composite barrier couples -log(margin) with -log2det of each constraint's
// PSD map, which keeps the path self-concordant; Hermitian variables are
// carried as their realified free components (diagonal, Re/Im off-diagonal).
// Deterministic: fixed schedule, no randomness.
#pragma once

#include <iosfwd>

#include "fran/subproblem.hpp"

namespace fran {

struct SolverReport {
  enum class Status { kOptimal, kMaxIter, kNumericalFailure };
  Status status = Status::kOptimal;
  int iterations = 0;        // total Newton steps
  double objective = 0.0;    // bits/symbol
  double max_violation = 0;  // relative residual from certify()
  double gap = 0.0;          // certified optimality gap bound, bits/symbol
  std::string note;
};

const char* to_string(SolverReport::Status s);

struct SolveOptions {
  double mu0 = 1.0;
  double mu_factor = 0.1;
  double mu_min = 1e-8;
  int max_stage_iters = 60;
  double newton_tol = 1e-9;  // stage ends when lambda^2/2 drops below
  double armijo_c = 0.01;
  double armijo_beta = 0.5;
  std::ostream* trace = nullptr;  // one line per Newton step when set
};

// Solves the subproblem. `start`, when given, must be strictly feasible
// (the CCCP driver always passes its previous iterate); without it a
// tiny-diagonal default start is probed. Throws std::invalid_argument on
// malformed problems or infeasible starts.
std::pair<SubPoint, SolverReport> solve(const DcSubproblem& prob,
                                        const SubPoint* start = nullptr,
                                        const SolveOptions& opts = {});

struct CertifyResult {
  double max_violation = 0.0;  // max relative constraint violation
  double objective = 0.0;
};

// Independent re-evaluation of all constraints at a candidate point; shares
// only the plain log-det helpers with the barrier internals.
CertifyResult certify(const DcSubproblem& prob, const SubPoint& p);

}  // namespace fran
