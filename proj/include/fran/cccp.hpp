// cccp.hpp: outer concave-convex procedure for the three fronthauling modes,
// plus the N_F fronthaul-assignment heuristic, feasible initialization and
// rank-truncated precoder extraction. Each iteration linearizes the concave
// parts at the previous iterate, solves the resulting DcSubproblem and keeps
// the exact achievable R_min as a monotone trace (a non-improving candidate
// terminates the loop).
#pragma once

#include <iosfwd>

#include "fran/model.hpp"
#include "fran/rates.hpp"
#include "fran/rng.hpp"
#include "fran/solver.hpp"

namespace fran {

struct CccpSettings {
  int max_outer_iters = 50;
  double rel_improvement_tol = 1e-4;  // on exact R_min, bits/symbol
  int restarts = 1;
  double omega_floor_frac = 1e-8;  // Omega_i >= frac * P_i * I
  SolveOptions solver;
  std::ostream* trace = nullptr;  // per-iteration dump when set
};

// Transfer each requested subfile to the n_f eRRHs with the largest channel
// gain ||H_{k,i}||_F^2 to the requesting UE among those not caching it (ties
// to the lower index; union over UEs sharing a request).
FronthaulAssignment assign_fronthaul_nf(const SystemConfig& cfg,
                                        const ChannelRealization& chan,
                                        const CacheState& cache, const RequestProfile& req,
                                        int n_f);

// Clears transfers over zero-capacity links (they cannot carry bits and
// would otherwise pin the shared subfile rate to zero).
FronthaulAssignment effective_assignment(const SystemConfig& cfg,
                                         const FronthaulAssignment& assign);

// Strictly feasible covariances for the exact constraints of the mode:
// random PSD scaled to a fraction of each power budget, then (soft/hybrid)
// the quantized parts shrunk until every g_i sits strictly inside C_i.
CovariancePoint init_feasible(TransferMode mode, const ProblemInstance& inst,
                              Philox& rng, const CccpSettings& settings);

// Full CCCP run (Algorithm 1/2 and the hybrid analogue). `warm`, when given,
// replaces the random initialization (it must satisfy the exact constraints
// of the mode). Returns the rank-relaxed solution with its monotone trace.
DeliverySolution run_cccp(TransferMode mode, const ProblemInstance& inst,
                          const CccpSettings& settings, Philox& rng,
                          const CovariancePoint* warm = nullptr);

// Leading-eigenvector precoder extraction with power-feasibility rescale and
// exact post-truncation rate evaluation.
DeliverySolution extract_precoders(const DeliverySolution& relaxed,
                                   const ProblemInstance& inst);

// run_cccp + extract_precoders.
DeliverySolution solve_delivery(TransferMode mode, const ProblemInstance& inst,
                                const CccpSettings& settings, Philox& rng);

// Hybrid warm-started from the better of the converged soft and hard
// solutions: (d = hard's assignment, hard point) if hard won, else
// (d = 0, soft point). Returns {soft, hard, hybrid} solutions.
struct HybridWarmResult {
  DeliverySolution soft;
  DeliverySolution hard;
  DeliverySolution hybrid;
};
HybridWarmResult solve_hybrid_warm(const ProblemInstance& inst_with_hard_assign,
                                   const CccpSettings& settings, Philox& rng);

// Exact achievable R_min (and the maximizing subfile rates) at fixed
// covariances: rates capped by exact SIC rates and S_l, coupled by the
// hard fronthaul budgets in hard/hybrid modes.
struct ExactValue {
  double min_rate = 0.0;
  std::vector<double> rates;
};
ExactValue exact_achievable(TransferMode mode, const ProblemInstance& inst,
                            const SubfileIndex& idx, const CovariancePoint& pt);

}  // namespace fran
