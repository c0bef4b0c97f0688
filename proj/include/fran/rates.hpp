// rates.hpp: exact and DC-linearized rate / fronthaul functions. All outputs
// are bits per symbol. The decoding order is fixed to subfile-index order;
// interference-plus-noise matrices always include noise_level * I, so every
// log-det argument is positive definite by construction.
#pragma once

#include "fran/model.hpp"

namespace fran {

// Transmit + quantization covariances at one point. W is aligned to a
// SubfileIndex; Omega[i] may be 0x0 where eRRH i quantizes nothing.
struct CovariancePoint {
  std::vector<Cmat> W;
  std::vector<Cmat> Omega;
};

// Previous CCCP iterate (W^(t), Omega^(t)) the surrogates linearize around.
struct LinearizationPoint {
  std::vector<Cmat> W_prev;
  std::vector<Cmat> Omega_prev;
};

// phi(A,B) = log2 det(B) + tr(B^-1 (A-B)) / ln 2; the tangent of log2 det
// at B, so log2 det(A) <= phi(A,B) with equality at A = B.
double phi(const Cmat& a, const Cmat& b);

// Interference-plus-noise matrix seen by UE k when decoding its subfile
// l_from: own-file subfiles m >= l_from, all other requested files, the
// quantization noise (when omega is non-null) and N_0 I.
Cmat ipn_matrix(const ProblemInstance& inst, const SubfileIndex& idx, int k,
                int l_from, const std::vector<Cmat>& w,
                const std::vector<Cmat>* omega);

// Hard-transfer SIC rate q_{k,l}.
double hard_rate(const ProblemInstance& inst, const SubfileIndex& idx, int k,
                 int l, const std::vector<Cmat>& w);

// Soft/hybrid SIC rate: hard_rate with the quantization-noise term added to
// both log-det arguments.
double soft_rate(const ProblemInstance& inst, const SubfileIndex& idx, int k,
                 int l, const std::vector<Cmat>& w, const std::vector<Cmat>& omega);

double exact_rate(TransferMode mode, const ProblemInstance& inst,
                  const SubfileIndex& idx, int k, int l, const CovariancePoint& pt);

// Sum of masked E_i' W_{f,l} E_i blocks: the BBU-precoded signal covariance
// quantized for eRRH i. Soft mode masks uncached subfiles; hybrid masks
// subfiles neither cached nor hard-transferred.
Cmat quantizer_input(const ProblemInstance& inst, const SubfileIndex& idx, int i,
                     const std::vector<Cmat>& w, TransferMode mode);

// Fronthaul mutual information g_i; 0 when nothing is quantized at eRRH i.
double fronthaul_usage_soft(const ProblemInstance& inst, const SubfileIndex& idx,
                            int i, const std::vector<Cmat>& w,
                            const std::vector<Cmat>& omega);
double fronthaul_usage_hybrid(const ProblemInstance& inst, const SubfileIndex& idx,
                              int i, const std::vector<Cmat>& w,
                              const std::vector<Cmat>& omega);

// Hard-transfer fronthaul load sum_{f,l} d_{f,l}^i R_{f,l}.
double hard_fronthaul_load(const ProblemInstance& inst, const SubfileIndex& idx,
                           int i, const std::vector<double>& rates);

// Concave surrogate q~_{k,l}: the leading log-det kept exact, the subtracted
// one replaced by phi at the linearization point. <= the exact rate
// everywhere, equal at the linearization point.
double surrogate_rate(const ProblemInstance& inst, const SubfileIndex& idx, int k,
                      int l, const CovariancePoint& pt, const LinearizationPoint& lin,
                      TransferMode mode);

// Convex surrogate g~_i >= g_i, equal at the linearization point.
double surrogate_fronthaul(const ProblemInstance& inst, const SubfileIndex& idx,
                           int i, const CovariancePoint& pt,
                           const LinearizationPoint& lin, TransferMode mode);

}  // namespace fran
