#include "fran/rates.hpp"

#include <stdexcept>

namespace fran {

namespace {

// True when subfile (f,l) is quantized for eRRH i under the given mode.
bool quantized_for(const ProblemInstance& inst, int f, int l, int i, TransferMode mode) {
  if (inst.cache.cached(f, l, i)) return false;
  if (mode == TransferMode::kHybrid && inst.assign.transfer(f, l, i)) return false;
  return true;
}

}  // namespace

double phi(const Cmat& a, const Cmat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("phi: dimension mismatch");
  double logdet_b = log2det_psd(b);  // throws if b is singular
  Eigen::LLT<Cmat> llt(b);
  if (llt.info() != Eigen::Success) throw std::runtime_error("phi: B not PD");
  double trace_term = llt.solve(Cmat(a - b)).trace().real();
  return logdet_b + bits_from_nats(trace_term);
}

Cmat ipn_matrix(const ProblemInstance& inst, const SubfileIndex& idx, int k,
                int l_from, const std::vector<Cmat>& w,
                const std::vector<Cmat>* omega) {
  const int f_k = inst.req.requested_file[k];
  const Cmat& h = inst.chan.H[k];
  Cmat m = inst.cfg.noise_level * Cmat::Identity(h.rows(), h.rows());
  for (int s = 0; s < idx.size(); ++s) {
    auto [f, l] = idx.items[s];
    if (f == f_k && l < l_from) continue;  // already cancelled by SIC
    m += h * w[s] * h.adjoint();
  }
  if (omega) {
    for (int i = 0; i < inst.cfg.num_errh; ++i) {
      const Cmat& om = (*omega)[i];
      if (om.rows() == 0) continue;
      Cmat hi = inst.chan.block(k, i, inst.cfg);
      m += hi * om * hi.adjoint();
    }
  }
  return m;
}

double hard_rate(const ProblemInstance& inst, const SubfileIndex& idx, int k,
                 int l, const std::vector<Cmat>& w) {
  double q = log2det_psd(ipn_matrix(inst, idx, k, l, w, nullptr)) -
             log2det_psd(ipn_matrix(inst, idx, k, l + 1, w, nullptr));
  return std::max(0.0, q);
}

double soft_rate(const ProblemInstance& inst, const SubfileIndex& idx, int k,
                 int l, const std::vector<Cmat>& w, const std::vector<Cmat>& omega) {
  double q = log2det_psd(ipn_matrix(inst, idx, k, l, w, &omega)) -
             log2det_psd(ipn_matrix(inst, idx, k, l + 1, w, &omega));
  return std::max(0.0, q);
}

double exact_rate(TransferMode mode, const ProblemInstance& inst,
                  const SubfileIndex& idx, int k, int l, const CovariancePoint& pt) {
  return mode == TransferMode::kHard ? hard_rate(inst, idx, k, l, pt.W)
                                     : soft_rate(inst, idx, k, l, pt.W, pt.Omega);
}

Cmat quantizer_input(const ProblemInstance& inst, const SubfileIndex& idx, int i,
                     const std::vector<Cmat>& w, TransferMode mode) {
  const int off = inst.cfg.antenna_offset(i);
  const int n_i = inst.cfg.antennas_errh[i];
  Cmat u = Cmat::Zero(n_i, n_i);
  for (int s = 0; s < idx.size(); ++s) {
    auto [f, l] = idx.items[s];
    if (quantized_for(inst, f, l, i, mode)) u += w[s].block(off, off, n_i, n_i);
  }
  return u;
}

namespace {

double fronthaul_usage(const ProblemInstance& inst, const SubfileIndex& idx, int i,
                       const std::vector<Cmat>& w, const std::vector<Cmat>& omega,
                       TransferMode mode) {
  bool any = false;
  for (int s = 0; s < idx.size() && !any; ++s)
    any = quantized_for(inst, idx.items[s].first, idx.items[s].second, i, mode);
  if (!any) return 0.0;  // nothing uncached to quantize, by definition
  Cmat u = quantizer_input(inst, idx, i, w, mode);
  if (u.cwiseAbs().maxCoeff() == 0.0) return 0.0;
  const Cmat& om = omega[i];
  if (om.rows() == 0)
    throw std::invalid_argument("fronthaul_usage: missing Omega with uncached content");
  return log2det_psd(u + om) - log2det_psd(om);
}

}  // namespace

double fronthaul_usage_soft(const ProblemInstance& inst, const SubfileIndex& idx,
                            int i, const std::vector<Cmat>& w,
                            const std::vector<Cmat>& omega) {
  return fronthaul_usage(inst, idx, i, w, omega, TransferMode::kSoft);
}

double fronthaul_usage_hybrid(const ProblemInstance& inst, const SubfileIndex& idx,
                              int i, const std::vector<Cmat>& w,
                              const std::vector<Cmat>& omega) {
  return fronthaul_usage(inst, idx, i, w, omega, TransferMode::kHybrid);
}

double hard_fronthaul_load(const ProblemInstance& inst, const SubfileIndex& idx,
                           int i, const std::vector<double>& rates) {
  double load = 0.0;
  for (int s = 0; s < idx.size(); ++s) {
    auto [f, l] = idx.items[s];
    if (inst.assign.transfer(f, l, i)) load += rates[s];
  }
  return load;
}

double surrogate_rate(const ProblemInstance& inst, const SubfileIndex& idx, int k,
                      int l, const CovariancePoint& pt, const LinearizationPoint& lin,
                      TransferMode mode) {
  const std::vector<Cmat>* om_new = mode == TransferMode::kHard ? nullptr : &pt.Omega;
  const std::vector<Cmat>* om_old = mode == TransferMode::kHard ? nullptr : &lin.Omega_prev;
  Cmat lead = ipn_matrix(inst, idx, k, l, pt.W, om_new);
  Cmat tail_new = ipn_matrix(inst, idx, k, l + 1, pt.W, om_new);
  Cmat tail_old = ipn_matrix(inst, idx, k, l + 1, lin.W_prev, om_old);
  return log2det_psd(lead) - phi(tail_new, tail_old);
}

double surrogate_fronthaul(const ProblemInstance& inst, const SubfileIndex& idx,
                           int i, const CovariancePoint& pt,
                           const LinearizationPoint& lin, TransferMode mode) {
  if (mode == TransferMode::kHard)
    throw std::invalid_argument("surrogate_fronthaul: hard mode has no quantizers");
  bool any = false;
  for (int s = 0; s < idx.size() && !any; ++s)
    any = quantized_for(inst, idx.items[s].first, idx.items[s].second, i, mode);
  if (!any) return 0.0;
  const Cmat& om_new = pt.Omega[i];
  const Cmat& om_old = lin.Omega_prev[i];
  if (om_new.rows() == 0 || om_old.rows() == 0)
    throw std::invalid_argument("surrogate_fronthaul: missing Omega");
  Cmat u_new = quantizer_input(inst, idx, i, pt.W, mode) + om_new;
  Cmat u_old = quantizer_input(inst, idx, i, lin.W_prev, mode) + om_old;
  return phi(u_new, u_old) - log2det_psd(om_new);
}

}  // namespace fran
