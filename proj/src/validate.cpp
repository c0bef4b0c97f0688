#include "fran/validate.hpp"

#include <sstream>
#include <stdexcept>

#include "fran/prefetch.hpp"
#include "fran/rates.hpp"

namespace fran {

namespace {

constexpr double kRelTol = 1e-6;

struct Collector {
  ViolationReport report;
  // Track the worst residual per family; only report beyond tolerance.
  void check(const std::string& family, const std::string& detail, double lhs, double rhs) {
    double rel = (lhs - rhs) / std::max(1.0, std::abs(rhs));
    if (rel > kRelTol) add(family, detail, rel);
  }
  void add(const std::string& family, const std::string& detail, double residual) {
    for (auto& e : report.entries)
      if (e.family == family) {
        if (residual > e.residual) {
          e.residual = residual;
          e.detail = detail;
        }
        return;
      }
    report.entries.push_back({family, detail, residual});
  }
};

}  // namespace

double ViolationReport::max_residual() const {
  double worst = 0.0;
  for (const auto& e : entries) worst = std::max(worst, e.residual);
  return worst;
}

std::string ViolationReport::summary() const {
  if (entries.empty()) return "feasible";
  std::ostringstream os;
  for (const auto& e : entries)
    os << e.family << " (" << e.detail << "): " << e.residual << "; ";
  return os.str();
}

ViolationReport validate_solution(const DeliverySolution& sol, const ProblemInstance& inst) {
  const SystemConfig& cfg = inst.cfg;
  const SubfileIndex& idx = sol.subfiles;
  const int n_r = cfg.total_errh_antennas();
  if (static_cast<int>(sol.covariances.size()) != idx.size() ||
      static_cast<int>(sol.rates.size()) != idx.size())
    throw std::invalid_argument("validate_solution: per-subfile arrays mismatch");
  for (const Cmat& w : sol.covariances)
    if (w.rows() != n_r || w.cols() != n_r)
      throw std::invalid_argument("validate_solution: W dimension mismatch");
  const bool has_omega = sol.mode != TransferMode::kHard;
  if (has_omega && static_cast<int>(sol.quant_covariances.size()) != cfg.num_errh)
    throw std::invalid_argument("validate_solution: Omega count mismatch");

  Collector col;

  // PSD-ness (tolerance: lambda_min >= -1e-8 lambda_max).
  for (int s = 0; s < idx.size(); ++s) {
    auto [lo, hi] = eig_range(sol.covariances[s]);
    if (lo < -1e-8 * std::max(hi, 0.0))
      col.add("psd", "W subfile " + std::to_string(s), -lo / std::max(1.0, hi));
  }
  if (has_omega)
    for (int i = 0; i < cfg.num_errh; ++i) {
      if (sol.quant_covariances[i].rows() == 0) continue;
      auto [lo, hi] = eig_range(sol.quant_covariances[i]);
      if (lo < -1e-8 * std::max(hi, 0.0))
        col.add("psd", "Omega eRRH " + std::to_string(i), -lo / std::max(1.0, hi));
    }

  // Exact SIC rate constraints R_{f_k,l} <= q_{k,l}.
  CovariancePoint pt{sol.covariances, sol.quant_covariances};
  for (int k = 0; k < cfg.num_ue; ++k) {
    int f_k = inst.req.requested_file[k];
    for (int l = 0; l < inst.split.num_subfiles; ++l) {
      int s = idx.find(f_k, l);
      if (s < 0) continue;
      double q = exact_rate(sol.mode, inst, idx, k, l, pt);
      col.check("rate", "UE " + std::to_string(k) + " subfile " + std::to_string(l),
                sol.rates[s], q);
    }
  }

  // Subfile size caps and the min-rate definition.
  for (int s = 0; s < idx.size(); ++s)
    col.check("size", "subfile " + std::to_string(s), sol.rates[s],
              inst.split.subfile_sizes[idx.items[s].second]);
  for (int f : inst.req.requested_set) {
    double sum = 0.0;
    for (int l = 0; l < inst.split.num_subfiles; ++l) {
      int s = idx.find(f, l);
      if (s >= 0) sum += sol.rates[s];
    }
    col.check("rmin", "file " + std::to_string(f), sol.min_rate, sum);
  }

  // Fronthaul usage per mode.
  for (int i = 0; i < cfg.num_errh; ++i) {
    switch (sol.mode) {
      case TransferMode::kHard:
        col.check("fronthaul", "eRRH " + std::to_string(i),
                  hard_fronthaul_load(inst, idx, i, sol.rates), cfg.fronthaul_capacity[i]);
        break;
      case TransferMode::kSoft:
        col.check("fronthaul", "eRRH " + std::to_string(i),
                  fronthaul_usage_soft(inst, idx, i, sol.covariances, sol.quant_covariances),
                  cfg.fronthaul_capacity[i]);
        break;
      case TransferMode::kHybrid:
        col.check("fronthaul", "eRRH " + std::to_string(i),
                  hard_fronthaul_load(inst, idx, i, sol.rates) +
                      fronthaul_usage_hybrid(inst, idx, i, sol.covariances,
                                             sol.quant_covariances),
                  cfg.fronthaul_capacity[i]);
        break;
    }
  }

  // Per-eRRH transmit power.
  for (int i = 0; i < cfg.num_errh; ++i) {
    const int off = cfg.antenna_offset(i);
    const int n_i = cfg.antennas_errh[i];
    double power = 0.0;
    for (int s = 0; s < idx.size(); ++s) {
      auto [f, l] = idx.items[s];
      if (sol.mode == TransferMode::kHard && !inst.cache.cached(f, l, i) &&
          !inst.assign.transfer(f, l, i))
        continue;  // (1 - cbar*dbar) indicator
      power += sol.covariances[s].block(off, off, n_i, n_i).trace().real();
    }
    if (has_omega && sol.quant_covariances[i].rows() != 0)
      power += sol.quant_covariances[i].trace().real();
    col.check("power", "eRRH " + std::to_string(i), power, cfg.power_budget[i]);
  }

  // Hard mode: no transmit power outside the availability support.
  if (sol.mode == TransferMode::kHard) {
    for (int s = 0; s < idx.size(); ++s) {
      auto [f, l] = idx.items[s];
      auto avail = availability(inst.cache, inst.assign, f, l);
      for (int i = 0; i < cfg.num_errh; ++i) {
        if (std::find(avail.begin(), avail.end(), i) != avail.end()) continue;
        double rows = sol.covariances[s]
                          .middleRows(cfg.antenna_offset(i), cfg.antennas_errh[i])
                          .cwiseAbs()
                          .maxCoeff();
        if (rows > kRelTol * std::max(1.0, sol.covariances[s].cwiseAbs().maxCoeff()))
          col.add("support", "subfile " + std::to_string(s) + " eRRH " + std::to_string(i),
                  rows);
      }
    }
  }

  return col.report;
}

}  // namespace fran
