#include "fran/cccp.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "fran/prefetch.hpp"

namespace fran {

namespace {

constexpr double kCapacityTol = 1e-12;  // below this a fronthaul link is dead
constexpr double kRateCapTol = 1e-14;

// Per-instance structural analysis: which eRRH antennas may carry each
// subfile, which rates are structurally zero, which eRRHs quantize.
struct Structure {
  SubfileIndex idx;
  std::vector<std::vector<int>> support;  // per subfile, stacked antenna rows
  std::vector<char> pinned;               // per subfile
  std::vector<char> has_quant;            // per eRRH
  std::vector<char> any_transfer;         // per eRRH
  std::vector<double> eps;                // Omega floor per eRRH (0 if none)
  bool zero_instance = false;
};

bool needs_quantization(TransferMode mode, const ProblemInstance& inst, int f, int l,
                        int i) {
  if (mode == TransferMode::kHard) return false;
  if (inst.cache.cached(f, l, i)) return false;
  if (mode == TransferMode::kHybrid && inst.assign.transfer(f, l, i)) return false;
  return inst.cfg.fronthaul_capacity[i] > kCapacityTol;
}

Structure analyze(TransferMode mode, const ProblemInstance& inst,
                  const CccpSettings& settings) {
  const SystemConfig& cfg = inst.cfg;
  Structure st;
  st.idx = SubfileIndex::build(inst.req, inst.split);
  st.support.resize(st.idx.size());
  st.pinned.assign(st.idx.size(), 0);
  st.has_quant.assign(cfg.num_errh, 0);
  st.any_transfer.assign(cfg.num_errh, 0);
  st.eps.assign(cfg.num_errh, 0.0);
  for (int s = 0; s < st.idx.size(); ++s) {
    auto [f, l] = st.idx.items[s];
    for (int i = 0; i < cfg.num_errh; ++i) {
      bool can_transmit = inst.cache.cached(f, l, i);
      if (!can_transmit && mode != TransferMode::kSoft)
        can_transmit = inst.assign.transfer(f, l, i);
      if (!can_transmit && mode != TransferMode::kHard)
        can_transmit = cfg.fronthaul_capacity[i] > kCapacityTol;
      if (can_transmit)
        for (int a = 0; a < cfg.antennas_errh[i]; ++a)
          st.support[s].push_back(cfg.antenna_offset(i) + a);
      if (needs_quantization(mode, inst, f, l, i)) st.has_quant[i] = 1;
      if (mode != TransferMode::kSoft && inst.assign.transfer(f, l, i))
        st.any_transfer[i] = 1;
    }
    st.pinned[s] = st.support[s].empty();
  }
  for (int i = 0; i < cfg.num_errh; ++i)
    if (st.has_quant[i]) st.eps[i] = settings.omega_floor_frac * cfg.power_budget[i];
  for (int f : inst.req.requested_set) {
    bool all_pinned = true;
    for (int l = 0; l < inst.split.num_subfiles && all_pinned; ++l) {
      int s = st.idx.find(f, l);
      all_pinned = s < 0 || st.pinned[s];
    }
    if (all_pinned) st.zero_instance = true;
  }
  return st;
}

// Layout of the subproblem variable catalog.
struct Catalog {
  std::vector<int> omega_var;  // per eRRH, -1 when absent
  int rmin_scalar = -1;        // R_s lives at scalar index s
  int num_w = 0;
};

DcSubproblem make_catalog(TransferMode mode, const ProblemInstance& inst,
                          const Structure& st, Catalog& cat) {
  DcSubproblem prob;
  const int n_r = inst.cfg.total_errh_antennas();
  cat.num_w = st.idx.size();
  for (int s = 0; s < st.idx.size(); ++s) {
    auto [f, l] = st.idx.items[s];
    prob.mat_vars.push_back(
        {n_r, st.support[s], "W_" + std::to_string(f) + "_" + std::to_string(l)});
  }
  cat.omega_var.assign(inst.cfg.num_errh, -1);
  if (mode != TransferMode::kHard)
    for (int i = 0; i < inst.cfg.num_errh; ++i)
      if (st.has_quant[i]) {
        cat.omega_var[i] = static_cast<int>(prob.mat_vars.size());
        std::vector<int> full(inst.cfg.antennas_errh[i]);
        std::iota(full.begin(), full.end(), 0);
        prob.mat_vars.push_back({inst.cfg.antennas_errh[i], full,
                                 "Omegap_" + std::to_string(i)});
      }
  for (int s = 0; s < st.idx.size(); ++s) {
    auto [f, l] = st.idx.items[s];
    prob.scalar_vars.push_back(
        {"R_" + std::to_string(f) + "_" + std::to_string(l), st.pinned[s] != 0});
  }
  cat.rmin_scalar = static_cast<int>(prob.scalar_vars.size());
  prob.scalar_vars.push_back({"R_min", false});
  prob.objective = cat.rmin_scalar;
  return prob;
}

// Hermitian coefficient with block (i,i) equal to `blk`, zero elsewhere.
Cmat embed_block(const SystemConfig& cfg, int i, const Cmat& blk) {
  const int n_r = cfg.total_errh_antennas();
  Cmat full = Cmat::Zero(n_r, n_r);
  full.block(cfg.antenna_offset(i), cfg.antenna_offset(i), cfg.antennas_errh[i],
             cfg.antennas_errh[i]) = blk;
  return full;
}

bool support_covers(const std::vector<int>& sup, const SystemConfig& cfg, int i) {
  int off = cfg.antenna_offset(i);
  return std::binary_search(sup.begin(), sup.end(), off);
}

// Builds the convex subproblem at linearization point `lin` (full Omegas,
// floors included).
DcSubproblem build_subproblem(TransferMode mode, const ProblemInstance& inst,
                              const Structure& st, const CovariancePoint& lin,
                              Catalog& cat) {
  const SystemConfig& cfg = inst.cfg;
  const SubfileIndex& idx = st.idx;
  DcSubproblem prob = make_catalog(mode, inst, st, cat);
  const std::vector<Cmat>* lin_omega = mode == TransferMode::kHard ? nullptr : &lin.Omega;

  // R_min <= sum_l R_{f,l}.
  for (int f : inst.req.requested_set) {
    SubConstraint con;
    con.name = "rmin_file" + std::to_string(f);
    con.lin.scalars.push_back({cat.rmin_scalar, 1.0});
    for (int l = 0; l < inst.split.num_subfiles; ++l) {
      int s = idx.find(f, l);
      if (s >= 0 && !st.pinned[s]) con.lin.scalars.push_back({s, -1.0});
    }
    con.rhs = 0.0;
    prob.constraints.push_back(std::move(con));
  }

  // R_{f,l} <= S_l.
  for (int s = 0; s < idx.size(); ++s) {
    if (st.pinned[s]) continue;
    SubConstraint con;
    con.name = "cap_" + std::to_string(s);
    con.lin.scalars.push_back({s, 1.0});
    con.rhs = inst.split.subfile_sizes[idx.items[s].second];
    prob.constraints.push_back(std::move(con));
  }

  // SIC rate constraints, linearized: R + phi-part - log2det(lead) <= rhs.
  for (int k = 0; k < cfg.num_ue; ++k) {
    const int f_k = inst.req.requested_file[k];
    const Cmat& h = inst.chan.H[k];
    const int dim = cfg.antennas_ue[k];
    // Constant part of the IPN map: N_0 I plus the Omega floors.
    Cmat k_const = cfg.noise_level * Cmat::Identity(dim, dim);
    if (mode != TransferMode::kHard)
      for (int i = 0; i < cfg.num_errh; ++i)
        if (st.has_quant[i]) {
          Cmat hi = inst.chan.block(k, i, cfg);
          k_const += st.eps[i] * hi * hi.adjoint();
        }
    for (int l = 0; l < inst.split.num_subfiles; ++l) {
      int s = idx.find(f_k, l);
      if (s < 0 || st.pinned[s]) continue;
      Cmat b_old = ipn_matrix(inst, idx, k, l + 1, lin.W, lin_omega);
      Eigen::LLT<Cmat> llt(b_old);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("build_subproblem: IPN at linearization not PD");
      Cmat b_inv = llt.solve(Cmat::Identity(dim, dim));
      Cmat w_coeff = (h.adjoint() * b_inv * h) / kLn2;  // shared by all W terms

      SubConstraint con;
      con.name = "rate_k" + std::to_string(k) + "_l" + std::to_string(l);
      con.lin.scalars.push_back({s, 1.0});
      con.lin.constant = (b_inv * k_const).trace().real() / kLn2;
      PsdMap map;
      map.dim = dim;
      map.constant = k_const;
      for (int s2 = 0; s2 < idx.size(); ++s2) {
        auto [f2, l2] = idx.items[s2];
        if (st.support[s2].empty()) continue;
        bool in_lead = (f2 != f_k) || (l2 >= l);
        bool in_tail = (f2 != f_k) || (l2 >= l + 1);
        if (in_lead) map.terms.push_back({s2, h});
        if (in_tail) con.lin.mats.push_back({s2, w_coeff});
      }
      if (mode != TransferMode::kHard)
        for (int i = 0; i < cfg.num_errh; ++i)
          if (cat.omega_var[i] >= 0) {
            Cmat hi = inst.chan.block(k, i, cfg);
            map.terms.push_back({cat.omega_var[i], hi});
            con.lin.mats.push_back({cat.omega_var[i], (hi.adjoint() * b_inv * hi) / kLn2});
          }
      con.logdet = std::move(map);
      con.rhs = dim / kLn2 - log2det_psd(b_old);
      prob.constraints.push_back(std::move(con));
    }
  }

  // Fronthaul constraints.
  for (int i = 0; i < cfg.num_errh; ++i) {
    const bool quant = mode != TransferMode::kHard && st.has_quant[i];
    const bool loads = mode != TransferMode::kSoft && st.any_transfer[i];
    if (!quant && !loads) continue;
    SubConstraint con;
    con.name = "fronthaul_" + std::to_string(i);
    con.rhs = cfg.fronthaul_capacity[i];
    if (loads)
      for (int s = 0; s < idx.size(); ++s) {
        auto [f, l] = idx.items[s];
        if (inst.assign.transfer(f, l, i) && !st.pinned[s])
          con.lin.scalars.push_back({s, 1.0});
      }
    if (quant) {
      const int n_i = cfg.antennas_errh[i];
      Cmat d_old = quantizer_input(inst, idx, i, lin.W, mode) + lin.Omega[i];
      Eigen::LLT<Cmat> llt(d_old);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("build_subproblem: quantizer input at linearization not PD");
      Cmat d_inv = llt.solve(Cmat::Identity(n_i, n_i));
      Cmat w_coeff = embed_block(cfg, i, d_inv / kLn2);
      for (int s = 0; s < idx.size(); ++s) {
        auto [f, l] = idx.items[s];
        if (needs_quantization(mode, inst, f, l, i) && support_covers(st.support[s], cfg, i))
          con.lin.mats.push_back({s, w_coeff});
      }
      con.lin.mats.push_back({cat.omega_var[i], d_inv / kLn2});
      con.lin.constant = st.eps[i] * d_inv.trace().real() / kLn2;
      PsdMap map;
      map.dim = n_i;
      map.constant = st.eps[i] * Cmat::Identity(n_i, n_i);
      map.terms.push_back({cat.omega_var[i], Cmat::Identity(n_i, n_i)});
      con.logdet = std::move(map);
      con.rhs += n_i / kLn2 - log2det_psd(d_old);
    }
    prob.constraints.push_back(std::move(con));
  }

  // Per-eRRH power.
  for (int i = 0; i < cfg.num_errh; ++i) {
    SubConstraint con;
    con.name = "power_" + std::to_string(i);
    con.rhs = cfg.power_budget[i];
    Cmat sel = embed_block(cfg, i, Cmat::Identity(cfg.antennas_errh[i], cfg.antennas_errh[i]));
    for (int s = 0; s < idx.size(); ++s) {
      auto [f, l] = idx.items[s];
      if (mode == TransferMode::kHard && !inst.cache.cached(f, l, i) &&
          !inst.assign.transfer(f, l, i))
        continue;
      if (!support_covers(st.support[s], cfg, i)) continue;
      con.lin.mats.push_back({s, sel});
    }
    if (cat.omega_var[i] >= 0) {
      con.lin.mats.push_back(
          {cat.omega_var[i], Cmat::Identity(cfg.antennas_errh[i], cfg.antennas_errh[i])});
      con.lin.constant += st.eps[i] * cfg.antennas_errh[i];
    }
    prob.constraints.push_back(std::move(con));
  }

  return prob;
}

}  // namespace

FronthaulAssignment assign_fronthaul_nf(const SystemConfig& cfg,
                                        const ChannelRealization& chan,
                                        const CacheState& cache, const RequestProfile& req,
                                        int n_f) {
  if (n_f < 0 || n_f > cfg.num_errh)
    throw std::invalid_argument("assign_fronthaul_nf: N_F out of range");
  FronthaulAssignment d =
      FronthaulAssignment::zeros(cache.num_files, cache.num_subfiles, cfg.num_errh);
  if (n_f == 0) return d;
  for (int k = 0; k < cfg.num_ue; ++k) {
    const int f = req.requested_file[k];
    // Gains sorted descending, ties broken by the lower eRRH index.
    std::vector<std::pair<double, int>> gains(cfg.num_errh);
    for (int i = 0; i < cfg.num_errh; ++i)
      gains[i] = {chan.block(k, i, cfg).squaredNorm(), i};
    std::sort(gains.begin(), gains.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    for (int l = 0; l < cache.num_subfiles; ++l) {
      int placed = 0;
      for (const auto& [gain, i] : gains) {
        if (placed == n_f) break;
        if (cache.cached(f, l, i)) continue;
        d.set(f, l, i, true);
        ++placed;
      }
    }
  }
  d.validate(cache);
  return d;
}

FronthaulAssignment effective_assignment(const SystemConfig& cfg,
                                         const FronthaulAssignment& assign) {
  FronthaulAssignment d = assign;
  for (int i = 0; i < cfg.num_errh; ++i) {
    if (cfg.fronthaul_capacity[i] > kCapacityTol) continue;
    for (int f = 0; f < d.num_files; ++f)
      for (int l = 0; l < d.num_subfiles; ++l) d.set(f, l, i, false);
  }
  return d;
}

namespace {

// Per-eRRH signal power sum_s tr(E_i' W_s E_i).
double block_power(const SystemConfig& cfg, const std::vector<Cmat>& w, int i) {
  double p = 0.0;
  for (const Cmat& m : w)
    p += m.block(cfg.antenna_offset(i), cfg.antenna_offset(i), cfg.antennas_errh[i],
                 cfg.antennas_errh[i])
             .trace()
             .real();
  return p;
}

double max_fronthaul_overuse(TransferMode mode, const ProblemInstance& inst,
                             const Structure& st, const CovariancePoint& pt) {
  double worst = 0.0;
  for (int i = 0; i < inst.cfg.num_errh; ++i) {
    if (!st.has_quant[i]) continue;
    double g = mode == TransferMode::kSoft
                   ? fronthaul_usage_soft(inst, st.idx, i, pt.W, pt.Omega)
                   : fronthaul_usage_hybrid(inst, st.idx, i, pt.W, pt.Omega);
    worst = std::max(worst, g - 0.9 * inst.cfg.fronthaul_capacity[i]);
  }
  return worst;
}

}  // namespace

CovariancePoint init_feasible(TransferMode mode, const ProblemInstance& inst,
                              Philox& rng, const CccpSettings& settings) {
  const SystemConfig& cfg = inst.cfg;
  Structure st = analyze(mode, inst, settings);
  const int n_r = cfg.total_errh_antennas();
  CovariancePoint pt;
  pt.W.assign(st.idx.size(), Cmat::Zero(n_r, n_r));
  pt.Omega.assign(cfg.num_errh, Cmat());

  // Random PSD on each support, then a common scale targeting 40% of the
  // tightest power budget.
  for (int s = 0; s < st.idx.size(); ++s) {
    const auto& sup = st.support[s];
    if (sup.empty()) continue;
    Cmat small = random_psd(static_cast<Eigen::Index>(sup.size()), rng);
    for (std::size_t a = 0; a < sup.size(); ++a)
      for (std::size_t b = 0; b < sup.size(); ++b) pt.W[s](sup[a], sup[b]) = small(a, b);
    // Keep strictly PD on the support.
    for (int r : sup) pt.W[s](r, r) += 1e-6 * small.trace().real() / sup.size() + 1e-12;
  }
  double scale = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.num_errh; ++i) {
    double p = block_power(cfg, pt.W, i);
    if (p > 0.0) scale = std::min(scale, 0.4 * cfg.power_budget[i] / p);
  }
  if (std::isfinite(scale))
    for (Cmat& w : pt.W) w *= scale;

  // Quantization noise sized for g_i ~ C_i/2, capped at 40% of the power.
  for (int i = 0; i < cfg.num_errh; ++i) {
    if (!st.has_quant[i]) continue;
    const int n_i = cfg.antennas_errh[i];
    Cmat u = quantizer_input(inst, st.idx, i, pt.W, mode);
    double top = std::max(eig_range(u).second, 0.0);
    double target = std::pow(2.0, 0.5 * cfg.fronthaul_capacity[i] / n_i) - 1.0;
    double omega0 = target > 0.0 ? top / target : cfg.power_budget[i];
    omega0 = std::min(std::max(omega0, st.eps[i]), 0.4 * cfg.power_budget[i] / n_i);
    pt.Omega[i] = (st.eps[i] + omega0) * Cmat::Identity(n_i, n_i);
  }

  // Bisection on the covariance scale until every g_i <= 0.9 C_i (monotone
  // in the scale; the all-zero limit is always feasible).
  if (mode != TransferMode::kHard) {
    for (int iter = 0; iter < 200 && max_fronthaul_overuse(mode, inst, st, pt) > 0.0;
         ++iter)
      for (Cmat& w : pt.W) w *= 0.3;
  }
  return pt;
}

ExactValue exact_achievable(TransferMode mode, const ProblemInstance& inst,
                            const SubfileIndex& idx, const CovariancePoint& pt) {
  const SystemConfig& cfg = inst.cfg;
  ExactValue out;
  out.rates.assign(idx.size(), 0.0);
  // Per-subfile caps: size and the exact SIC rate of every requesting UE.
  std::vector<double> cap(idx.size());
  for (int s = 0; s < idx.size(); ++s) {
    auto [f, l] = idx.items[s];
    double c = inst.split.subfile_sizes[l];
    for (int k = 0; k < cfg.num_ue; ++k)
      if (inst.req.requested_file[k] == f)
        c = std::min(c, exact_rate(mode, inst, idx, k, l, pt));
    cap[s] = std::max(0.0, c);
  }
  // Remaining hard budgets.
  std::vector<double> budget(cfg.num_errh,
                             std::numeric_limits<double>::infinity());
  std::vector<char> coupled(cfg.num_errh, 0);
  if (mode != TransferMode::kSoft)
    for (int i = 0; i < cfg.num_errh; ++i) {
      bool any = false;
      for (int s = 0; s < idx.size() && !any; ++s)
        any = inst.assign.transfer(idx.items[s].first, idx.items[s].second, i);
      if (!any) continue;
      coupled[i] = 1;
      double b = cfg.fronthaul_capacity[i];
      if (mode == TransferMode::kHybrid)
        b -= fronthaul_usage_hybrid(inst, idx, i, pt.W, pt.Omega);
      budget[i] = std::max(0.0, b);
      for (int s = 0; s < idx.size(); ++s)
        if (inst.assign.transfer(idx.items[s].first, idx.items[s].second, i))
          cap[s] = std::min(cap[s], budget[i]);
    }
  bool any_coupling = false;
  for (int i = 0; i < cfg.num_errh; ++i)
    if (coupled[i]) any_coupling = true;

  auto min_file_rate = [&](const std::vector<double>& r) {
    double worst = std::numeric_limits<double>::infinity();
    for (int f : inst.req.requested_set) {
      double sum = 0.0;
      for (int s = 0; s < idx.size(); ++s)
        if (idx.items[s].first == f) sum += r[s];
      worst = std::min(worst, sum);
    }
    return worst;
  };

  if (!any_coupling) {
    out.rates = cap;
    out.min_rate = min_file_rate(out.rates);
    return out;
  }

  // Max-min LP over the rates alone, solved with the same barrier solver
  // (scalar-only subproblem).
  DcSubproblem lp;
  for (int s = 0; s < idx.size(); ++s)
    lp.scalar_vars.push_back({"R" + std::to_string(s), cap[s] <= kRateCapTol});
  const int t_var = static_cast<int>(lp.scalar_vars.size());
  lp.scalar_vars.push_back({"t", false});
  lp.objective = t_var;
  for (int f : inst.req.requested_set) {
    SubConstraint con;
    con.name = "file" + std::to_string(f);
    con.lin.scalars.push_back({t_var, 1.0});
    for (int s = 0; s < idx.size(); ++s)
      if (idx.items[s].first == f && cap[s] > kRateCapTol)
        con.lin.scalars.push_back({s, -1.0});
    con.rhs = 0.0;
    lp.constraints.push_back(std::move(con));
  }
  for (int s = 0; s < idx.size(); ++s) {
    if (cap[s] <= kRateCapTol) continue;
    SubConstraint con;
    con.name = "cap" + std::to_string(s);
    con.lin.scalars.push_back({s, 1.0});
    con.rhs = cap[s];
    lp.constraints.push_back(std::move(con));
  }
  for (int i = 0; i < cfg.num_errh; ++i) {
    if (!coupled[i]) continue;
    SubConstraint con;
    con.name = "link" + std::to_string(i);
    for (int s = 0; s < idx.size(); ++s)
      if (inst.assign.transfer(idx.items[s].first, idx.items[s].second, i) &&
          cap[s] > kRateCapTol)
        con.lin.scalars.push_back({s, 1.0});
    con.rhs = budget[i];
    if (!con.lin.scalars.empty()) lp.constraints.push_back(std::move(con));
  }
  // Strictly feasible start: half caps, shrunk into the budgets.
  SubPoint x0;
  x0.scalars.assign(lp.scalar_vars.size(), 0.0);
  for (int s = 0; s < idx.size(); ++s)
    if (cap[s] > kRateCapTol) x0.scalars[s] = 0.5 * cap[s];
  double shrink = 1.0;
  for (int i = 0; i < cfg.num_errh; ++i) {
    if (!coupled[i]) continue;
    double load = 0.0;
    for (int s = 0; s < idx.size(); ++s)
      if (inst.assign.transfer(idx.items[s].first, idx.items[s].second, i))
        load += x0.scalars[s];
    if (load > 0.0 && budget[i] > 0.0) shrink = std::min(shrink, 0.8 * budget[i] / load);
    if (load > 0.0 && budget[i] <= 0.0) shrink = 0.0;
  }
  if (shrink <= 0.0) {
    // A zero budget with demand: transferred rates are stuck at zero.
    for (int s = 0; s < idx.size(); ++s) {
      bool stuck = false;
      for (int i = 0; i < cfg.num_errh; ++i)
        if (coupled[i] && budget[i] <= 0.0 &&
            inst.assign.transfer(idx.items[s].first, idx.items[s].second, i))
          stuck = true;
      out.rates[s] = stuck ? 0.0 : cap[s];
    }
    out.min_rate = min_file_rate(out.rates);
    return out;
  }
  for (int s = 0; s < idx.size(); ++s) x0.scalars[s] *= shrink;
  double t0 = min_file_rate(x0.scalars);
  if (t0 <= kRateCapTol) {
    // A file with no positive-cap subfiles: the max-min value is zero and
    // the remaining rates are free; keep the feasible half-cap point.
    out.rates.assign(x0.scalars.begin(), x0.scalars.begin() + idx.size());
    out.min_rate = min_file_rate(out.rates);
    return out;
  }
  x0.scalars[t_var] = 0.9 * t0;
  auto [sol, rep] = solve(lp, &x0);
  out.rates.assign(sol.scalars.begin(), sol.scalars.begin() + idx.size());
  out.min_rate = min_file_rate(out.rates);
  return out;
}

namespace {

// Assembles the solver start: covariances plus strictly feasible rate
// variables derived from the exact rates at that point.
SubPoint make_start(TransferMode mode, const ProblemInstance& inst, const Structure& st,
                    const Catalog& cat, const DcSubproblem& prob,
                    const CovariancePoint& pt) {
  SubPoint x0;
  x0.mats.resize(prob.mat_vars.size());
  for (int s = 0; s < st.idx.size(); ++s) x0.mats[s] = pt.W[s];
  for (int i = 0; i < inst.cfg.num_errh; ++i)
    if (cat.omega_var[i] >= 0)
      x0.mats[cat.omega_var[i]] =
          pt.Omega[i] - st.eps[i] * Cmat::Identity(inst.cfg.antennas_errh[i],
                                                   inst.cfg.antennas_errh[i]);
  x0.scalars.assign(prob.scalar_vars.size(), 0.0);
  CovariancePoint eval_pt{pt.W, pt.Omega};
  std::vector<double> caps(st.idx.size(), 0.0);
  for (int s = 0; s < st.idx.size(); ++s) {
    if (st.pinned[s]) continue;
    auto [f, l] = st.idx.items[s];
    double cap = (1.0 - 1e-9) * inst.split.subfile_sizes[l];
    for (int k = 0; k < inst.cfg.num_ue; ++k)
      if (inst.req.requested_file[k] == f)
        cap = std::min(cap, 0.999 * exact_rate(mode, inst, st.idx, k, l, eval_pt));
    caps[s] = std::max(cap, 1e-14);
  }
  // Shrink into the hard fronthaul budgets.
  double shrink = 1.0;
  if (mode != TransferMode::kSoft)
    for (int i = 0; i < inst.cfg.num_errh; ++i) {
      if (!st.any_transfer[i]) continue;
      double budget = inst.cfg.fronthaul_capacity[i];
      if (mode == TransferMode::kHybrid && st.has_quant[i])
        budget -= fronthaul_usage_hybrid(inst, st.idx, i, pt.W, pt.Omega);
      double load = 0.0;
      for (int s = 0; s < st.idx.size(); ++s) {
        auto [f, l] = st.idx.items[s];
        if (inst.assign.transfer(f, l, i)) load += caps[s];
      }
      if (load > 0.0) shrink = std::min(shrink, 0.8 * std::max(budget, 0.0) / load);
    }
  double worst_file = std::numeric_limits<double>::infinity();
  for (int f : inst.req.requested_set) {
    double sum = 0.0;
    for (int s = 0; s < st.idx.size(); ++s)
      if (st.idx.items[s].first == f) sum += shrink * caps[s];
    worst_file = std::min(worst_file, sum);
  }
  for (int s = 0; s < st.idx.size(); ++s)
    if (!st.pinned[s]) x0.scalars[s] = std::max(shrink * caps[s], 1e-15);
  x0.scalars[cat.rmin_scalar] = std::max(0.999 * worst_file, 1e-15);
  return x0;
}

// Repairs a caller-supplied warm point so it is strictly interior for the
// mode's structure: shrink by 1e-6, add a tiny ridge on each support, and
// supply missing quantizer floors.
CovariancePoint repair_warm(const ProblemInstance& inst, const Structure& st,
                            const CovariancePoint& warm) {
  const SystemConfig& cfg = inst.cfg;
  const int n_r = cfg.total_errh_antennas();
  double min_p = *std::min_element(cfg.power_budget.begin(), cfg.power_budget.end());
  double delta = 1e-14 * min_p / (std::max(1, st.idx.size()) * n_r);
  CovariancePoint pt;
  pt.W.assign(st.idx.size(), Cmat::Zero(n_r, n_r));
  pt.Omega.assign(cfg.num_errh, Cmat());
  for (int s = 0; s < st.idx.size(); ++s) {
    if (st.support[s].empty()) continue;
    if (s < static_cast<int>(warm.W.size()) && warm.W[s].rows() == n_r)
      pt.W[s] = (1.0 - 1e-6) * warm.W[s];
    for (int r : st.support[s]) pt.W[s](r, r) += delta;
  }
  for (int i = 0; i < cfg.num_errh; ++i) {
    if (!st.has_quant[i]) continue;
    const int n_i = cfg.antennas_errh[i];
    if (i < static_cast<int>(warm.Omega.size()) && warm.Omega[i].rows() == n_i) {
      pt.Omega[i] = warm.Omega[i];
      // Ensure Omega' = Omega - eps I stays strictly PD.
      double lo = eig_range(pt.Omega[i]).first;
      if (lo < st.eps[i] * 1.5)
        pt.Omega[i] += (st.eps[i] * 1.5 - lo) * Cmat::Identity(n_i, n_i);
    } else {
      pt.Omega[i] = 2.0 * st.eps[i] * Cmat::Identity(n_i, n_i);
    }
  }
  return pt;
}

bool exactly_feasible(TransferMode mode, const ProblemInstance& inst, const Structure& st,
                      const CovariancePoint& pt) {
  for (int i = 0; i < inst.cfg.num_errh; ++i) {
    double p = block_power(inst.cfg, pt.W, i);
    if (pt.Omega[i].rows() != 0) p += pt.Omega[i].trace().real();
    if (p >= inst.cfg.power_budget[i] * (1.0 - 1e-9)) return false;
    if (st.has_quant[i]) {
      double g = mode == TransferMode::kSoft
                     ? fronthaul_usage_soft(inst, st.idx, i, pt.W, pt.Omega)
                     : fronthaul_usage_hybrid(inst, st.idx, i, pt.W, pt.Omega);
      if (g >= inst.cfg.fronthaul_capacity[i] * (1.0 - 1e-9)) return false;
    }
  }
  return true;
}

DeliverySolution zero_solution(TransferMode mode, const ProblemInstance& inst,
                               const Structure& st, const std::string& note) {
  const int n_r = inst.cfg.total_errh_antennas();
  DeliverySolution sol;
  sol.mode = mode;
  sol.subfiles = st.idx;
  sol.covariances.assign(st.idx.size(), Cmat::Zero(n_r, n_r));
  sol.quant_covariances.assign(inst.cfg.num_errh, Cmat());
  if (mode != TransferMode::kHard)
    for (int i = 0; i < inst.cfg.num_errh; ++i)
      if (st.has_quant[i])
        sol.quant_covariances[i] =
            st.eps[i] * Cmat::Identity(inst.cfg.antennas_errh[i], inst.cfg.antennas_errh[i]);
  sol.rates.assign(st.idx.size(), 0.0);
  sol.min_rate = 0.0;
  sol.relaxed_min_rate = 0.0;
  sol.trace = {0.0};
  sol.status_note = note;
  if (mode == TransferMode::kHybrid) sol.soft_budget.assign(inst.cfg.num_errh, 0.0);
  return sol;
}

}  // namespace

DeliverySolution run_cccp(TransferMode mode, const ProblemInstance& raw_inst,
                          const CccpSettings& settings, Philox& rng,
                          const CovariancePoint* warm) {
  ProblemInstance inst = raw_inst;
  inst.assign = effective_assignment(inst.cfg, raw_inst.assign);
  Structure st = analyze(mode, inst, settings);

  if (st.zero_instance)
    return zero_solution(mode, inst, st,
                         "a requested file is unreachable; R_min is structurally 0");

  DeliverySolution best_overall;
  bool have_overall = false;
  const int restarts = warm ? 1 : std::max(1, settings.restarts);
  for (int restart = 0; restart < restarts; ++restart) {
    Philox restart_rng = rng.split(1000 + restart);
    CovariancePoint cur;
    std::string note;
    if (warm) {
      cur = repair_warm(inst, st, *warm);
      if (!exactly_feasible(mode, inst, st, cur)) {
        cur = init_feasible(mode, inst, restart_rng, settings);
        note = "warm start rejected, fell back to random init";
      }
    } else {
      cur = init_feasible(mode, inst, restart_rng, settings);
    }

    DeliverySolution sol;
    sol.mode = mode;
    sol.subfiles = st.idx;
    ExactValue ev = exact_achievable(mode, inst, st.idx, cur);
    sol.trace.push_back(ev.min_rate);
    double best = ev.min_rate;
    CovariancePoint best_pt = cur;
    std::vector<double> best_rates = ev.rates;
    std::unique_ptr<SubPoint> x_prev;

    Catalog cat;
    for (int iter = 0; iter < settings.max_outer_iters; ++iter) {
      DcSubproblem prob = build_subproblem(mode, inst, st, cur, cat);
      SubPoint start = x_prev ? *x_prev : make_start(mode, inst, st, cat, prob, cur);
      SubPoint point;
      SolverReport rep;
      try {
        std::tie(point, rep) = solve(prob, &start, settings.solver);
      } catch (const std::exception& e) {
        note = std::string("subproblem solve failed: ") + e.what();
        sol.solver_ok = false;
        break;
      }
      if (rep.status == SolverReport::Status::kNumericalFailure) {
        note = "solver reported numerical failure: " + rep.note;
        sol.solver_ok = false;
        break;
      }
      CovariancePoint next;
      next.W.assign(st.idx.size(), Cmat());
      for (int s = 0; s < st.idx.size(); ++s) next.W[s] = point.mats[s];
      next.Omega.assign(inst.cfg.num_errh, Cmat());
      for (int i = 0; i < inst.cfg.num_errh; ++i)
        if (cat.omega_var[i] >= 0)
          next.Omega[i] = point.mats[cat.omega_var[i]] +
                          st.eps[i] * Cmat::Identity(inst.cfg.antennas_errh[i],
                                                     inst.cfg.antennas_errh[i]);
      ExactValue ev_next = exact_achievable(mode, inst, st.idx, next);
      if (settings.trace)
        (*settings.trace) << "iter " << iter << " exact_rmin " << ev_next.min_rate
                          << " surrogate_rmin " << rep.objective << " newton "
                          << rep.iterations << "\n";
      if (ev_next.min_rate < best) break;  // monotone safeguard: converged
      double improvement = ev_next.min_rate - best;
      best = ev_next.min_rate;
      best_pt = next;
      best_rates = ev_next.rates;
      sol.trace.push_back(best);
      cur = next;
      x_prev = std::make_unique<SubPoint>(point);
      if (improvement < settings.rel_improvement_tol * std::max(best, 1e-12)) break;
    }

    sol.covariances = best_pt.W;
    sol.quant_covariances = best_pt.Omega;
    sol.rates = best_rates;
    sol.min_rate = best;
    sol.relaxed_min_rate = best;
    sol.status_note = note;
    if (mode == TransferMode::kHybrid) {
      sol.soft_budget.assign(inst.cfg.num_errh, 0.0);
      for (int i = 0; i < inst.cfg.num_errh; ++i)
        if (st.has_quant[i])
          sol.soft_budget[i] =
              fronthaul_usage_hybrid(inst, st.idx, i, sol.covariances, sol.quant_covariances);
    }
    if (!have_overall || sol.min_rate > best_overall.min_rate) {
      best_overall = std::move(sol);
      have_overall = true;
    }
  }
  return best_overall;
}

DeliverySolution extract_precoders(const DeliverySolution& relaxed,
                                   const ProblemInstance& raw_inst) {
  ProblemInstance inst = raw_inst;
  inst.assign = effective_assignment(inst.cfg, raw_inst.assign);
  CccpSettings settings;  // only the floor fraction matters for analyze
  Structure st = analyze(relaxed.mode, inst, settings);
  const SystemConfig& cfg = inst.cfg;
  const int n_r = cfg.total_errh_antennas();

  DeliverySolution out = relaxed;
  out.precoders.assign(st.idx.size(), Cmat());
  bool truncated = false;
  for (int s = 0; s < st.idx.size(); ++s) {
    auto [f, l] = st.idx.items[s];
    const auto& sup = st.support[s];
    int max_streams = 0;
    for (int k = 0; k < cfg.num_ue; ++k)
      if (inst.req.requested_file[k] == f)
        max_streams = std::max(max_streams, cfg.antennas_ue[k]);
    const int n_s = std::min<int>(static_cast<int>(sup.size()), max_streams);
    if (n_s == 0) {
      out.precoders[s] = Cmat::Zero(n_r, 0);
      out.covariances[s] = Cmat::Zero(n_r, n_r);
      continue;
    }
    Cmat small(sup.size(), sup.size());
    for (std::size_t a = 0; a < sup.size(); ++a)
      for (std::size_t b = 0; b < sup.size(); ++b)
        small(a, b) = relaxed.covariances[s](sup[a], sup[b]);
    Eigen::SelfAdjointEigenSolver<Cmat> es(small);
    Cmat v = Cmat::Zero(n_r, n_s);
    double kept = 0.0;
    for (int c = 0; c < n_s; ++c) {
      // Eigen sorts ascending; take the trailing (largest) pairs.
      int src = static_cast<int>(sup.size()) - 1 - c;
      double lambda = std::max(0.0, es.eigenvalues()(src));
      kept += lambda;
      for (std::size_t a = 0; a < sup.size(); ++a)
        v(sup[a], c) = std::sqrt(lambda) * es.eigenvectors()(a, src);
    }
    if (small.trace().real() - kept > 1e-9 * std::max(1.0, small.trace().real()))
      truncated = true;
    out.precoders[s] = v;
    out.covariances[s] = v * v.adjoint();
  }

  // Truncation only removes PSD components, so per-eRRH power cannot grow;
  // the common rescale below is a guard against rounding.
  double rescale = 1.0;
  for (int i = 0; i < cfg.num_errh; ++i) {
    double p = block_power(cfg, out.covariances, i);
    if (out.quant_covariances.size() > static_cast<std::size_t>(i) &&
        out.quant_covariances[i].rows() != 0)
      p += out.quant_covariances[i].trace().real();
    if (p > cfg.power_budget[i])
      rescale = std::min(rescale, cfg.power_budget[i] / p);
  }
  if (rescale < 1.0) {
    for (Cmat& w : out.covariances) w *= rescale;
    for (Cmat& v : out.precoders) v *= std::sqrt(rescale);
  }

  CovariancePoint pt{out.covariances, out.quant_covariances};
  ExactValue ev = exact_achievable(relaxed.mode, inst, st.idx, pt);
  out.rates = ev.rates;
  out.min_rate = ev.min_rate;
  out.relaxed_min_rate = relaxed.min_rate;
  if (truncated && out.status_note.empty()) out.status_note = "rank truncated";
  if (relaxed.mode == TransferMode::kHybrid) {
    out.soft_budget.assign(cfg.num_errh, 0.0);
    for (int i = 0; i < cfg.num_errh; ++i)
      if (st.has_quant[i])
        out.soft_budget[i] =
            fronthaul_usage_hybrid(inst, st.idx, i, out.covariances, out.quant_covariances);
  }
  return out;
}

DeliverySolution solve_delivery(TransferMode mode, const ProblemInstance& inst,
                                const CccpSettings& settings, Philox& rng) {
  return extract_precoders(run_cccp(mode, inst, settings, rng), inst);
}

HybridWarmResult solve_hybrid_warm(const ProblemInstance& inst,
                                   const CccpSettings& settings, Philox& rng) {
  HybridWarmResult out;
  Philox rng_soft = rng.split(1);
  Philox rng_hard = rng.split(2);
  Philox rng_hyb = rng.split(3);
  ProblemInstance soft_inst = inst;
  soft_inst.assign = FronthaulAssignment::zeros(inst.assign.num_files,
                                                inst.assign.num_subfiles,
                                                inst.assign.num_errh);
  out.soft = run_cccp(TransferMode::kSoft, soft_inst, settings, rng_soft);
  out.hard = run_cccp(TransferMode::kHard, inst, settings, rng_hard);
  const bool hard_wins = out.hard.min_rate >= out.soft.min_rate;
  const DeliverySolution& seed = hard_wins ? out.hard : out.soft;
  const ProblemInstance& hybrid_inst = hard_wins ? inst : soft_inst;
  CovariancePoint warm{seed.covariances, seed.quant_covariances};
  out.hybrid = run_cccp(TransferMode::kHybrid, hybrid_inst, settings, rng_hyb, &warm);
  out.soft = extract_precoders(out.soft, soft_inst);
  out.hard = extract_precoders(out.hard, inst);
  out.hybrid = extract_precoders(out.hybrid, hybrid_inst);
  return out;
}

}  // namespace fran
