#include "fran/solver.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fran {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One realified basis element of a Hermitian variable, in support-local
// coordinates: X = sum_p x_p B_p with B = e_i e_j^T pairs as below.
struct Basis {
  int kind;    // 0 diag, 1 re off-diag, 2 im off-diag
  int a, b;    // local indices, a < b for off-diagonal
};

std::vector<Basis> enumerate_basis(int m) {
  std::vector<Basis> basis;
  basis.reserve(m * m);
  for (int j = 0; j < m; ++j) basis.push_back({0, j, j});
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      basis.push_back({1, a, b});
      basis.push_back({2, a, b});
    }
  return basis;
}

struct Layout {
  struct Mat {
    int base = 0;
    std::vector<int> sup;  // full-coordinate support rows
    std::vector<Basis> basis;
  };
  std::vector<Mat> mats;
  std::vector<int> scalar_pos;  // -1 when pinned
  int n = 0;
};

Layout make_layout(const DcSubproblem& prob) {
  Layout lay;
  int pos = 0;
  lay.mats.resize(prob.mat_vars.size());
  for (std::size_t v = 0; v < prob.mat_vars.size(); ++v) {
    lay.mats[v].base = pos;
    lay.mats[v].sup = prob.mat_vars[v].support;
    int m = static_cast<int>(lay.mats[v].sup.size());
    lay.mats[v].basis = enumerate_basis(m);
    pos += m * m;
  }
  lay.scalar_pos.assign(prob.scalar_vars.size(), -1);
  for (std::size_t s = 0; s < prob.scalar_vars.size(); ++s)
    if (!prob.scalar_vars[s].pinned) lay.scalar_pos[s] = pos++;
  lay.n = pos;
  return lay;
}

// Full-size Hermitian matrix from the parameter slice of variable v.
Cmat mat_from_params(const Layout& lay, const DcSubproblem& prob, int v, const Rvec& x) {
  const auto& lm = lay.mats[v];
  const int m = static_cast<int>(lm.sup.size());
  Cmat full = Cmat::Zero(prob.mat_vars[v].dim, prob.mat_vars[v].dim);
  int p = lm.base;
  for (int j = 0; j < m; ++j) full(lm.sup[j], lm.sup[j]) = x[p++];
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      std::complex<double> z(x[p], x[p + 1]);
      p += 2;
      full(lm.sup[a], lm.sup[b]) = z;
      full(lm.sup[b], lm.sup[a]) = std::conj(z);
    }
  return full;
}

void params_from_mat(const Layout& lay, int v, const Cmat& full, Rvec& x) {
  const auto& lm = lay.mats[v];
  const int m = static_cast<int>(lm.sup.size());
  int p = lm.base;
  for (int j = 0; j < m; ++j) x[p++] = full(lm.sup[j], lm.sup[j]).real();
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      x[p] = full(lm.sup[a], lm.sup[b]).real();
      x[p + 1] = full(lm.sup[a], lm.sup[b]).imag();
      p += 2;
    }
}

// grad += alpha * [tr(G B_p)]_p over variable v's parameters, G Hermitian in
// full coordinates.
void add_herm_gradient(const Layout& lay, int v, const Cmat& g_full, double alpha,
                       Rvec& grad) {
  const auto& lm = lay.mats[v];
  const int m = static_cast<int>(lm.sup.size());
  int p = lm.base;
  for (int j = 0; j < m; ++j)
    grad[p++] += alpha * g_full(lm.sup[j], lm.sup[j]).real();
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      grad[p] += alpha * 2.0 * g_full(lm.sup[a], lm.sup[b]).real();
      grad[p + 1] += alpha * 2.0 * g_full(lm.sup[a], lm.sup[b]).imag();
      p += 2;
    }
}

// Rank-1/2 decomposition of a basis element: B = sum_r coef_r e_{i_r} e_{j_r}^T.
struct BasisDecomp {
  int count;
  std::complex<double> coef[2];
  int i[2], j[2];
};

BasisDecomp decompose(const Basis& b) {
  BasisDecomp d;
  if (b.kind == 0) {
    d.count = 1;
    d.coef[0] = 1.0;
    d.i[0] = b.a;
    d.j[0] = b.a;
  } else if (b.kind == 1) {
    d.count = 2;
    d.coef[0] = 1.0;
    d.i[0] = b.a;
    d.j[0] = b.b;
    d.coef[1] = 1.0;
    d.i[1] = b.b;
    d.j[1] = b.a;
  } else {
    d.count = 2;
    d.coef[0] = {0.0, 1.0};
    d.i[0] = b.a;
    d.j[0] = b.b;
    d.coef[1] = {0.0, -1.0};
    d.i[1] = b.b;
    d.j[1] = b.a;
  }
  return d;
}

// hess(p,q) += alpha * tr(Y B_p Y^H B_q) over parameters p of var vp and q
// of var vq. Y maps var(p) full coordinates to var(q) full coordinates
// (rows: vq side, cols: vp side); map_rows/map_cols translate local support
// indices to Y's coordinates (identity for support-local Y).
void add_pair_block(const Layout& lay, int vp, int vq, const Cmat& y,
                    const std::vector<int>& rows_map, const std::vector<int>& cols_map,
                    double alpha, Rmat& hess) {
  const auto& lp = lay.mats[vp];
  const auto& lq = lay.mats[vq];
  for (std::size_t p = 0; p < lp.basis.size(); ++p) {
    BasisDecomp dp = decompose(lp.basis[p]);
    for (std::size_t q = 0; q < lq.basis.size(); ++q) {
      BasisDecomp dq = decompose(lq.basis[q]);
      std::complex<double> acc = 0.0;
      for (int r = 0; r < dp.count; ++r)
        for (int t = 0; t < dq.count; ++t) {
          // tr(Y (e_a e_b^T) Y^H (e_c e_d^T)) = conj(Y(c,b)) Y(d,a)
          int a = cols_map[dp.i[r]], b = cols_map[dp.j[r]];
          int c = rows_map[dq.i[t]], d = rows_map[dq.j[t]];
          acc += dp.coef[r] * dq.coef[t] * std::conj(y(c, b)) * y(d, a);
        }
      hess(lp.base + static_cast<int>(p), lq.base + static_cast<int>(q)) +=
          alpha * acc.real();
    }
  }
}

std::vector<int> identity_map(int m) {
  std::vector<int> v(m);
  for (int i = 0; i < m; ++i) v[i] = i;
  return v;
}

struct ConstraintPre {
  Rvec lin_grad;
  double lin_const = 0.0;
  double rhs = 0.0;
  const PsdMap* map = nullptr;
};

// State at one parameter vector: margins, map matrices + inverses, variable
// inverses, barrier value.
struct State {
  Rvec x;
  std::vector<Cmat> full;      // full-size variable matrices
  std::vector<Cmat> sup_inv;   // inverse of the supported submatrix
  std::vector<double> margins;
  std::vector<Cmat> map_m;     // M_c(x) per logdet constraint slot
  std::vector<Cmat> map_inv;
  std::vector<double> map_log2det;
  double barrier = 0.0;  // Phi(x)
};

class Barrier {
 public:
  Barrier(const DcSubproblem& prob, const Layout& lay) : prob_(prob), lay_(lay) {
    pre_.resize(prob.constraints.size());
    for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
      const auto& con = prob.constraints[c];
      pre_[c].lin_grad = Rvec::Zero(lay.n);
      pre_[c].lin_const = con.lin.constant;
      pre_[c].rhs = con.rhs;
      pre_[c].map = con.logdet ? &*con.logdet : nullptr;
      for (auto& [s, coef] : con.lin.scalars)
        if (lay.scalar_pos[s] >= 0) pre_[c].lin_grad[lay.scalar_pos[s]] += coef;
      for (auto& [v, cmat] : con.lin.mats) {
        Cmat herm = 0.5 * (cmat + cmat.adjoint());
        add_herm_gradient(lay, v, herm, 1.0, pre_[c].lin_grad);
      }
    }
    // Barrier parameter estimate for the certified gap (conservative:
    // realified dimensions for every log-det term).
    nu_ = 0.0;
    for (const auto& con : prob.constraints)
      nu_ += 1.0 + (con.logdet ? 2.0 * con.logdet->dim : 0.0);
    for (std::size_t v = 0; v < prob.mat_vars.size(); ++v)
      nu_ += 2.0 * static_cast<double>(prob.mat_vars[v].support.size());
    for (int s : lay.scalar_pos)
      if (s >= 0) nu_ += 1.0;
  }

  double nu() const { return nu_; }

  // Evaluates margins and the barrier; false when x is outside the domain.
  bool eval(State& st) const {
    const auto& prob = prob_;
    st.full.resize(prob.mat_vars.size());
    st.sup_inv.assign(prob.mat_vars.size(), Cmat());
    double barrier = 0.0;
    for (std::size_t v = 0; v < prob.mat_vars.size(); ++v) {
      st.full[v] = mat_from_params(lay_, prob, static_cast<int>(v), st.x);
      const auto& sup = lay_.mats[v].sup;
      const int m = static_cast<int>(sup.size());
      if (m == 0) continue;
      Cmat xs(m, m);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) xs(a, b) = st.full[v](sup[a], sup[b]);
      Eigen::LLT<Cmat> llt(xs);
      if (llt.info() != Eigen::Success) return false;
      double lndet = 0.0;
      for (int j = 0; j < m; ++j) lndet += std::log(llt.matrixL()(j, j).real());
      lndet *= 2.0;
      if (!std::isfinite(lndet)) return false;
      barrier -= lndet;
      st.sup_inv[v] = llt.solve(Cmat::Identity(m, m));
    }
    for (std::size_t s = 0; s < prob.scalar_vars.size(); ++s) {
      int p = lay_.scalar_pos[s];
      if (p < 0) continue;
      if (!(st.x[p] > 0.0)) return false;
      barrier -= std::log(st.x[p]);
    }
    st.margins.assign(prob.constraints.size(), 0.0);
    st.map_m.assign(prob.constraints.size(), Cmat());
    st.map_inv.assign(prob.constraints.size(), Cmat());
    st.map_log2det.assign(prob.constraints.size(), 0.0);
    for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
      double lin = pre_[c].lin_const + pre_[c].lin_grad.dot(st.x);
      double margin = pre_[c].rhs - lin;
      if (pre_[c].map) {
        Cmat m = pre_[c].map->constant;
        for (const auto& term : pre_[c].map->terms)
          m += term.t * st.full[term.var] * term.t.adjoint();
        Eigen::LLT<Cmat> llt(m);
        if (llt.info() != Eigen::Success) return false;
        double lndet = 0.0;
        for (Eigen::Index j = 0; j < m.rows(); ++j)
          lndet += std::log(llt.matrixL()(j, j).real());
        lndet *= 2.0;
        double l2d = bits_from_nats(lndet);
        if (!std::isfinite(l2d)) return false;
        st.map_m[c] = std::move(m);
        st.map_inv[c] = llt.solve(Cmat::Identity(st.map_m[c].rows(), st.map_m[c].rows()));
        st.map_log2det[c] = l2d;
        margin += l2d;
        barrier -= l2d;  // composite term keeping the map PD
      }
      if (!(margin > 0.0)) return false;
      st.margins[c] = margin;
      barrier -= std::log(margin);
    }
    if (!std::isfinite(barrier)) return false;
    st.barrier = barrier;
    return true;
  }

  // Gradient and Hessian of Phi at an evaluated state.
  void derivatives(const State& st, Rvec& grad, Rmat& hess) const {
    const auto& prob = prob_;
    grad = Rvec::Zero(lay_.n);
    hess = Rmat::Zero(lay_.n, lay_.n);
    // PSD cone barriers.
    for (std::size_t v = 0; v < prob.mat_vars.size(); ++v) {
      const auto& sup = lay_.mats[v].sup;
      const int m = static_cast<int>(sup.size());
      if (m == 0) continue;
      Cmat inv_full = Cmat::Zero(prob.mat_vars[v].dim, prob.mat_vars[v].dim);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) inv_full(sup[a], sup[b]) = st.sup_inv[v](a, b);
      add_herm_gradient(lay_, static_cast<int>(v), inv_full, -1.0, grad);
      add_pair_block(lay_, static_cast<int>(v), static_cast<int>(v), st.sup_inv[v],
                     identity_map(m), identity_map(m), 1.0, hess);
    }
    // Scalar positivity barriers.
    for (std::size_t s = 0; s < prob.scalar_vars.size(); ++s) {
      int p = lay_.scalar_pos[s];
      if (p < 0) continue;
      grad[p] -= 1.0 / st.x[p];
      hess(p, p) += 1.0 / (st.x[p] * st.x[p]);
    }
    // Constraints.
    Rvec grad_margin(lay_.n), grad_l2d(lay_.n);
    for (std::size_t c = 0; c < prob.constraints.size(); ++c) {
      const double s = st.margins[c];
      if (!pre_[c].map) {
        // -log(rhs - lin): gradient lin_grad/s, Hessian rank-1.
        grad += pre_[c].lin_grad / s;
        hess.noalias() += (pre_[c].lin_grad * pre_[c].lin_grad.transpose()) / (s * s);
        continue;
      }
      const PsdMap& map = *pre_[c].map;
      const Cmat& minv = st.map_inv[c];
      // Gradient of log2det(M(x)); per variable, G_v = sum_j T_j^H M^-1 T_j.
      grad_l2d.setZero();
      std::vector<Cmat> g_per_var(prob.mat_vars.size());
      for (const auto& term : map.terms) {
        Cmat g = term.t.adjoint() * minv * term.t;
        if (g_per_var[term.var].rows() == 0)
          g_per_var[term.var] = std::move(g);
        else
          g_per_var[term.var] += g;
      }
      for (std::size_t v = 0; v < g_per_var.size(); ++v)
        if (g_per_var[v].rows() != 0) {
          Cmat herm = 0.5 * (g_per_var[v] + g_per_var[v].adjoint());
          add_herm_gradient(lay_, static_cast<int>(v), herm, 1.0 / kLn2, grad_l2d);
        }
      grad_margin = grad_l2d - pre_[c].lin_grad;  // d margin / dx
      // Phi_c = -log(s) - log2det(M): gradient.
      grad += -grad_margin / s - grad_l2d;
      // Hessian: rank-1 margin part + (1 + 1/s) * [-d2 log2det].
      hess.noalias() += (grad_margin * grad_margin.transpose()) / (s * s);
      const double w = 1.0 + 1.0 / s;
      if (map.dim == 1) {
        // Scalar map: -d2 log2det = ln2 * grad_l2d grad_l2d^T (rank-1).
        hess.noalias() += (w * kLn2) * (grad_l2d * grad_l2d.transpose());
      } else {
        for (const auto& tj : map.terms)
          for (const auto& tk : map.terms) {
            // tr(M^-1 A_p M^-1 A_q) pieces: Y = T_k^H M^-1 T_j.
            Cmat y = tk.t.adjoint() * minv * tj.t;
            const auto& supj = lay_.mats[tj.var].sup;
            const auto& supk = lay_.mats[tk.var].sup;
            add_pair_block(lay_, tj.var, tk.var, y, supk, supj, w / kLn2, hess);
          }
      }
    }
  }

  const ConstraintPre& pre(std::size_t c) const { return pre_[c]; }

 private:
  const DcSubproblem& prob_;
  const Layout& lay_;
  std::vector<ConstraintPre> pre_;
  double nu_ = 0.0;
};

Rvec params_from_point(const DcSubproblem& prob, const Layout& lay, const SubPoint& p) {
  if (p.mats.size() != prob.mat_vars.size() || p.scalars.size() != prob.scalar_vars.size())
    throw std::invalid_argument("solve: start point shape mismatch");
  Rvec x = Rvec::Zero(lay.n);
  for (std::size_t v = 0; v < prob.mat_vars.size(); ++v) {
    if (p.mats[v].rows() != prob.mat_vars[v].dim)
      throw std::invalid_argument("solve: start matrix dimension mismatch");
    params_from_mat(lay, static_cast<int>(v), p.mats[v], x);
  }
  for (std::size_t s = 0; s < prob.scalar_vars.size(); ++s)
    if (lay.scalar_pos[s] >= 0) x[lay.scalar_pos[s]] = p.scalars[s];
  return x;
}

SubPoint point_from_params(const DcSubproblem& prob, const Layout& lay, const Rvec& x) {
  SubPoint p;
  p.mats.resize(prob.mat_vars.size());
  p.scalars.assign(prob.scalar_vars.size(), 0.0);
  for (std::size_t v = 0; v < prob.mat_vars.size(); ++v)
    p.mats[v] = mat_from_params(lay, prob, static_cast<int>(v), x);
  for (std::size_t s = 0; s < prob.scalar_vars.size(); ++s)
    if (lay.scalar_pos[s] >= 0) p.scalars[s] = x[lay.scalar_pos[s]];
  return p;
}

}  // namespace

const char* to_string(SolverReport::Status s) {
  switch (s) {
    case SolverReport::Status::kOptimal: return "optimal";
    case SolverReport::Status::kMaxIter: return "max_iter";
    case SolverReport::Status::kNumericalFailure: return "numerical_failure";
  }
  return "?";
}

std::pair<SubPoint, SolverReport> solve(const DcSubproblem& prob, const SubPoint* start,
                                        const SolveOptions& opts) {
  prob.validate();
  Layout lay = make_layout(prob);
  Barrier barrier(prob, lay);

  State st;
  if (start) {
    st.x = params_from_point(prob, lay, *start);
    if (!barrier.eval(st))
      throw std::invalid_argument("solve: start point not strictly feasible");
  } else {
    // Default start: delta*I on each support, tiny positive scalars; halve
    // delta until strictly feasible. Problems whose interior needs large
    // variables (soft fronthaul surrogates) must supply a start instead.
    double cap = 1.0;
    for (const auto& con : prob.constraints) cap = std::max(cap, std::abs(con.rhs));
    bool ok = false;
    for (double delta = 1e-3; delta > 1e-16; delta *= 0.5) {
      st.x = Rvec::Zero(lay.n);
      for (std::size_t v = 0; v < prob.mat_vars.size(); ++v) {
        int p = lay.mats[v].base;
        for (std::size_t j = 0; j < lay.mats[v].sup.size(); ++j)
          st.x[p + static_cast<int>(j)] = delta;
      }
      for (int pos : lay.scalar_pos)
        if (pos >= 0) st.x[pos] = 1e-12 * cap;
      if (barrier.eval(st)) {
        ok = true;
        break;
      }
    }
    if (!ok) throw std::invalid_argument("solve: no strictly feasible default start");
  }

  SolverReport report;
  const int obj_pos = lay.scalar_pos[prob.objective];
  Rvec grad, g_phi;
  Rmat hess;
  bool failed = false, last_stage_converged = false;
  double mu = opts.mu0;
  for (;; mu *= opts.mu_factor) {
    bool stage_converged = false;
    for (int it = 0; it < opts.max_stage_iters; ++it) {
      barrier.derivatives(st, g_phi, hess);
      grad = g_phi;
      grad[obj_pos] -= 1.0 / mu;  // d/dx of -x_obj / mu
      Eigen::LDLT<Rmat> ldlt(hess);
      Rvec step = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        double jitter = 1e-12 * std::max(1.0, hess.diagonal().maxCoeff());
        ldlt.compute(hess + jitter * Rmat::Identity(lay.n, lay.n));
        step = ldlt.solve(-grad);
        if (!step.allFinite()) {
          failed = true;
          report.note = "Newton system unsolvable";
          break;
        }
      }
      double lambda2 = -grad.dot(step);
      if (!(lambda2 > 0.0)) lambda2 = 0.0;
      if (opts.trace)
        (*opts.trace) << "mu=" << mu << " obj=" << st.x[obj_pos]
                      << " residual=" << lambda2 / 2.0 << "\n";
      if (lambda2 / 2.0 <= opts.newton_tol) {
        stage_converged = true;
        break;
      }
      const double psi0 = -st.x[obj_pos] / mu + st.barrier;
      const double slope = grad.dot(step);  // < 0
      State trial;
      double t = 1.0;
      bool moved = false;
      for (; t > 1e-16; t *= opts.armijo_beta) {
        trial.x = st.x + t * step;
        if (!barrier.eval(trial)) continue;
        double psi_t = -trial.x[obj_pos] / mu + trial.barrier;
        if (psi_t <= psi0 + opts.armijo_c * t * slope) {
          moved = true;
          break;
        }
      }
      if (!moved) {
        failed = true;
        report.note = "line search stalled";
        break;
      }
      st = std::move(trial);
      ++report.iterations;
    }
    if (failed) break;
    if (mu <= opts.mu_min) {
      last_stage_converged = stage_converged;
      break;
    }
  }

  SubPoint solution = point_from_params(prob, lay, st.x);
  CertifyResult cert = certify(prob, solution);
  report.objective = cert.objective;
  report.max_violation = cert.max_violation;
  report.gap = barrier.nu() * opts.mu_min;
  if (failed)
    report.status = SolverReport::Status::kNumericalFailure;
  else if (!last_stage_converged || report.max_violation > 1e-7 || report.gap > 1e-5)
    report.status = SolverReport::Status::kMaxIter;
  else
    report.status = SolverReport::Status::kOptimal;
  return {std::move(solution), report};
}

CertifyResult certify(const DcSubproblem& prob, const SubPoint& p) {
  prob.validate();
  if (p.mats.size() != prob.mat_vars.size() || p.scalars.size() != prob.scalar_vars.size())
    throw std::invalid_argument("certify: point shape mismatch");
  CertifyResult res;
  res.objective = p.scalars[prob.objective];
  double worst = 0.0;
  for (const auto& con : prob.constraints) {
    double value = con.eval(p);
    double rel = (value - con.rhs) / std::max(1.0, std::abs(con.rhs));
    worst = std::max(worst, rel);
  }
  for (std::size_t v = 0; v < prob.mat_vars.size(); ++v) {
    const auto& sup = prob.mat_vars[v].support;
    const int m = static_cast<int>(sup.size());
    if (m == 0) continue;
    Cmat xs(m, m);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) xs(a, b) = p.mats[v](sup[a], sup[b]);
    auto [lo, hi] = eig_range(xs);
    if (lo < 0.0) worst = std::max(worst, -lo / std::max(1.0, hi));
  }
  for (std::size_t s = 0; s < prob.scalar_vars.size(); ++s)
    if (!prob.scalar_vars[s].pinned) worst = std::max(worst, -p.scalars[s]);
  res.max_violation = std::max(0.0, worst);
  return res;
}

}  // namespace fran
