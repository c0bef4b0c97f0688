#include "fran/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "fran/scenario.hpp"
#include "fran/units.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fran {

const char* to_string(SweepParam p) {
  switch (p) {
    case SweepParam::kGamma: return "gamma";
    case SweepParam::kMu: return "mu";
    case SweepParam::kC: return "C";
    case SweepParam::kS: return "S";
    case SweepParam::kSnr: return "snr";
  }
  return "?";
}

SweepParam sweep_param_from_string(const std::string& name) {
  if (name == "gamma") return SweepParam::kGamma;
  if (name == "mu") return SweepParam::kMu;
  if (name == "C") return SweepParam::kC;
  if (name == "S") return SweepParam::kS;
  if (name == "snr") return SweepParam::kSnr;
  throw std::invalid_argument("unknown sweep parameter: " + name);
}

void SweepSpec::validate() const {
  if (grid.empty()) throw std::invalid_argument("SweepSpec: empty grid");
  if (trials < 1) throw std::invalid_argument("SweepSpec: trials must be >= 1");
  if (modes.empty()) throw std::invalid_argument("SweepSpec: no modes");
  if (prefetchers.empty()) throw std::invalid_argument("SweepSpec: no prefetchers");
  base.validate();
}

SystemConfig apply_sweep_value(const SystemConfig& base, SweepParam param, double value) {
  SystemConfig cfg = base;
  switch (param) {
    case SweepParam::kGamma:
      cfg.zipf_exponent = value;
      break;
    case SweepParam::kMu:
      cfg.fractional_cache.assign(cfg.num_errh, value);
      break;
    case SweepParam::kC:
      cfg.fronthaul_capacity.assign(cfg.num_errh, value);
      break;
    case SweepParam::kS:
      cfg.file_size = value;
      break;
    case SweepParam::kSnr:
      cfg.power_budget.assign(cfg.num_errh, cfg.noise_level * db_to_linear(value));
      break;
  }
  cfg.validate();
  return cfg;
}

std::uint64_t trial_seed(std::uint64_t base, double value, const ModeSpec& mode,
                         Prefetcher prefetcher, int trial) {
  std::uint64_t h = hash_combine(base, value);
  h = hash_combine(h, std::string_view(to_string(mode.mode)));
  h = hash_combine(h, static_cast<std::uint64_t>(mode.nf + 1));
  h = hash_combine(h, std::string_view(to_string(prefetcher)));
  return hash_combine(h, static_cast<std::uint64_t>(trial));
}

TrialResult run_trial(const SystemConfig& cfg, const ModeSpec& mode, Prefetcher prefetcher,
                      std::uint64_t seed, const CccpSettings& settings,
                      DeliverySolution* solution_out, ProblemInstance* instance_out) {
  TrialResult res;
  try {
    Philox geo(seed, RngStream::kGeometry);
    Philox fading(seed, RngStream::kFading);
    Philox requests(seed, RngStream::kRequests);
    Philox prefetch_rng(seed, RngStream::kPrefetch);
    Philox init_rng(seed, RngStream::kInit);

    ProblemInstance inst;
    inst.cfg = cfg;
    Positions pos = sample_geometry(cfg, geo);
    inst.chan = sample_channel(cfg, pos, fading);
    inst.req = sample_requests(zipf_pmf(cfg.library_size, cfg.zipf_exponent),
                               cfg.num_ue, requests);
    PrefetchResult pf = apply_prefetch(prefetcher, cfg, prefetch_rng);
    inst.split = std::move(pf.split);
    inst.cache = std::move(pf.cache);
    if (mode.mode == TransferMode::kSoft || mode.nf <= 0)
      inst.assign = FronthaulAssignment::zeros(cfg.library_size, inst.split.num_subfiles,
                                               cfg.num_errh);
    else
      inst.assign = effective_assignment(
          cfg, assign_fronthaul_nf(cfg, inst.chan, inst.cache, inst.req, mode.nf));

    DeliverySolution sol = solve_delivery(mode.mode, inst, settings, init_rng);
    res.ok = sol.solver_ok;
    res.min_rate = sol.min_rate;
    res.note = sol.status_note;
    if (solution_out) *solution_out = std::move(sol);
    if (instance_out) *instance_out = std::move(inst);
  } catch (const std::exception& e) {
    res.ok = false;
    res.note = e.what();
  }
  return res;
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec, int threads) {
  spec.validate();
  struct Cell {
    double value;
    ModeSpec mode;
    Prefetcher prefetcher;
  };
  std::vector<Cell> cells;
  for (double v : spec.grid)
    for (const ModeSpec& m : spec.modes)
      for (Prefetcher p : spec.prefetchers) cells.push_back({v, m, p});

  struct Job {
    int cell;
    int trial;
  };
  std::vector<Job> jobs;
  jobs.reserve(cells.size() * spec.trials);
  for (int c = 0; c < static_cast<int>(cells.size()); ++c)
    for (int t = 0; t < spec.trials; ++t) jobs.push_back({c, t});

  std::vector<TrialResult> results(jobs.size());
  auto run_job = [&](int j) {
    const Cell& cell = cells[jobs[j].cell];
    SystemConfig cfg = apply_sweep_value(spec.base, spec.param, cell.value);
    std::uint64_t seed =
        trial_seed(spec.base_seed, cell.value, cell.mode, cell.prefetcher, jobs[j].trial);
    results[j] = run_trial(cfg, cell.mode, cell.prefetcher, seed, spec.settings);
  };

  if (threads <= 1) {
    // Serial reference path; the OpenMP fan-out below must match it bit for
    // bit (per-job results are independent and reduced in grid order).
    for (int j = 0; j < static_cast<int>(jobs.size()); ++j) run_job(j);
  } else {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int j = 0; j < static_cast<int>(jobs.size()); ++j) run_job(j);
#else
    for (int j = 0; j < static_cast<int>(jobs.size()); ++j) run_job(j);
#endif
  }

  std::vector<ResultRow> rows;
  rows.reserve(cells.size());
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    ResultRow row;
    row.sweep_param = to_string(spec.param);
    row.value = cells[c].value;
    row.mode = to_string(cells[c].mode.mode);
    row.nf = cells[c].mode.mode == TransferMode::kSoft ? -1 : cells[c].mode.nf;
    row.prefetcher = to_string(cells[c].prefetcher);
    row.trials = spec.trials;
    double sum = 0.0, sumsq = 0.0;
    int ok = 0;
    for (int t = 0; t < spec.trials; ++t) {
      const TrialResult& r = results[static_cast<std::size_t>(c) * spec.trials + t];
      if (!r.ok) {
        ++row.failures;
        continue;
      }
      sum += r.min_rate;
      sumsq += r.min_rate * r.min_rate;
      ++ok;
    }
    if (ok > 0) row.mean_rmin = sum / ok;
    if (ok > 1) {
      double var = (sumsq - sum * sum / ok) / (ok - 1);
      row.stderr_rmin = std::sqrt(std::max(0.0, var) / ok);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::string emit_csv(const std::vector<ResultRow>& rows) {
  std::string out = "sweep_param,value,mode,prefetcher,nf,mean_rmin,stderr,trials,failures\n";
  for (const ResultRow& r : rows) {
    out += r.sweep_param;
    out += ',';
    out += fmt9(r.value);
    out += ',';
    out += r.mode;
    out += ',';
    out += r.prefetcher;
    out += ',';
    out += std::to_string(r.nf);
    out += ',';
    out += fmt9(r.mean_rmin);
    out += ',';
    out += fmt9(r.stderr_rmin);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    out += std::to_string(r.failures);
    out += '\n';
  }
  return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "sweep_param,value,mode,prefetcher,nf,mean_rmin,stderr,trials,failures")
    throw std::invalid_argument("parse_csv: bad header");
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    ResultRow r;
    auto next = [&]() {
      if (!std::getline(ls, field, ',')) throw std::invalid_argument("parse_csv: short row");
      return field;
    };
    r.sweep_param = next();
    r.value = std::stod(next());
    r.mode = next();
    r.prefetcher = next();
    r.nf = std::stoi(next());
    r.mean_rmin = std::stod(next());
    r.stderr_rmin = std::stod(next());
    r.trials = std::stoi(next());
    r.failures = std::stoi(next());
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace fran
