// sweep.hpp: Monte Carlo harness. run_trial draws one full instance
// (geometry, fading, requests, cache) from a seed and optimizes the delivery
// phase; run_sweep fans trials out over a parameter grid, serially or with
// OpenMP, reducing in grid order so results are bit-identical either way.
#pragma once

#include <cstdint>
#include <string>

#include "fran/cccp.hpp"
#include "fran/prefetch.hpp"

namespace fran {

enum class SweepParam { kGamma, kMu, kC, kS, kSnr };

const char* to_string(SweepParam p);
SweepParam sweep_param_from_string(const std::string& name);

struct ModeSpec {
  TransferMode mode = TransferMode::kSoft;
  int nf = -1;  // N_F for hard/hybrid; -1 for soft
};

struct SweepSpec {
  SweepParam param = SweepParam::kGamma;
  std::vector<double> grid;
  SystemConfig base;
  std::vector<ModeSpec> modes;
  std::vector<Prefetcher> prefetchers;
  int trials = 20;
  std::uint64_t base_seed = 1;
  CccpSettings settings;

  void validate() const;
};

struct ResultRow {
  std::string sweep_param;
  std::string mode;
  std::string prefetcher;
  double value = 0.0;
  int nf = -1;
  double mean_rmin = 0.0;
  double stderr_rmin = 0.0;
  int trials = 0;
  int failures = 0;
};

// Applies one grid value to a config copy (gamma, mu, C, S or P/N_0 in dB).
SystemConfig apply_sweep_value(const SystemConfig& base, SweepParam param, double value);

// Deterministic per-trial seed: hash of (base, grid value, mode, prefetcher,
// trial); independent of grid order.
std::uint64_t trial_seed(std::uint64_t base, double value, const ModeSpec& mode,
                         Prefetcher prefetcher, int trial);

struct TrialResult {
  double min_rate = 0.0;
  bool ok = false;
  std::string note;
};

// One full Monte Carlo trial; returns the post-truncation exact R_min.
// Solver failures are reported in the result, not thrown.
TrialResult run_trial(const SystemConfig& cfg, const ModeSpec& mode, Prefetcher prefetcher,
                      std::uint64_t seed, const CccpSettings& settings,
                      DeliverySolution* solution_out = nullptr,
                      ProblemInstance* instance_out = nullptr);

// Grid x modes x prefetchers x trials; threads > 1 uses OpenMP over trials.
std::vector<ResultRow> run_sweep(const SweepSpec& spec, int threads = 1);

// CSV schema: sweep_param,value,mode,prefetcher,nf,mean_rmin,stderr,trials,
// failures with 9-significant-digit floats.
std::string emit_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);

}  // namespace fran
