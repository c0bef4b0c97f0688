// config_io.hpp: flat key-value config files with [section] headers.
//
//   # comment
//   [system]
//   num_errh = 3
//   fronthaul_capacity = 0.5         # scalar applies to every eRRH
//   antennas_errh = 1, 1, 2          # or one value per eRRH
//   [sweep]
//   sweep_param = gamma
//   grid = 0.1, 0.5, 1, 2
//   modes = soft, hard, hybrid
//   nf_list = 1, 2
//   prefetchers = cmp, cd
//   trials = 20
//   base_seed = 1
//   [solve]
//   mode = soft
//   prefetcher = fcd
//   nf = 2
//   seed = 7
//
// SystemConfig keys are named exactly after their fields (num_errh, num_ue,
// antennas_errh, antennas_ue, library_size, file_size, zipf_exponent,
// fronthaul_capacity, power_budget, fractional_cache, noise_level,
// cell_radius, pathloss_ref, pathloss_exp). An optional [cccp] section sets
// max_outer_iters, rel_improvement_tol, restarts.
#pragma once

#include <map>
#include <string>

#include "fran/sweep.hpp"

namespace fran {

using ConfigDoc = std::map<std::string, std::map<std::string, std::string>>;

ConfigDoc parse_config(const std::string& text);
ConfigDoc parse_config_file(const std::string& path);

// Paper-scale defaults: N_R = N_U = 3 single-antenna nodes, 500 m cell,
// d_0 = 50 m, alpha = 3, N_0 = 1, P/N_0 = 20 dB, F = 3, S = 1, mu = 1/3.
SystemConfig desk_default_config();

SystemConfig system_from_config(const ConfigDoc& doc);
CccpSettings cccp_from_config(const ConfigDoc& doc);
SweepSpec sweep_from_config(const ConfigDoc& doc);

struct SolveCase {
  TransferMode mode = TransferMode::kSoft;
  Prefetcher prefetcher = Prefetcher::kCmp;
  int nf = -1;
  std::uint64_t seed = 1;
};

SolveCase solve_case_from_config(const ConfigDoc& doc);

}  // namespace fran
