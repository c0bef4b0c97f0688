// model.hpp: shared data model for the F-RAN delivery optimizer: scenario
// configuration, file splitting, caches, requests, channels, fronthaul
// assignments and delivery solutions. All objects are immutable value types
// after construction and safe to share across threads.
//
// Indexing: everything in this codebase is 0-based (files, subfiles, eRRHs,
// UEs); this comment is the single place where that convention is fixed.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fran/linalg.hpp"

namespace fran {

// Full scenario parameter set. Rates and capacities are bits per symbol,
// powers are linear (noise covariance is noise_level * I).
struct SystemConfig {
  int num_errh = 0;  // N_R
  int num_ue = 0;    // N_U
  std::vector<int> antennas_errh;          // n_{R,i}, length N_R
  std::vector<int> antennas_ue;            // n_{U,k}, length N_U
  int library_size = 0;                    // F
  double file_size = 1.0;                  // S
  double zipf_exponent = 0.0;              // gamma >= 0
  std::vector<double> fronthaul_capacity;  // C_i, length N_R
  std::vector<double> power_budget;        // P_i, length N_R
  std::vector<double> fractional_cache;    // mu_i in [0,1], length N_R
  double noise_level = 1.0;                // N_0
  double cell_radius = 500.0;              // meters
  double pathloss_ref = 50.0;              // d_0, meters
  double pathloss_exp = 3.0;               // alpha

  int total_errh_antennas() const;         // n_R
  int total_ue_antennas() const;           // n_U
  int antenna_offset(int errh) const;      // first stacked row of eRRH errh
  void validate() const;                   // throws std::invalid_argument
};

// Symmetric helper used by the CLI and tests: every eRRH/UE identical.
SystemConfig make_symmetric_config(int num_errh, int num_ue, int antennas,
                                   int library_size, double file_size,
                                   double zipf_exponent, double capacity,
                                   double power, double mu, double noise);

// File splitting: sum of subfile sizes equals the file size; zero-size
// subfiles are pruned at construction time by the prefetch policies.
struct SplitScheme {
  int num_subfiles = 1;               // L
  std::vector<double> subfile_sizes;  // S_l, length L

  void validate(double file_size) const;
};

// Binary caching tensor c_{f,l}^i.
struct CacheState {
  int num_files = 0, num_subfiles = 0, num_errh = 0;
  std::vector<std::uint8_t> data;  // (f, l, i) row-major

  static CacheState zeros(int files, int subfiles, int errh);
  bool cached(int f, int l, int i) const {
    return data[(static_cast<std::size_t>(f) * num_subfiles + l) * num_errh + i] != 0;
  }
  void set(int f, int l, int i, bool v) {
    data[(static_cast<std::size_t>(f) * num_subfiles + l) * num_errh + i] = v ? 1 : 0;
  }
  // Cached bits at eRRH i, to compare against mu_i * F * S.
  double used_bits(int i, const SplitScheme& split) const;
  // Throws if the memory constraint is violated at any eRRH.
  void validate(const SystemConfig& cfg, const SplitScheme& split) const;
};

// Binary fronthaul transfer tensor d_{f,l}^i; zero wherever c_{f,l}^i = 1.
struct FronthaulAssignment {
  int num_files = 0, num_subfiles = 0, num_errh = 0;
  std::vector<std::uint8_t> data;

  static FronthaulAssignment zeros(int files, int subfiles, int errh);
  bool transfer(int f, int l, int i) const {
    return data[(static_cast<std::size_t>(f) * num_subfiles + l) * num_errh + i] != 0;
  }
  void set(int f, int l, int i, bool v) {
    data[(static_cast<std::size_t>(f) * num_subfiles + l) * num_errh + i] = v ? 1 : 0;
  }
  void validate(const CacheState& cache) const;
};

// Requested file per UE plus the de-duplicated requested set.
struct RequestProfile {
  std::vector<int> requested_file;  // f_k per UE
  std::vector<int> requested_set;   // sorted unique

  static RequestProfile from_requests(std::vector<int> f_k);
};

struct Positions {
  std::vector<std::array<double, 2>> errh;
  std::vector<std::array<double, 2>> ue;
};

// Flat-fading channel; H[k] is the stacked n_{U,k} x n_R matrix
// [H_{k,0} ... H_{k,N_R-1}].
struct ChannelRealization {
  std::vector<Cmat> H;
  Positions positions;

  // n_{U,k} x n_{R,i} block of UE k's stacked channel.
  Cmat block(int k, int i, const SystemConfig& cfg) const;
  void validate(const SystemConfig& cfg) const;
};

// Selector matrix E_i (n_R x n_{R,i}, real 0/1): identity block at eRRH i's
// antenna rows, zero elsewhere. E_i' E_i = I and sum_i E_i E_i' = I.
Rmat build_selector(int errh, const SystemConfig& cfg);

enum class TransferMode { kHard, kSoft, kHybrid };

const char* to_string(TransferMode mode);
TransferMode transfer_mode_from_string(const std::string& name);

// Index of requested subfiles (f, l), f in the requested set, l in 0..L-1;
// transmit covariances and rate variables are aligned to this order.
struct SubfileIndex {
  std::vector<std::pair<int, int>> items;  // (file, subfile)

  static SubfileIndex build(const RequestProfile& req, const SplitScheme& split);
  int size() const { return static_cast<int>(items.size()); }
  int find(int f, int l) const;  // -1 if absent
};

// Output of a delivery optimization run.
struct DeliverySolution {
  TransferMode mode = TransferMode::kHard;
  SubfileIndex subfiles;
  std::vector<Cmat> covariances;        // W_{f,l}, n_R x n_R, per subfile
  std::vector<Cmat> quant_covariances;  // Omega_i per eRRH; 0x0 when absent
  std::vector<double> rates;            // R_{f,l}, bits/symbol
  double min_rate = 0.0;                // R_min, bits/symbol
  std::vector<Cmat> precoders;          // V_{f,l}, n_R x n_S (post-extraction)
  std::vector<double> soft_budget;      // C~_i (hybrid); empty otherwise
  std::vector<double> trace;            // exact R_min per outer iteration
  double relaxed_min_rate = 0.0;        // R_min before rank truncation
  bool solver_ok = true;
  std::string status_note;

  // Shape and invariant checks (R <= S_l, R_min <= sum, PSD, trace
  // monotonicity up to 1e-8); throws std::runtime_error on violation.
  void check_invariants(const SystemConfig& cfg, const SplitScheme& split) const;
};

// Everything that defines one delivery-phase problem instance.
struct ProblemInstance {
  SystemConfig cfg;
  SplitScheme split;
  CacheState cache;
  RequestProfile req;
  ChannelRealization chan;
  FronthaulAssignment assign;
};

}  // namespace fran
