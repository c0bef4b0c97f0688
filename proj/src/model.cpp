#include "fran/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace fran {

int SystemConfig::total_errh_antennas() const {
  return std::accumulate(antennas_errh.begin(), antennas_errh.end(), 0);
}

int SystemConfig::total_ue_antennas() const {
  return std::accumulate(antennas_ue.begin(), antennas_ue.end(), 0);
}

int SystemConfig::antenna_offset(int errh) const {
  return std::accumulate(antennas_errh.begin(), antennas_errh.begin() + errh, 0);
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("SystemConfig: " + msg); };
  if (num_errh < 1 || num_ue < 1 || library_size < 1) fail("counts must be >= 1");
  if (static_cast<int>(antennas_errh.size()) != num_errh) fail("antennas_errh length");
  if (static_cast<int>(antennas_ue.size()) != num_ue) fail("antennas_ue length");
  for (int n : antennas_errh)
    if (n < 1) fail("eRRH antenna counts must be >= 1");
  for (int n : antennas_ue)
    if (n < 1) fail("UE antenna counts must be >= 1");
  if (!(file_size > 0.0)) fail("file_size must be > 0");
  if (!(zipf_exponent >= 0.0)) fail("zipf_exponent must be >= 0");
  if (static_cast<int>(fronthaul_capacity.size()) != num_errh) fail("fronthaul_capacity length");
  if (static_cast<int>(power_budget.size()) != num_errh) fail("power_budget length");
  if (static_cast<int>(fractional_cache.size()) != num_errh) fail("fractional_cache length");
  for (double c : fronthaul_capacity)
    if (!(c >= 0.0)) fail("fronthaul capacities must be >= 0");
  for (double p : power_budget)
    if (!(p > 0.0)) fail("power budgets must be > 0");
  for (double mu : fractional_cache)
    if (!(mu >= 0.0 && mu <= 1.0)) fail("fractional caches must be in [0,1]");
  if (!(noise_level > 0.0)) fail("noise_level must be > 0");
  if (!(cell_radius > 0.0) || !(pathloss_ref > 0.0)) fail("geometry constants must be > 0");
}

SystemConfig make_symmetric_config(int num_errh, int num_ue, int antennas,
                                   int library_size, double file_size,
                                   double zipf_exponent, double capacity,
                                   double power, double mu, double noise) {
  SystemConfig cfg;
  cfg.num_errh = num_errh;
  cfg.num_ue = num_ue;
  cfg.antennas_errh.assign(num_errh, antennas);
  cfg.antennas_ue.assign(num_ue, antennas);
  cfg.library_size = library_size;
  cfg.file_size = file_size;
  cfg.zipf_exponent = zipf_exponent;
  cfg.fronthaul_capacity.assign(num_errh, capacity);
  cfg.power_budget.assign(num_errh, power);
  cfg.fractional_cache.assign(num_errh, mu);
  cfg.noise_level = noise;
  cfg.validate();
  return cfg;
}

void SplitScheme::validate(double file_size) const {
  if (num_subfiles < 1 || static_cast<int>(subfile_sizes.size()) != num_subfiles)
    throw std::invalid_argument("SplitScheme: bad subfile count");
  double total = 0.0;
  for (double s : subfile_sizes) {
    if (!(s > 0.0)) throw std::invalid_argument("SplitScheme: zero-size subfile survived pruning");
    total += s;
  }
  if (std::abs(total - file_size) > 1e-12 * std::max(1.0, file_size))
    throw std::invalid_argument("SplitScheme: subfile sizes do not sum to S");
}

CacheState CacheState::zeros(int files, int subfiles, int errh) {
  CacheState c;
  c.num_files = files;
  c.num_subfiles = subfiles;
  c.num_errh = errh;
  c.data.assign(static_cast<std::size_t>(files) * subfiles * errh, 0);
  return c;
}

double CacheState::used_bits(int i, const SplitScheme& split) const {
  double used = 0.0;
  for (int f = 0; f < num_files; ++f)
    for (int l = 0; l < num_subfiles; ++l)
      if (cached(f, l, i)) used += split.subfile_sizes[l];
  return used;
}

void CacheState::validate(const SystemConfig& cfg, const SplitScheme& split) const {
  if (num_files != cfg.library_size || num_subfiles != split.num_subfiles ||
      num_errh != cfg.num_errh)
    throw std::invalid_argument("CacheState: dimension mismatch");
  for (int i = 0; i < num_errh; ++i) {
    double budget = cfg.fractional_cache[i] * cfg.library_size * cfg.file_size;
    if (used_bits(i, split) > budget + 1e-9 * std::max(1.0, budget))
      throw std::invalid_argument("CacheState: memory constraint violated at eRRH " +
                                  std::to_string(i));
  }
}

FronthaulAssignment FronthaulAssignment::zeros(int files, int subfiles, int errh) {
  FronthaulAssignment d;
  d.num_files = files;
  d.num_subfiles = subfiles;
  d.num_errh = errh;
  d.data.assign(static_cast<std::size_t>(files) * subfiles * errh, 0);
  return d;
}

void FronthaulAssignment::validate(const CacheState& cache) const {
  if (num_files != cache.num_files || num_subfiles != cache.num_subfiles ||
      num_errh != cache.num_errh)
    throw std::invalid_argument("FronthaulAssignment: dimension mismatch");
  for (int f = 0; f < num_files; ++f)
    for (int l = 0; l < num_subfiles; ++l)
      for (int i = 0; i < num_errh; ++i)
        if (transfer(f, l, i) && cache.cached(f, l, i))
          throw std::invalid_argument("FronthaulAssignment: transfer of cached subfile");
}

RequestProfile RequestProfile::from_requests(std::vector<int> f_k) {
  RequestProfile req;
  req.requested_file = std::move(f_k);
  std::set<int> uniq(req.requested_file.begin(), req.requested_file.end());
  req.requested_set.assign(uniq.begin(), uniq.end());
  return req;
}

Cmat ChannelRealization::block(int k, int i, const SystemConfig& cfg) const {
  return H[k].middleCols(cfg.antenna_offset(i), cfg.antennas_errh[i]);
}

void ChannelRealization::validate(const SystemConfig& cfg) const {
  if (static_cast<int>(H.size()) != cfg.num_ue)
    throw std::invalid_argument("ChannelRealization: UE count mismatch");
  for (int k = 0; k < cfg.num_ue; ++k) {
    if (H[k].rows() != cfg.antennas_ue[k] || H[k].cols() != cfg.total_errh_antennas())
      throw std::invalid_argument("ChannelRealization: H dimension mismatch");
    if (!H[k].allFinite())
      throw std::invalid_argument("ChannelRealization: non-finite entries");
  }
}

Rmat build_selector(int errh, const SystemConfig& cfg) {
  if (errh < 0 || errh >= cfg.num_errh)
    throw std::out_of_range("build_selector: eRRH index out of range");
  const int n_r = cfg.total_errh_antennas();
  const int n_i = cfg.antennas_errh[errh];
  Rmat e = Rmat::Zero(n_r, n_i);
  e.middleRows(cfg.antenna_offset(errh), n_i).setIdentity();
  return e;
}

const char* to_string(TransferMode mode) {
  switch (mode) {
    case TransferMode::kHard: return "hard";
    case TransferMode::kSoft: return "soft";
    case TransferMode::kHybrid: return "hybrid";
  }
  return "?";
}

TransferMode transfer_mode_from_string(const std::string& name) {
  if (name == "hard") return TransferMode::kHard;
  if (name == "soft") return TransferMode::kSoft;
  if (name == "hybrid") return TransferMode::kHybrid;
  throw std::invalid_argument("unknown transfer mode: " + name);
}

SubfileIndex SubfileIndex::build(const RequestProfile& req, const SplitScheme& split) {
  SubfileIndex idx;
  for (int f : req.requested_set)
    for (int l = 0; l < split.num_subfiles; ++l) idx.items.emplace_back(f, l);
  return idx;
}

int SubfileIndex::find(int f, int l) const {
  for (int s = 0; s < size(); ++s)
    if (items[s].first == f && items[s].second == l) return s;
  return -1;
}

void DeliverySolution::check_invariants(const SystemConfig& cfg,
                                        const SplitScheme& split) const {
  auto fail = [](const std::string& msg) { throw std::runtime_error("DeliverySolution: " + msg); };
  const int n_sub = subfiles.size();
  if (static_cast<int>(covariances.size()) != n_sub || static_cast<int>(rates.size()) != n_sub)
    fail("per-subfile arrays inconsistent");
  const int n_r = cfg.total_errh_antennas();
  for (int s = 0; s < n_sub; ++s) {
    if (covariances[s].rows() != n_r || covariances[s].cols() != n_r) fail("W dimension");
    if (!is_hermitian(covariances[s]) || !is_psd(covariances[s])) fail("W not Hermitian PSD");
    if (rates[s] > split.subfile_sizes[subfiles.items[s].second] + 1e-9) fail("R_{f,l} > S_l");
    if (rates[s] < -1e-12) fail("negative subfile rate");
  }
  if (mode != TransferMode::kHard) {
    if (static_cast<int>(quant_covariances.size()) != cfg.num_errh) fail("Omega count");
    for (int i = 0; i < cfg.num_errh; ++i) {
      const Cmat& om = quant_covariances[i];
      if (om.rows() == 0) continue;
      if (om.rows() != cfg.antennas_errh[i]) fail("Omega dimension");
      if (!is_hermitian(om) || !is_psd(om)) fail("Omega not Hermitian PSD");
    }
  }
  // R_min <= sum_l R_{f,l} for every requested file.
  for (std::size_t s = 0; s < covariances.size();) {
    int f = subfiles.items[s].first;
    double sum = 0.0;
    while (s < covariances.size() && subfiles.items[s].first == f) sum += rates[s++];
    if (min_rate > sum + 1e-9) fail("R_min exceeds a file rate");
  }
  for (std::size_t t = 1; t < trace.size(); ++t)
    if (trace[t] < trace[t - 1] - 1e-8) fail("non-monotone R_min trace");
}

}  // namespace fran
