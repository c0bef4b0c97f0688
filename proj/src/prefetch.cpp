#include "fran/prefetch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fran {

namespace {

double common_mu(const SystemConfig& cfg) {
  double mu = cfg.fractional_cache[0];
  for (double m : cfg.fractional_cache)
    if (std::abs(m - mu) > 1e-12)
      throw std::invalid_argument("prefetch policies require equal mu across eRRHs");
  return mu;
}

// Drop zero-size subfiles and remap the cache tensor accordingly.
PrefetchResult prune_zero_subfiles(const SystemConfig& cfg, SplitScheme split,
                                   CacheState cache) {
  std::vector<int> keep;
  for (int l = 0; l < split.num_subfiles; ++l)
    if (split.subfile_sizes[l] > 1e-12 * cfg.file_size) keep.push_back(l);
  if (static_cast<int>(keep.size()) == split.num_subfiles) {
    split.validate(cfg.file_size);
    cache.validate(cfg, split);
    return {std::move(split), std::move(cache)};
  }
  if (keep.empty())
    throw std::logic_error("prefetch: all subfiles empty");
  SplitScheme pruned;
  pruned.num_subfiles = static_cast<int>(keep.size());
  for (int l : keep) pruned.subfile_sizes.push_back(split.subfile_sizes[l]);
  CacheState pc = CacheState::zeros(cfg.library_size, pruned.num_subfiles, cfg.num_errh);
  for (int f = 0; f < cfg.library_size; ++f)
    for (std::size_t nl = 0; nl < keep.size(); ++nl)
      for (int i = 0; i < cfg.num_errh; ++i)
        pc.set(f, static_cast<int>(nl), i, cache.cached(f, keep[nl], i));
  pruned.validate(cfg.file_size);
  pc.validate(cfg, pruned);
  return {std::move(pruned), std::move(pc)};
}

std::vector<int> random_permutation(int n, Philox& rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (int j = n - 1; j > 0; --j) {
    int pick = static_cast<int>(rng.next_double() * (j + 1));
    if (pick > j) pick = j;
    std::swap(perm[j], perm[pick]);
  }
  return perm;
}

}  // namespace

int floor_count(double x) { return static_cast<int>(std::floor(x + 1e-9)); }

PrefetchResult prefetch_cmp(const SystemConfig& cfg) {
  double mu = common_mu(cfg);
  int n_c = floor_count(mu * cfg.library_size);
  SplitScheme split{1, {cfg.file_size}};
  CacheState cache = CacheState::zeros(cfg.library_size, 1, cfg.num_errh);
  for (int f = 0; f < std::min(n_c, cfg.library_size); ++f)
    for (int i = 0; i < cfg.num_errh; ++i) cache.set(f, 0, i, true);
  return prune_zero_subfiles(cfg, std::move(split), std::move(cache));
}

PrefetchResult prefetch_cd(const SystemConfig& cfg) {
  double mu = common_mu(cfg);
  int n_c = floor_count(mu * cfg.library_size);
  SplitScheme split{1, {cfg.file_size}};
  CacheState cache = CacheState::zeros(cfg.library_size, 1, cfg.num_errh);
  std::vector<int> stored(cfg.num_errh, 0);
  for (int f = 0; f < cfg.library_size; ++f) {
    int i = f % cfg.num_errh;
    if (stored[i] < n_c) {
      cache.set(f, 0, i, true);
      ++stored[i];
    }
  }
  return prune_zero_subfiles(cfg, std::move(split), std::move(cache));
}

PrefetchResult prefetch_fcd(const SystemConfig& cfg, Philox& rng) {
  double mu = common_mu(cfg);
  const int n_r = cfg.num_errh;
  const double s = cfg.file_size;
  if (mu <= 1.0 / n_r + 1e-12) {
    // Partial caching: N_R cached fragments of size mu*S plus an uncached
    // remainder of size (1 - N_R*mu)*S.
    SplitScheme split;
    split.num_subfiles = n_r + 1;
    split.subfile_sizes.assign(n_r, mu * s);
    split.subfile_sizes.push_back(std::max(0.0, (1.0 - n_r * mu) * s));
    CacheState cache = CacheState::zeros(cfg.library_size, n_r + 1, n_r);
    for (int f = 0; f < cfg.library_size; ++f) {
      std::vector<int> perm = random_permutation(n_r, rng);
      for (int l = 0; l < n_r; ++l) cache.set(f, l, perm[l], true);
    }
    return prune_zero_subfiles(cfg, std::move(split), std::move(cache));
  }
  // Redundant caching: N_R equal fragments, floor(mu*N_R) permutation rounds.
  const int rounds = std::min(floor_count(mu * n_r), n_r);
  SplitScheme split;
  split.num_subfiles = n_r;
  split.subfile_sizes.assign(n_r, s / n_r);
  CacheState cache = CacheState::zeros(cfg.library_size, n_r, n_r);
  for (int f = 0; f < cfg.library_size; ++f) {
    for (int round = 0; round < rounds; ++round) {
      for (int attempt = 0;; ++attempt) {
        if (attempt > 100000)
          throw std::runtime_error("prefetch_fcd: permutation sampling stuck");
        std::vector<int> perm = random_permutation(n_r, rng);
        bool duplicate = false;
        for (int l = 0; l < n_r && !duplicate; ++l)
          duplicate = cache.cached(f, l, perm[l]);
        if (!duplicate) {
          for (int l = 0; l < n_r; ++l) cache.set(f, l, perm[l], true);
          break;
        }
      }
    }
  }
  return prune_zero_subfiles(cfg, std::move(split), std::move(cache));
}

const char* to_string(Prefetcher p) {
  switch (p) {
    case Prefetcher::kCmp: return "cmp";
    case Prefetcher::kCd: return "cd";
    case Prefetcher::kFcd: return "fcd";
    case Prefetcher::kNone: return "none";
    case Prefetcher::kFull: return "full";
  }
  return "?";
}

Prefetcher prefetcher_from_string(const std::string& name) {
  if (name == "cmp") return Prefetcher::kCmp;
  if (name == "cd") return Prefetcher::kCd;
  if (name == "fcd") return Prefetcher::kFcd;
  if (name == "none") return Prefetcher::kNone;
  if (name == "full") return Prefetcher::kFull;
  throw std::invalid_argument("unknown prefetcher: " + name);
}

PrefetchResult apply_prefetch(Prefetcher policy, const SystemConfig& cfg, Philox& rng) {
  switch (policy) {
    case Prefetcher::kCmp: return prefetch_cmp(cfg);
    case Prefetcher::kCd: return prefetch_cd(cfg);
    case Prefetcher::kFcd: return prefetch_fcd(cfg, rng);
    case Prefetcher::kNone: {
      SystemConfig c = cfg;
      c.fractional_cache.assign(cfg.num_errh, 0.0);
      return prefetch_cmp(c);
    }
    case Prefetcher::kFull: {
      SystemConfig c = cfg;
      c.fractional_cache.assign(cfg.num_errh, 1.0);
      return prefetch_cmp(c);
    }
  }
  throw std::logic_error("apply_prefetch: bad policy");
}

std::vector<int> availability(const CacheState& cache, const FronthaulAssignment& assign,
                              int f, int l) {
  std::vector<int> where;
  for (int i = 0; i < cache.num_errh; ++i)
    if (cache.cached(f, l, i) || assign.transfer(f, l, i)) where.push_back(i);
  return where;
}

}  // namespace fran
