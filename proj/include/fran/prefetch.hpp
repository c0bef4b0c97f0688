// prefetch.hpp: baseline cache pre-fetching policies. Each policy returns a
// (SplitScheme, CacheState) pair satisfying the per-eRRH memory constraint;
// zero-size subfiles are pruned before returning.
#pragma once

#include "fran/model.hpp"
#include "fran/rng.hpp"

namespace fran {

struct PrefetchResult {
  SplitScheme split;
  CacheState cache;
};

// Cache Most Popular: every eRRH stores the floor(mu*F) most popular files
// whole (L = 1). Requires equal mu across eRRHs.
PrefetchResult prefetch_cmp(const SystemConfig& cfg);

// Cache Distinct: eRRH i stores files with index residue i (mod N_R), most
// popular first, up to floor(mu*F) files (L = 1).
PrefetchResult prefetch_cd(const SystemConfig& cfg);

// Fractional Cache Distinct. mu <= 1/N_R: each file splits into N_R cached
// fragments of size mu*S (one random eRRH each, without replacement) plus
// one uncached remainder. mu > 1/N_R: N_R equal fragments, caches filled in
// floor(mu*N_R) rounds of per-file random permutations, resampling any
// permutation that would duplicate a fragment at an eRRH.
PrefetchResult prefetch_fcd(const SystemConfig& cfg, Philox& rng);

enum class Prefetcher { kCmp, kCd, kFcd, kNone, kFull };

const char* to_string(Prefetcher p);
Prefetcher prefetcher_from_string(const std::string& name);

// Dispatch; kNone/kFull run CMP with mu forced to 0/1.
PrefetchResult apply_prefetch(Prefetcher policy, const SystemConfig& cfg, Philox& rng);

// eRRHs holding subfile (f,l) after fronthaul transfer: {i : c=1 or d=1}.
std::vector<int> availability(const CacheState& cache, const FronthaulAssignment& assign,
                              int f, int l);

// floor with a 1e-9 absolute nudge so exact rational products like
// (1/3)*3 survive double rounding.
int floor_count(double x);

}  // namespace fran
