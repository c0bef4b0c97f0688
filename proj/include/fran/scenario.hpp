// scenario.hpp: random problem instance generation: Zipf popularity, UE
// requests, node geometry on a disc, pathloss and Rayleigh fading. All
// sampling is pure given (cfg, rng) and bit-exactly reproducible.
#pragma once

#include "fran/model.hpp"
#include "fran/rng.hpp"

namespace fran {

// File popularity pmf, non-increasing in the file index.
struct Popularity {
  std::vector<double> pmf;

  void validate() const;
};

// P(f) = c * (f+1)^{-gamma} with c normalizing the library to 1.
Popularity zipf_pmf(int library_size, double zipf_exponent);

// Draw one requested file per UE, iid from the popularity pmf.
RequestProfile sample_requests(const Popularity& pop, int num_ue, Philox& rng);

// eRRH and UE positions uniform on the disc of cfg.cell_radius (polar with
// sqrt-radius sampling). eRRHs are drawn first, then UEs.
Positions sample_geometry(const SystemConfig& cfg, Philox& rng);

// rho = 1 / (1 + (d/d0)^alpha); finite at d = 0.
double pathloss(double distance, double d0, double alpha);

// H_{k,i} = sqrt(rho_{k,i}) * Htilde with iid CN(0,1) entries.
ChannelRealization sample_channel(const SystemConfig& cfg, const Positions& positions,
                                  Philox& rng);

}  // namespace fran
