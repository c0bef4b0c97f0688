#include "fran/scenario.hpp"

#include <cmath>
#include <stdexcept>

namespace fran {

void Popularity::validate() const {
  if (pmf.empty()) throw std::invalid_argument("Popularity: empty pmf");
  double total = 0.0;
  for (std::size_t f = 0; f < pmf.size(); ++f) {
    if (!(pmf[f] >= 0.0)) throw std::invalid_argument("Popularity: negative mass");
    if (f > 0 && pmf[f] > pmf[f - 1] + 1e-15)
      throw std::invalid_argument("Popularity: not non-increasing");
    total += pmf[f];
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("Popularity: not normalized");
}

Popularity zipf_pmf(int library_size, double zipf_exponent) {
  if (library_size < 1) throw std::invalid_argument("zipf_pmf: empty library");
  if (zipf_exponent < 0.0) throw std::invalid_argument("zipf_pmf: negative exponent");
  Popularity pop;
  pop.pmf.resize(library_size);
  double norm = 0.0;
  for (int f = 0; f < library_size; ++f) {
    pop.pmf[f] = std::pow(static_cast<double>(f + 1), -zipf_exponent);
    norm += pop.pmf[f];
  }
  for (double& p : pop.pmf) p /= norm;
  return pop;
}

RequestProfile sample_requests(const Popularity& pop, int num_ue, Philox& rng) {
  std::vector<int> f_k(num_ue);
  const int last = static_cast<int>(pop.pmf.size()) - 1;
  for (int k = 0; k < num_ue; ++k) {
    double u = rng.next_double();
    double acc = 0.0;
    int pick = last;  // inverse cdf; the tail absorbs rounding
    for (int f = 0; f <= last; ++f) {
      acc += pop.pmf[f];
      if (u < acc) {
        pick = f;
        break;
      }
    }
    f_k[k] = pick;
  }
  return RequestProfile::from_requests(std::move(f_k));
}

Positions sample_geometry(const SystemConfig& cfg, Philox& rng) {
  if (!(cfg.cell_radius > 0.0)) throw std::invalid_argument("sample_geometry: bad radius");
  auto draw = [&rng, &cfg]() -> std::array<double, 2> {
    double r = cfg.cell_radius * std::sqrt(rng.next_double());
    double th = 6.283185307179586476925286766559 * rng.next_double();
    return {r * std::cos(th), r * std::sin(th)};
  };
  Positions pos;
  pos.errh.resize(cfg.num_errh);
  pos.ue.resize(cfg.num_ue);
  for (auto& p : pos.errh) p = draw();
  for (auto& p : pos.ue) p = draw();
  return pos;
}

double pathloss(double distance, double d0, double alpha) {
  if (distance < 0.0 || !(d0 > 0.0)) throw std::invalid_argument("pathloss: bad arguments");
  return 1.0 / (1.0 + std::pow(distance / d0, alpha));
}

ChannelRealization sample_channel(const SystemConfig& cfg, const Positions& positions,
                                  Philox& rng) {
  ChannelRealization chan;
  chan.positions = positions;
  chan.H.resize(cfg.num_ue);
  const int n_r = cfg.total_errh_antennas();
  for (int k = 0; k < cfg.num_ue; ++k) {
    chan.H[k].resize(cfg.antennas_ue[k], n_r);
    for (int i = 0; i < cfg.num_errh; ++i) {
      double dx = positions.ue[k][0] - positions.errh[i][0];
      double dy = positions.ue[k][1] - positions.errh[i][1];
      double rho = pathloss(std::hypot(dx, dy), cfg.pathloss_ref, cfg.pathloss_exp);
      double scale = std::sqrt(rho);
      const int off = cfg.antenna_offset(i);
      for (int r = 0; r < cfg.antennas_ue[k]; ++r)
        for (int c = 0; c < cfg.antennas_errh[i]; ++c) {
          // CN(0,1): two real normals of variance 1/2 each.
          auto [re, im] = rng.next_normal_pair();
          chan.H[k](r, off + c) =
              scale * std::complex<double>(re * M_SQRT1_2, im * M_SQRT1_2);
        }
    }
  }
  chan.validate(cfg);
  return chan;
}

}  // namespace fran
