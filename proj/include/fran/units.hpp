// units.hpp: rate units. Every public rate/capacity in this library is in
// bits per channel symbol. Internal math works in natural log; the two
// functions below are the only place where the ln <-> log2 conversion
// happens, so the base is handled exactly once.
#pragma once

#include <cmath>

namespace fran {

inline constexpr double kLn2 = 0.6931471805599453094172321214581766;

// nats -> bits. Single conversion point (with nats_from_bits) for the
// whole project; log-det helpers and the phi linearization call this.
inline double bits_from_nats(double nats) { return nats / kLn2; }

// bits -> nats, inverse of the above.
inline double nats_from_bits(double bits) { return bits * kLn2; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace fran
