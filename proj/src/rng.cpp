#include "ragg/rng.hpp"

#include <cmath>

namespace ragg {

double stream_normal(std::uint64_t seed, std::uint64_t index) {
  const double u1 = stream_uniform01(seed, 2 * index);
  const double u2 = stream_uniform01(seed, 2 * index + 1);
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

}  // namespace ragg
