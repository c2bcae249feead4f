#include "hytop/geometry.hpp"

#include <cmath>

namespace hytop {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> stream) {
  std::uint64_t h = mix_seed(base);
  for (std::uint64_t s : stream) h = mix_seed(h ^ mix_seed(s + 0x632be59bd9b4e019ULL));
  return h;
}

Vec random_direction(int dimension, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v = Vec::Zero();
  double n2 = 0.0;
  while (n2 < 1e-24) {
    for (int k = 0; k < dimension; ++k) v[k] = normal(rng);
    n2 = v.squaredNorm();
  }
  return v / std::sqrt(n2);
}

Vec sample_in_ball(const Vec& center, double radius, int dimension, Rng& rng) {
  if (radius <= 0.0) return center;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::pow(unit(rng), 1.0 / dimension);
  return center + r * random_direction(dimension, rng);
}

}  // namespace hytop
