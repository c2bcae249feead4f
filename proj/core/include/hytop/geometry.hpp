#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Core>

namespace hytop {

/// Positions are always stored with three components; planar scenarios keep z = 0.
using Vec = Eigen::Vector3d;
using Rng = std::mt19937_64;

/// splitmix64 finaliser, used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> stream);

/// Uniform sample from the closed ball of `radius` around `center` in the
/// first `dimension` coordinates (2 or 3).
Vec sample_in_ball(const Vec& center, double radius, int dimension, Rng& rng);

/// Uniform random unit vector in the first `dimension` coordinates.
Vec random_direction(int dimension, Rng& rng);

inline double distance(const Vec& a, const Vec& b) { return (a - b).norm(); }

}  // namespace hytop
