#ifndef CRASHMLE_HALTON_HPP
#define CRASHMLE_HALTON_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "crashmle/model_spec.hpp"

namespace crashmle {

[[nodiscard]] bool is_prime(unsigned n);
// First `count` primes: 2, 3, 5, ...
[[nodiscard]] std::vector<unsigned> first_primes(std::size_t count);

// Radical inverse of `index` (>= 1) in base `prime`.
[[nodiscard]] double radical_inverse(unsigned prime, std::uint64_t index);

// Halton sequence in base `prime`, element k being radical_inverse(k + 1);
// the first `skip` elements are discarded. Throws SpecError for a non-prime
// base or count == 0.
std::vector<double> halton(unsigned prime, std::size_t count, std::size_t skip);

struct HaltonOptions {
  std::size_t skip = 10;
  // Cranley-Patterson rotation: add a seed-derived offset per dimension
  // modulo 1.
  bool random_shift = false;
};

/// Uniform base draws for simulated likelihood: one Halton dimension per
/// random term (bases 2, 3, 5, ...). Observation n uses sequence elements
/// n*R .. n*R + R - 1 after the skip, so no two observations share draws.
class DrawMatrix {
 public:
  DrawMatrix(std::size_t n_obs, std::size_t draws, std::size_t dims, std::uint64_t seed,
             const HaltonOptions& options = {});

  [[nodiscard]] std::size_t n_obs() const { return n_obs_; }
  [[nodiscard]] std::size_t draws() const { return draws_; }
  [[nodiscard]] std::size_t dims() const { return u_.size(); }
  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] const HaltonOptions& options() const { return options_; }

  [[nodiscard]] double uniform(std::size_t dim, std::size_t obs, std::size_t r) const {
    return u_[dim][obs * draws_ + r];
  }
  [[nodiscard]] std::span<const double> block(std::size_t dim, std::size_t obs) const {
    return std::span<const double>(u_[dim]).subspan(obs * draws_, draws_);
  }

 private:
  std::size_t n_obs_;
  std::size_t draws_;
  std::uint64_t seed_;
  HaltonOptions options_;
  std::vector<std::vector<double>> u_;
};

/// Mixing distribution of one random coefficient. `scale` is the standard
/// deviation (normal) or the half-width of [location - scale, location + scale]
/// (uniform).
struct MixingTerm {
  CoefKind dist = CoefKind::random_normal;
  double location = 0.0;
  double scale = 0.0;
};

// Standardized draw: Phi^-1(u) for normal, 2u - 1 for uniform.
[[nodiscard]] double standardize_draw(double u, CoefKind dist);
// location + scale * standardize_draw(u).
[[nodiscard]] double transform_draw(double u, const MixingTerm& term);

// Population share with a negative coefficient.
[[nodiscard]] double sign_share(const MixingTerm& term);

// A uniform term read the other way: `scale` taken as the true standard
// deviation, so the half-width is scale * sqrt(3).
[[nodiscard]] double sign_share_uniform_sd_reading(double location, double sd);

}  // namespace crashmle

#endif  // CRASHMLE_HALTON_HPP
