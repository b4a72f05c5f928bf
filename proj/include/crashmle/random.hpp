#ifndef CRASHMLE_RANDOM_HPP
#define CRASHMLE_RANDOM_HPP

#include <cstdint>
#include <random>
#include <span>

namespace crashmle {

// Standard normal quantile and CDF.
[[nodiscard]] double normal_quantile(double p);
[[nodiscard]] double normal_cdf(double x);

// SplitMix64 finalizer; used to derive independent stream seeds.
[[nodiscard]] std::uint64_t mix64(std::uint64_t x);

/// Seeded generator built on std::mt19937_64, whose output sequence is fixed
/// by the C++ standard. All variates are derived here from raw 64-bit
/// words (no std:: distributions), so streams are identical across
/// platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}
  // Independent stream for (seed, index), e.g. one per Monte-Carlo replicate.
  [[nodiscard]] static Rng stream(std::uint64_t seed, std::uint64_t index) {
    return Rng(mix64(seed) ^ mix64(index + 0x5851F42D4C957F2DULL));
  }

  // Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  // Inverse-CDF normal.
  double normal() { return normal_quantile(uniform()); }
  bool bernoulli(double p) { return uniform() < p; }
  // Marsaglia-Tsang; shape < 1 handled by the U^(1/shape) boost.
  double gamma(double shape, double scale);
  // Multiplication method below mean 10, PTRS transformed rejection above.
  std::int64_t poisson(double mean);
  // Gamma-Poisson mixture with mean `mean` and variance mean(1 + alpha mean).
  std::int64_t negative_binomial(double mean, double alpha);
  // Index drawn from a probability vector (need not be normalized exactly).
  int categorical(std::span<const double> probs);

 private:
  std::mt19937_64 engine_;
};

}  // namespace crashmle

#endif  // CRASHMLE_RANDOM_HPP
