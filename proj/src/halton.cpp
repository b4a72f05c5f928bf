#include "crashmle/halton.hpp"

#include <algorithm>
#include <cmath>

#include "crashmle/errors.hpp"
#include "crashmle/random.hpp"

namespace crashmle {

bool is_prime(unsigned n) {
  if (n < 2) return false;
  for (unsigned d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

std::vector<unsigned> first_primes(std::size_t count) {
  std::vector<unsigned> out;
  for (unsigned n = 2; out.size() < count; ++n) {
    if (is_prime(n)) out.push_back(n);
  }
  return out;
}

double radical_inverse(unsigned prime, std::uint64_t index) {
  const double inv = 1.0 / prime;
  double f = inv;
  double result = 0.0;
  while (index > 0) {
    result += f * static_cast<double>(index % prime);
    index /= prime;
    f *= inv;
  }
  return result;
}

std::vector<double> halton(unsigned prime, std::size_t count, std::size_t skip) {
  if (!is_prime(prime)) throw SpecError("halton: base " + std::to_string(prime) + " is not prime");
  if (count == 0) throw SpecError("halton: count must be positive");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = radical_inverse(prime, skip + k + 1);
  return out;
}

DrawMatrix::DrawMatrix(std::size_t n_obs, std::size_t draws, std::size_t dims, std::uint64_t seed,
                       const HaltonOptions& options)
    : n_obs_(n_obs), draws_(draws), seed_(seed), options_(options) {
  if (draws == 0) throw SpecError("draws: need at least one draw per observation");
  const auto primes = first_primes(dims);
  Rng rng(seed);
  for (std::size_t d = 0; d < dims; ++d) {
    const double shift = options.random_shift ? rng.uniform() : 0.0;
    auto seq = n_obs * draws == 0 ? std::vector<double>{} : halton(primes[d], n_obs * draws, options.skip);
    if (options.random_shift) {
      for (auto& u : seq) {
        u += shift;
        if (u >= 1.0) u -= 1.0;
        // Keep the open interval.
        u = std::clamp(u, 0x1.0p-53, 1.0 - 0x1.0p-53);
      }
    }
    u_.push_back(std::move(seq));
  }
}

double standardize_draw(double u, CoefKind dist) {
  switch (dist) {
    case CoefKind::random_normal: return normal_quantile(u);
    case CoefKind::random_uniform: return 2.0 * u - 1.0;
    case CoefKind::fixed: return 0.0;
  }
  return 0.0;
}

double transform_draw(double u, const MixingTerm& term) {
  return term.location + term.scale * standardize_draw(u, term.dist);
}

double sign_share(const MixingTerm& term) {
  if (!(term.scale > 0)) return term.location < 0 ? 1.0 : 0.0;
  if (term.dist == CoefKind::random_uniform) {
    return std::clamp((term.scale - term.location) / (2.0 * term.scale), 0.0, 1.0);
  }
  return normal_cdf(-term.location / term.scale);
}

double sign_share_uniform_sd_reading(double location, double sd) {
  return sign_share({CoefKind::random_uniform, location, sd * std::sqrt(3.0)});
}

}  // namespace crashmle
