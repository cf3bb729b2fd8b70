#include "opttomo/random.hpp"

#include <cmath>

#include "opttomo/errors.hpp"

namespace opttomo {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

StreamRng::StreamRng(std::uint64_t seed, std::uint64_t stream) {
  // Two mixing rounds decorrelate adjacent stream ids under any seed.
  state_ = seed ^ 0x6a09e667f3bcc909ULL;
  (void)splitmix64(state_);
  state_ ^= stream * 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL;
  (void)splitmix64(state_);
}

std::uint64_t StreamRng::next_u64() { return splitmix64(state_); }

double StreamRng::uniform01() {
  // 53-bit mantissa, shifted into (0, 1) so log() stays finite.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t StreamRng::poisson(double lambda) {
  if (!(lambda >= 0.0))
    fail(errc::numeric_failure, "poisson rate must be non-negative");
  if (lambda == 0.0) return 0;

  if (lambda < 30.0) {
    // Knuth product-of-uniforms, exact for small rates.
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform01();
    } while (p > limit);
    return k - 1;
  }

  // Hormann's PTRS transformed rejection for large rates.
  const double slam = std::sqrt(lambda);
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = uniform01() - 0.5;
    double v = uniform01();
    double us = 0.5 - std::fabs(u);
    double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        kf * loglam - lambda - std::lgamma(kf + 1.0)) {
      return static_cast<std::uint64_t>(kf);
    }
  }
}

}  // namespace opttomo
