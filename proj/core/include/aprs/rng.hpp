#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace aprs {

/// Seedable generator with fully specified draws, so a seed reproduces the
/// same stream on every platform and standard library:
///
///   engine    std::mt19937_64 (output sequence fixed by the C++ standard),
///             seeded with SplitMix64(seed ^ golden * (stream + 1))
///   uniform   top 53 bits of one engine output, scaled to [0, 1)
///   normal    Marsaglia polar method, second variate cached
///   gamma     Marsaglia-Tsang squeeze; shape < 1 via Gamma(shape+1) * U^(1/shape)
///   beta      X / (X + Y) with X ~ Gamma(a), Y ~ Gamma(b)
///
/// The <random> distributions are avoided because their algorithms are
/// implementation-defined.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double gamma(double shape);
  double beta(double a, double b);
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace aprs
