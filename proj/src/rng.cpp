#include "sagsim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace sagsim::rng {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

Stream Stream::for_trial(std::uint64_t master_seed, std::uint64_t setting,
                         std::uint64_t repetition) {
  std::uint64_t key = mix64(master_seed);
  key = mix64(key ^ (0x53455454ull + setting));
  key = mix64(key ^ (0x52455045ull + repetition));
  return Stream(key);
}

std::uint64_t Stream::next_u64() { return mix64(key_ ^ mix64(counter_++)); }

double Stream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t poisson(Stream& s, double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;

  // Knuth: count uniforms until their product drops below exp(-mean).
  // Split the mean into chunks of <= 500 to keep exp() in range; the sum of
  // independent Poissons is Poisson.
  std::uint64_t total = 0;
  double remaining = mean;
  while (remaining > 0.0) {
    const double chunk = remaining > 500.0 ? 500.0 : remaining;
    remaining -= chunk;
    const double limit = std::exp(-chunk);
    double prod = 1.0;
    std::uint64_t k = 0;
    do {
      prod *= s.next_unit();
      ++k;
    } while (prod > limit);
    total += k - 1;
  }
  return total;
}

}  // namespace sagsim::rng
