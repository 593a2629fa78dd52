#include "porosity/core.hpp"

#include <cstdlib>
#include <string>

namespace porosity {

unsigned default_workers() {
  if (const char* env = std::getenv("POROSITY_WORKERS")) {
    try {
      const long n = std::stol(env);
      if (n > 0) return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

namespace rng {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return mix(mix(seed) ^ (index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

}  // namespace rng

}  // namespace porosity
