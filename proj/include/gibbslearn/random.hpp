#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "gibbslearn/dense.hpp"

namespace gibbslearn {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(std::string_view text);
// Independent stream seed for a labelled job.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  return splitmix64(seed ^ fnv1a(label));
}

// mt19937_64 with distribution code written out so that draws are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next() { return engine_(); }
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  std::uint64_t uniform_int(std::uint64_t n);  // [0, n)
  double normal();
  cplx complex_normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Complex Gaussian matrix scaled to unit operator norm.
Matrix random_operator(Rng& rng, std::size_t dim);
// Random Hermitian matrix with unit operator norm.
Matrix random_hermitian(Rng& rng, std::size_t dim);

}  // namespace gibbslearn
