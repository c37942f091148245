#pragma once

#include <cstdint>
#include <random>

#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

#include "partlasso/design.hpp"

namespace partlasso {

/// 64-bit Mersenne Twister. Boost's engine and distributions have fixed
/// algorithms, so draws match across compilers and standard libraries.
using Engine = boost::random::mt19937_64;

/// Independent purposes within one seed get distinct stream tags.
enum class Stream : std::uint32_t { design = 1, noise = 2, cone_search = 3, oracle = 4 };

/// Engine for (seed, stream). Replicate r of an experiment uses seed = base_seed + r.
inline Engine make_engine(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(stream)};
  return Engine(seq);
}

inline Matrix gaussian_matrix(Engine& engine, Index rows, Index cols, double sd = 1.0) {
  boost::random::normal_distribution<double> normal(0.0, sd);
  Matrix out(rows, cols);
  // Fill column by column so the stream order is fixed.
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) out(i, j) = normal(engine);
  }
  return out;
}

inline Vector gaussian_vector(Engine& engine, Index size, double sd = 1.0) {
  boost::random::normal_distribution<double> normal(0.0, sd);
  Vector out(size);
  for (Index i = 0; i < size; ++i) out(i) = normal(engine);
  return out;
}

}  // namespace partlasso
