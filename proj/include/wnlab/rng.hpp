#pragma once

#include <cstdint>
#include <random>

namespace wnlab {

//! Independent engine for (seed, stream); streams index replications.
inline std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream)
{
  std::seed_seq seq{ static_cast<std::uint32_t>(seed),
                     static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(stream),
                     static_cast<std::uint32_t>(stream >> 32),
                     0x9e3779b9u };
  return std::mt19937_64(seq);
}

} // namespace wnlab
