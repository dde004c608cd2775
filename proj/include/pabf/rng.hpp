#pragma once

#include <cstdint>
#include <random>

namespace pabf {

// splitmix64; used to derive well-separated child seeds from a master seed
// so that replica streams and replicated-run streams are independent.
inline std::uint64_t mix_seed(std::uint64_t seed)
{
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream)
{
  return mix_seed(master ^ mix_seed(stream + 1));
}

inline std::mt19937_64 make_engine(std::uint64_t master, std::uint64_t stream)
{
  return std::mt19937_64(derive_seed(master, stream));
}

}  // namespace pabf
