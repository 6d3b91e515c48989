#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace acrlnc {

struct OracleResult {
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::string first_failure;
};

// Natural matching vs. exhaustive search over all P! permutations, P <= 6.
OracleResult oracle_matching(std::size_t instances, std::uint64_t seed);
// bit_fill_source vs. exhaustive search over all 2^P splits, P <= 10.
OracleResult oracle_bitfill(std::size_t instances, std::uint64_t seed);
// Encode random windows, decode, compare bytes.
OracleResult oracle_decode(std::size_t instances, std::uint64_t seed);

}  // namespace acrlnc
