#include "acrlnc/gf256.hpp"

#include <algorithm>

#include "acrlnc/errors.hpp"

namespace acrlnc::gf {

std::uint8_t inv(std::uint8_t a) {
  if (a == 0) throw InvalidInput("gf256: zero has no inverse");
  return kTables.exp[255 - kTables.log[a]];
}

std::uint8_t div(std::uint8_t a, std::uint8_t b) { return mul(a, inv(b)); }

namespace {

// Row of the multiplication table for a fixed nonzero factor.
std::array<std::uint8_t, 256> mul_row(std::uint8_t c) {
  std::array<std::uint8_t, 256> row{};
  const unsigned lc = kTables.log[c];
  for (unsigned x = 1; x < 256; ++x) row[x] = kTables.exp[kTables.log[x] + lc];
  return row;
}

}  // namespace

void axpy(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c) {
  const std::size_t n = std::min(dst.size(), src.size());
  if (c == 0) return;
  if (c == 1) {
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= src[i];
    return;
  }
  if (n < 64) {
    for (std::size_t i = 0; i < n; ++i) dst[i] ^= mul(c, src[i]);
    return;
  }
  const auto row = mul_row(c);
  for (std::size_t i = 0; i < n; ++i) dst[i] ^= row[src[i]];
}

void scale(std::span<std::uint8_t> v, std::uint8_t c) {
  if (c == 1) return;
  if (c == 0) {
    std::fill(v.begin(), v.end(), std::uint8_t{0});
    return;
  }
  for (auto& x : v) x = mul(c, x);
}

bool is_zero(std::span<const std::uint8_t> v) {
  return std::all_of(v.begin(), v.end(), [](std::uint8_t x) { return x == 0; });
}

}  // namespace acrlnc::gf
