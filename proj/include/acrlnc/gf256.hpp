#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

// Arithmetic over GF(2^8) with reduction polynomial x^8+x^4+x^3+x^2+1.
namespace acrlnc::gf {

inline constexpr unsigned kPolynomial = 0x11D;

struct Tables {
  std::array<std::uint8_t, 512> exp{};  // doubled so exp[log a + log b] needs no modulo
  std::array<std::uint8_t, 256> log{};  // log[0] is unused
};

constexpr Tables make_tables() {
  Tables t;
  unsigned x = 1;
  for (unsigned i = 0; i < 255; ++i) {
    t.exp[i] = static_cast<std::uint8_t>(x);
    t.log[x] = static_cast<std::uint8_t>(i);
    x <<= 1;
    if (x & 0x100) x ^= kPolynomial;
  }
  for (unsigned i = 255; i < 512; ++i) t.exp[i] = t.exp[i - 255];
  return t;
}

inline constexpr Tables kTables = make_tables();

class Element {
 public:
  constexpr Element() = default;
  constexpr explicit Element(std::uint8_t v) : value_(v) {}

  constexpr std::uint8_t value() const { return value_; }
  constexpr bool is_zero() const { return value_ == 0; }

  friend constexpr Element operator+(Element a, Element b) {
    return Element(static_cast<std::uint8_t>(a.value_ ^ b.value_));
  }
  friend constexpr Element operator-(Element a, Element b) { return a + b; }
  friend constexpr Element operator*(Element a, Element b) {
    if (a.value_ == 0 || b.value_ == 0) return Element();
    return Element(kTables.exp[kTables.log[a.value_] + kTables.log[b.value_]]);
  }
  friend constexpr bool operator==(Element, Element) = default;

 private:
  std::uint8_t value_ = 0;
};

constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) { return a ^ b; }

constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) {
  return (Element(a) * Element(b)).value();
}

// Multiplicative inverse; throws InvalidInput for zero.
std::uint8_t inv(std::uint8_t a);

std::uint8_t div(std::uint8_t a, std::uint8_t b);

inline Element inverse(Element a) { return Element(inv(a.value())); }

// dst[i] += c * src[i]
void axpy(std::span<std::uint8_t> dst, std::span<const std::uint8_t> src, std::uint8_t c);

// v[i] *= c
void scale(std::span<std::uint8_t> v, std::uint8_t c);

bool is_zero(std::span<const std::uint8_t> v);

}  // namespace acrlnc::gf
