#pragma once

#include <array>
#include <cstdint>

namespace ncma::gf256 {

// GF(2^8) with the primitive polynomial x^8 + x^4 + x^3 + x^2 + 1 (0x11d).
struct Tables {
  std::array<std::uint8_t, 512> exp{};
  std::array<std::uint8_t, 256> log{};

  constexpr Tables() {
    unsigned x = 1;
    for (unsigned i = 0; i < 255; ++i) {
      exp[i] = static_cast<std::uint8_t>(x);
      log[x] = static_cast<std::uint8_t>(i);
      x <<= 1;
      if (x & 0x100u) x ^= 0x11du;
    }
    for (unsigned i = 255; i < 512; ++i) exp[i] = exp[i - 255];
  }
};

inline constexpr Tables kTables{};

constexpr std::uint8_t add(std::uint8_t a, std::uint8_t b) noexcept { return a ^ b; }

constexpr std::uint8_t mul(std::uint8_t a, std::uint8_t b) noexcept {
  if (a == 0 || b == 0) return 0;
  return kTables.exp[kTables.log[a] + kTables.log[b]];
}

/// a must be nonzero.
constexpr std::uint8_t inv(std::uint8_t a) noexcept { return kTables.exp[255 - kTables.log[a]]; }

constexpr std::uint8_t pow(std::uint8_t a, unsigned n) noexcept {
  if (n == 0) return 1;
  if (a == 0) return 0;
  return kTables.exp[(kTables.log[a] * n) % 255];
}

}  // namespace ncma::gf256
