#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace ncma {

using cplx = std::complex<double>;

/// Bits are stored one per byte, value 0 or 1.
using Bits = std::vector<std::uint8_t>;

enum class ModScheme { BPSK, QPSK, QAM16 };

constexpr int bits_per_symbol(ModScheme s) noexcept {
  switch (s) {
    case ModScheme::BPSK: return 1;
    case ModScheme::QPSK: return 2;
    case ModScheme::QAM16: return 4;
  }
  return 0;
}

constexpr int constellation_size(ModScheme s) noexcept { return 1 << bits_per_symbol(s); }

/// Mean symbol energy of the unnormalized grid (1, 2, 10).
double symbol_energy(ModScheme s) noexcept;

std::string_view to_string(ModScheme s) noexcept;
ModScheme parse_scheme(std::string_view name);

/// A constellation point together with its bit label.
///
/// Labels are packed MSB-first: the first bit of a symbol's bit group is the
/// most significant bit of `label`, so numeric order equals lexicographic
/// order of the bit vectors. For QAM16 the two high bits drive I and the two
/// low bits drive Q, each through the Gray table 00->+3, 01->+1, 11->-1,
/// 10->-3. Bit 0 always maps to the positive extreme.
struct Symbol {
  ModScheme scheme = ModScheme::QPSK;
  unsigned label = 0;
  cplx value{};

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

/// Grid image of a label (no energy normalization).
cplx symbol_value(unsigned label, ModScheme scheme) noexcept;
Symbol make_symbol(unsigned label, ModScheme scheme) noexcept;

/// Packs `bits_per_symbol` bits starting at `bits[0]` into a label.
unsigned pack_label(std::span<const std::uint8_t> bits) noexcept;
Bits unpack_label(unsigned label, int nbits);

/// Throws ShapeError unless |bits| is a multiple of bits_per_symbol.
std::vector<Symbol> modulate(std::span<const std::uint8_t> bits, ModScheme scheme);

/// Label of the nearest constellation point. Equidistant candidates resolve
/// to the smallest label.
unsigned hard_label(cplx y, ModScheme scheme) noexcept;
Bits hard_bits(cplx y, ModScheme scheme);

/// XOR-mapped network-coded symbol. Throws ConfigError on mixed schemes.
Symbol xor_symbol(const Symbol& a, const Symbol& b);

Bits xor_bits_from_symbol(const Symbol& x);

}  // namespace ncma
