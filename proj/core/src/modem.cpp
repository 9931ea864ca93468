#include "ncma/modem.hpp"

#include <string>

#include "ncma/errors.hpp"

namespace ncma {

namespace {

// Indexed by the 2-bit Gray pair (first bit high).
constexpr double kQam16Level[4] = {3.0, 1.0, -3.0, -1.0};

double binary_level(unsigned bit) noexcept { return bit ? -1.0 : 1.0; }

unsigned binary_slice(double r) noexcept { return r >= 0.0 ? 0u : 1u; }

// Boundaries at -2, 0, +2; a sample exactly on a boundary goes to the
// smaller pair.
unsigned qam16_axis_slice(double r) noexcept {
  if (r >= 2.0) return 0b00;
  if (r >= 0.0) return 0b01;
  if (r > -2.0) return 0b11;
  return 0b10;
}

}  // namespace

double symbol_energy(ModScheme s) noexcept {
  switch (s) {
    case ModScheme::BPSK: return 1.0;
    case ModScheme::QPSK: return 2.0;
    case ModScheme::QAM16: return 10.0;
  }
  return 0.0;
}

std::string_view to_string(ModScheme s) noexcept {
  switch (s) {
    case ModScheme::BPSK: return "bpsk";
    case ModScheme::QPSK: return "qpsk";
    case ModScheme::QAM16: return "qam16";
  }
  return "?";
}

ModScheme parse_scheme(std::string_view name) {
  if (name == "bpsk" || name == "BPSK") return ModScheme::BPSK;
  if (name == "qpsk" || name == "QPSK") return ModScheme::QPSK;
  if (name == "qam16" || name == "16qam" || name == "QAM16" || name == "16QAM") return ModScheme::QAM16;
  throw ConfigError("unknown modulation scheme '" + std::string(name) + "'");
}

cplx symbol_value(unsigned label, ModScheme scheme) noexcept {
  switch (scheme) {
    case ModScheme::BPSK: return {binary_level(label & 1u), 0.0};
    case ModScheme::QPSK: return {binary_level((label >> 1) & 1u), binary_level(label & 1u)};
    case ModScheme::QAM16: return {kQam16Level[(label >> 2) & 3u], kQam16Level[label & 3u]};
  }
  return {};
}

Symbol make_symbol(unsigned label, ModScheme scheme) noexcept {
  return Symbol{scheme, label, symbol_value(label, scheme)};
}

unsigned pack_label(std::span<const std::uint8_t> bits) noexcept {
  unsigned label = 0;
  for (auto b : bits) label = (label << 1) | (b & 1u);
  return label;
}

Bits unpack_label(unsigned label, int nbits) {
  Bits out(static_cast<std::size_t>(nbits));
  for (int p = 0; p < nbits; ++p) out[static_cast<std::size_t>(p)] = (label >> (nbits - 1 - p)) & 1u;
  return out;
}

std::vector<Symbol> modulate(std::span<const std::uint8_t> bits, ModScheme scheme) {
  const auto bps = static_cast<std::size_t>(bits_per_symbol(scheme));
  if (bits.size() % bps != 0) {
    throw ShapeError("modulate: " + std::to_string(bits.size()) + " bits is not a multiple of " +
                     std::to_string(bps));
  }
  std::vector<Symbol> out;
  out.reserve(bits.size() / bps);
  for (std::size_t k = 0; k < bits.size(); k += bps) {
    out.push_back(make_symbol(pack_label(bits.subspan(k, bps)), scheme));
  }
  return out;
}

unsigned hard_label(cplx y, ModScheme scheme) noexcept {
  switch (scheme) {
    case ModScheme::BPSK: return binary_slice(y.real());
    case ModScheme::QPSK: return (binary_slice(y.real()) << 1) | binary_slice(y.imag());
    case ModScheme::QAM16: return (qam16_axis_slice(y.real()) << 2) | qam16_axis_slice(y.imag());
  }
  return 0;
}

Bits hard_bits(cplx y, ModScheme scheme) {
  return unpack_label(hard_label(y, scheme), bits_per_symbol(scheme));
}

Symbol xor_symbol(const Symbol& a, const Symbol& b) {
  if (a.scheme != b.scheme) throw ConfigError("xor_symbol: symbols use different schemes");
  return make_symbol(a.label ^ b.label, a.scheme);
}

Bits xor_bits_from_symbol(const Symbol& x) {
  // For the binary axes this is bit = (1 - axis value) / 2.
  return hard_bits(x.value, x.scheme);
}

}  // namespace ncma
