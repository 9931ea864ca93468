#include "ncma/erasure.hpp"

#include <algorithm>
#include <string>

#include "ncma/errors.hpp"
#include "ncma/gf256.hpp"

namespace ncma::mac {

bool invert_matrix(std::vector<std::uint8_t>& m, int k) {
  const auto n = static_cast<std::size_t>(k);
  std::vector<std::uint8_t> inv(n * n, 0);
  for (std::size_t i = 0; i < n; ++i) inv[i * n + i] = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && m[pivot * n + col] == 0) ++pivot;
    if (pivot == n) return false;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(m[pivot * n + j], m[col * n + j]);
        std::swap(inv[pivot * n + j], inv[col * n + j]);
      }
    }
    const std::uint8_t scale = gf256::inv(m[col * n + col]);
    for (std::size_t j = 0; j < n; ++j) {
      m[col * n + j] = gf256::mul(m[col * n + j], scale);
      inv[col * n + j] = gf256::mul(inv[col * n + j], scale);
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const std::uint8_t f = m[r * n + col];
      if (f == 0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        m[r * n + j] ^= gf256::mul(f, m[col * n + j]);
        inv[r * n + j] ^= gf256::mul(f, inv[col * n + j]);
      }
    }
  }
  m.swap(inv);
  return true;
}

ErasureCode::ErasureCode(int L, int N) : L_(L), N_(N) {
  if (L < 1 || N < L || N > 255) {
    throw ConfigError("erasure code needs 1 <= L <= N <= 255 (L=" + std::to_string(L) + ", N=" + std::to_string(N) +
                      ")");
  }
  const auto l = static_cast<std::size_t>(L);
  const auto n = static_cast<std::size_t>(N);
  std::vector<std::uint8_t> vand(n * l);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      vand[i * l + j] = gf256::pow(static_cast<std::uint8_t>(i), static_cast<unsigned>(j));
    }
  }
  std::vector<std::uint8_t> top(vand.begin(), vand.begin() + static_cast<std::ptrdiff_t>(l * l));
  invert_matrix(top, L);  // Vandermonde on distinct points is never singular
  gen_.assign(n * l, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      std::uint8_t acc = 0;
      for (std::size_t t = 0; t < l; ++t) acc ^= gf256::mul(vand[i * l + t], top[t * l + j]);
      gen_[i * l + j] = acc;
    }
  }
}

Bytes ErasureCode::encode_one(std::span<const std::uint8_t> message, int index) const {
  if (message.size() % static_cast<std::size_t>(L_) != 0) {
    throw ShapeError("erasure encode: message size " + std::to_string(message.size()) + " is not a multiple of L=" +
                     std::to_string(L_));
  }
  if (index < 0 || index >= N_) throw ProtocolError("erasure encode: packet index out of range");
  const std::size_t len = message.size() / static_cast<std::size_t>(L_);
  const auto row = generator_row(index);
  Bytes out(len, 0);
  for (std::size_t j = 0; j < row.size(); ++j) {
    const std::uint8_t c = row[j];
    if (c == 0) continue;
    const std::uint8_t* src = message.data() + j * len;
    for (std::size_t b = 0; b < len; ++b) out[b] ^= gf256::mul(c, src[b]);
  }
  return out;
}

std::vector<Bytes> ErasureCode::encode(std::span<const std::uint8_t> message) const {
  std::vector<Bytes> out;
  out.reserve(static_cast<std::size_t>(N_));
  for (int i = 0; i < N_; ++i) out.push_back(encode_one(message, i));
  return out;
}

std::optional<Bytes> ErasureCode::decode(std::span<const std::pair<int, Bytes>> packets) const {
  std::vector<const std::pair<int, Bytes>*> chosen;
  std::vector<bool> used(static_cast<std::size_t>(N_), false);
  for (const auto& p : packets) {
    if (p.first < 0 || p.first >= N_) throw ProtocolError("erasure decode: packet index out of range");
    if (used[static_cast<std::size_t>(p.first)]) continue;
    used[static_cast<std::size_t>(p.first)] = true;
    chosen.push_back(&p);
    if (static_cast<int>(chosen.size()) == L_) break;
  }
  if (static_cast<int>(chosen.size()) < L_) return std::nullopt;

  const auto l = static_cast<std::size_t>(L_);
  const std::size_t len = chosen.front()->second.size();
  for (const auto* p : chosen) {
    if (p->second.size() != len) throw ShapeError("erasure decode: packets differ in size");
  }
  std::vector<std::uint8_t> sub(l * l);
  for (std::size_t r = 0; r < l; ++r) {
    const auto row = generator_row(chosen[r]->first);
    std::copy(row.begin(), row.end(), sub.begin() + static_cast<std::ptrdiff_t>(r * l));
  }
  invert_matrix(sub, L_);  // any L rows of an MDS generator are independent

  Bytes message(l * len, 0);
  for (std::size_t j = 0; j < l; ++j) {
    std::uint8_t* dst = message.data() + j * len;
    for (std::size_t r = 0; r < l; ++r) {
      const std::uint8_t c = sub[j * l + r];
      if (c == 0) continue;
      const auto& src = chosen[r]->second;
      for (std::size_t b = 0; b < len; ++b) dst[b] ^= gf256::mul(c, src[b]);
    }
  }
  return message;
}

}  // namespace ncma::mac
