#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace ncma::mac {

using Bytes = std::vector<std::uint8_t>;

/// Systematic MDS erasure code over GF(2^8): any L of the N coded packets
/// reconstruct the L source packets.
///
/// The generator is G = V * inv(V_top), V the N x L Vandermonde matrix on
/// the points 0, 1, ..., N-1, so rows 0..L-1 are the identity and every L x L
/// row subset stays invertible. Coding is applied independently to each byte
/// position (bytewise striping).
class ErasureCode {
 public:
  /// Throws ConfigError unless 1 <= L <= N <= 255.
  ErasureCode(int L, int N);

  int source_count() const noexcept { return L_; }
  int coded_count() const noexcept { return N_; }

  /// `message` is split into L equal parts; throws ShapeError if the size is
  /// not a multiple of L.
  std::vector<Bytes> encode(std::span<const std::uint8_t> message) const;

  /// Coded packet `index` only.
  Bytes encode_one(std::span<const std::uint8_t> message, int index) const;

  /// Rebuilds the message from the first L distinct indices present.
  /// Returns nullopt with fewer than L distinct indices.
  std::optional<Bytes> decode(std::span<const std::pair<int, Bytes>> packets) const;

  std::span<const std::uint8_t> generator_row(int index) const noexcept {
    return {gen_.data() + static_cast<std::size_t>(index) * static_cast<std::size_t>(L_),
            static_cast<std::size_t>(L_)};
  }

 private:
  int L_;
  int N_;
  std::vector<std::uint8_t> gen_;  // N x L, row-major
};

/// Inverts a k x k matrix over GF(2^8) in place; false if singular.
bool invert_matrix(std::vector<std::uint8_t>& m, int k);

}  // namespace ncma::mac
