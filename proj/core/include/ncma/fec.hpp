#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ncma/modem.hpp"

namespace ncma::fec {

/// The 802.11 rate-1/2, K=7 convolutional code with generators 133/171
/// (octal), terminated with six zero tail bits.
///
/// The encoder state holds the previous six input bits, newest in bit 5.
/// Each step emits (a, b) = (parity(reg & 0133), parity(reg & 0171)) with
/// reg = input << 6 | state; `a` precedes `b` in the coded stream.
struct ConvCode {
  static constexpr int kConstraintLength = 7;
  static constexpr int kStates = 64;
  static constexpr int kTailBits = 6;
  static constexpr unsigned kG0 = 0133;
  static constexpr unsigned kG1 = 0171;

  /// Two output bits packed as (a << 1) | b.
  static constexpr unsigned output(unsigned state, unsigned input) noexcept {
    const unsigned reg = (input << 6) | state;
    return (static_cast<unsigned>(__builtin_parity(reg & kG0)) << 1) |
           static_cast<unsigned>(__builtin_parity(reg & kG1));
  }
  static constexpr unsigned next_state(unsigned state, unsigned input) noexcept {
    return (input << 5) | (state >> 1);
  }
};

/// Appends the tail; |out| = 2 (|source| + 6).
Bits conv_encode(std::span<const std::uint8_t> source);

/// Smallest source length >= n whose tail-terminated codeword fills a whole
/// number of symbols of `scheme`.
std::size_t padded_source_bits(std::size_t n, ModScheme scheme) noexcept;

/// Trellis whose stages each consume `m` source bits and emit 2m coded bits.
///
/// Branch (s, u) takes input word u (first bit is the MSB) from state s; its
/// output word concatenates the m underlying (a, b) pairs in time order, the
/// first pair in the most significant position.
class MergedTrellis {
 public:
  struct Branch {
    std::uint8_t next;
    std::uint8_t output;
  };

  explicit MergedTrellis(int m);

  int merge() const noexcept { return m_; }
  int states() const noexcept { return ConvCode::kStates; }
  int branches_per_state() const noexcept { return 1 << m_; }
  int stage_output_bits() const noexcept { return 2 * m_; }
  const Branch& branch(unsigned state, unsigned input) const noexcept {
    return branches_[state * static_cast<unsigned>(branches_per_state()) + input];
  }

 private:
  int m_;
  std::vector<Branch> branches_;
};

/// m in {1, 2}; throws ConfigError otherwise.
MergedTrellis build_merged_trellis(int m);

/// Shared, lazily built instances.
const MergedTrellis& bit_trellis();
const MergedTrellis& pair_trellis();

/// Per-symbol unnormalized log-likelihoods indexed by label.
struct SoftSymbolVector {
  std::array<double, 16> logp{};
  int size = 0;

  explicit SoftSymbolVector(int n = 0) : size(n) {}
  double operator[](unsigned label) const noexcept { return logp[label]; }
  double& operator[](unsigned label) noexcept { return logp[label]; }
};

struct DecodeStats {
  std::uint64_t branch_ops = 0;
  double best_metric = 0.0;
};

/// Add-compare-select engine over a merged trellis with larger-is-better
/// metrics. Competing branches into a state are tried in (source state,
/// input word) order and only a strictly better candidate replaces the
/// incumbent, so ties go to the smallest predecessor.
class ViterbiEngine {
 public:
  static constexpr double kUnreachable = -std::numeric_limits<double>::infinity();

  explicit ViterbiEngine(const MergedTrellis& trellis);

  /// Starts from state 0 with metric 0.
  void reset();
  void reset(std::span<const double> initial_metrics);

  void reserve(std::size_t n_stages);

  /// `branch_metric[o]` scores output word o; size must be 4^m.
  void step(std::span<const double> branch_metric);

  std::span<const double> metrics() const noexcept { return metrics_; }
  std::size_t stages() const noexcept { return survivors_.size() / ConvCode::kStates; }
  std::uint64_t branch_ops() const noexcept { return branch_ops_; }

  /// Source bits along the survivor ending in `final_state`.
  Bits traceback(unsigned final_state) const;

 private:
  const MergedTrellis* trellis_;
  std::vector<double> metrics_;
  std::vector<double> scratch_;
  std::vector<std::uint8_t> survivors_;  // predecessor state per (stage, state)
  std::vector<std::uint8_t> inputs_;     // input word per (stage, state)
  std::uint64_t branch_ops_ = 0;
};

/// Soft bit-level decoding. LLRs are log P(0) - log P(1) per coded bit.
/// Returns the source bits with the tail stripped; throws FrameError when
/// |llrs| is odd or shorter than the tail.
Bits viterbi_bit(std::span<const double> llrs, DecodeStats* stats = nullptr);

/// Symbol-level decoding: QPSK uses the plain trellis (one symbol per step),
/// QAM16 the pairwise merged trellis (one symbol per two steps).
Bits viterbi_symbol(std::span<const SoftSymbolVector> soft, ModScheme scheme, DecodeStats* stats = nullptr);

enum class DecoderKind { BitLevel, SymbolLevel };

/// Branch-metric evaluations for `n_steps` unmerged trellis steps.
std::uint64_t count_branch_ops(ModScheme scheme, DecoderKind kind, std::uint64_t n_steps);

}  // namespace ncma::fec
