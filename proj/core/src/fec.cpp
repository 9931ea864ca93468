#include "ncma/fec.hpp"

#include <algorithm>
#include <string>

#include "ncma/errors.hpp"

namespace ncma::fec {

Bits conv_encode(std::span<const std::uint8_t> source) {
  Bits out;
  out.reserve(2 * (source.size() + ConvCode::kTailBits));
  unsigned state = 0;
  auto push = [&](unsigned input) {
    const unsigned o = ConvCode::output(state, input);
    out.push_back(static_cast<std::uint8_t>(o >> 1));
    out.push_back(static_cast<std::uint8_t>(o & 1u));
    state = ConvCode::next_state(state, input);
  };
  for (auto b : source) push(b & 1u);
  for (int t = 0; t < ConvCode::kTailBits; ++t) push(0);
  return out;
}

std::size_t padded_source_bits(std::size_t n, ModScheme scheme) noexcept {
  const auto bps = static_cast<std::size_t>(bits_per_symbol(scheme));
  while ((2 * (n + ConvCode::kTailBits)) % bps != 0) ++n;
  return n;
}

MergedTrellis::MergedTrellis(int m) : m_(m) {
  if (m != 1 && m != 2) throw ConfigError("merged trellis supports m = 1 or 2, got " + std::to_string(m));
  const auto nb = static_cast<unsigned>(branches_per_state());
  branches_.resize(ConvCode::kStates * nb);
  for (unsigned s = 0; s < ConvCode::kStates; ++s) {
    for (unsigned u = 0; u < nb; ++u) {
      unsigned state = s;
      unsigned output = 0;
      for (int k = m - 1; k >= 0; --k) {
        const unsigned bit = (u >> k) & 1u;
        output = (output << 2) | ConvCode::output(state, bit);
        state = ConvCode::next_state(state, bit);
      }
      branches_[s * nb + u] = Branch{static_cast<std::uint8_t>(state), static_cast<std::uint8_t>(output)};
    }
  }
}

MergedTrellis build_merged_trellis(int m) { return MergedTrellis(m); }

const MergedTrellis& bit_trellis() {
  static const MergedTrellis t(1);
  return t;
}

const MergedTrellis& pair_trellis() {
  static const MergedTrellis t(2);
  return t;
}

ViterbiEngine::ViterbiEngine(const MergedTrellis& trellis)
    : trellis_(&trellis), metrics_(ConvCode::kStates), scratch_(ConvCode::kStates) {
  reset();
}

void ViterbiEngine::reset() {
  std::fill(metrics_.begin(), metrics_.end(), kUnreachable);
  metrics_[0] = 0.0;
  survivors_.clear();
  inputs_.clear();
  branch_ops_ = 0;
}

void ViterbiEngine::reset(std::span<const double> initial_metrics) {
  if (initial_metrics.size() != metrics_.size()) throw ShapeError("ViterbiEngine::reset: need 64 metrics");
  std::copy(initial_metrics.begin(), initial_metrics.end(), metrics_.begin());
  survivors_.clear();
  inputs_.clear();
  branch_ops_ = 0;
}

void ViterbiEngine::reserve(std::size_t n_stages) {
  survivors_.reserve(n_stages * ConvCode::kStates);
  inputs_.reserve(n_stages * ConvCode::kStates);
}

void ViterbiEngine::step(std::span<const double> branch_metric) {
  const auto nb = static_cast<unsigned>(trellis_->branches_per_state());
  if (branch_metric.size() != std::size_t{1} << trellis_->stage_output_bits()) {
    throw ShapeError("ViterbiEngine::step: branch metric table has the wrong size");
  }
  const std::size_t base = survivors_.size();
  survivors_.resize(base + ConvCode::kStates, 0);
  inputs_.resize(base + ConvCode::kStates, 0);
  std::fill(scratch_.begin(), scratch_.end(), kUnreachable);

  for (unsigned s = 0; s < ConvCode::kStates; ++s) {
    const double pm = metrics_[s];
    for (unsigned u = 0; u < nb; ++u) {
      const auto& br = trellis_->branch(s, u);
      const double cand = pm + branch_metric[br.output];
      if (cand > scratch_[br.next]) {
        scratch_[br.next] = cand;
        survivors_[base + br.next] = static_cast<std::uint8_t>(s);
        inputs_[base + br.next] = static_cast<std::uint8_t>(u);
      }
    }
  }
  branch_ops_ += static_cast<std::uint64_t>(ConvCode::kStates) * nb;
  metrics_.swap(scratch_);
}

Bits ViterbiEngine::traceback(unsigned final_state) const {
  const int m = trellis_->merge();
  const std::size_t n_stages = stages();
  Bits out(n_stages * static_cast<std::size_t>(m));
  unsigned state = final_state;
  for (std::size_t t = n_stages; t-- > 0;) {
    const std::size_t idx = t * ConvCode::kStates + state;
    const unsigned u = inputs_[idx];
    for (int k = 0; k < m; ++k) {
      out[t * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)] =
          static_cast<std::uint8_t>((u >> (m - 1 - k)) & 1u);
    }
    state = survivors_[idx];
  }
  return out;
}

namespace {

Bits finish(const ViterbiEngine& engine, DecodeStats* stats) {
  Bits bits = engine.traceback(0);
  bits.resize(bits.size() - ConvCode::kTailBits);
  if (stats) {
    stats->branch_ops = engine.branch_ops();
    stats->best_metric = engine.metrics()[0];
  }
  return bits;
}

}  // namespace

Bits viterbi_bit(std::span<const double> llrs, DecodeStats* stats) {
  if (llrs.size() % 2 != 0 || llrs.size() < 2 * ConvCode::kTailBits) {
    throw FrameError("viterbi_bit: " + std::to_string(llrs.size()) +
                     " soft bits do not form a tail-terminated rate-1/2 codeword");
  }
  ViterbiEngine engine(bit_trellis());
  engine.reserve(llrs.size() / 2);
  std::array<double, 4> bm{};
  for (std::size_t k = 0; k < llrs.size(); k += 2) {
    const double la = llrs[k];
    const double lb = llrs[k + 1];
    bm[0b00] = la + lb;
    bm[0b01] = la + -lb;
    bm[0b10] = -la + lb;
    bm[0b11] = -la + -lb;
    engine.step(bm);
  }
  return finish(engine, stats);
}

Bits viterbi_symbol(std::span<const SoftSymbolVector> soft, ModScheme scheme, DecodeStats* stats) {
  int m = 0;
  switch (scheme) {
    case ModScheme::QPSK: m = 1; break;
    case ModScheme::QAM16: m = 2; break;
    case ModScheme::BPSK: throw ConfigError("viterbi_symbol: BPSK has no symbol-level trellis");
  }
  const std::size_t steps = soft.size() * static_cast<std::size_t>(m);
  if (steps < static_cast<std::size_t>(ConvCode::kTailBits)) {
    throw FrameError("viterbi_symbol: frame shorter than the tail");
  }
  const int order = constellation_size(scheme);
  ViterbiEngine engine(m == 1 ? bit_trellis() : pair_trellis());
  engine.reserve(soft.size());
  for (const auto& v : soft) {
    if (v.size != order) throw FrameError("viterbi_symbol: soft vector size does not match the scheme");
    engine.step(std::span<const double>(v.logp.data(), static_cast<std::size_t>(order)));
  }
  return finish(engine, stats);
}

std::uint64_t count_branch_ops(ModScheme scheme, DecoderKind kind, std::uint64_t n_steps) {
  const int m = (kind == DecoderKind::SymbolLevel && scheme == ModScheme::QAM16) ? 2 : 1;
  if (n_steps % static_cast<std::uint64_t>(m) != 0) {
    throw ConfigError("count_branch_ops: merged trellis needs an even number of steps");
  }
  const MergedTrellis& t = m == 1 ? bit_trellis() : pair_trellis();
  return (n_steps / static_cast<std::uint64_t>(m)) * static_cast<std::uint64_t>(t.states()) *
         static_cast<std::uint64_t>(t.branches_per_state());
}

}  // namespace ncma::fec
