#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ncma/channel.hpp"
#include "ncma/demod.hpp"
#include "ncma/fec.hpp"
#include "ncma/joint.hpp"
#include "ncma/rng.hpp"

using namespace ncma;

namespace {

std::vector<double> noisy_llrs(std::size_t source_bits) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 0.8);
  Bits src(source_bits);
  for (auto& b : src) b = static_cast<std::uint8_t>(rng() & 1u);
  std::vector<double> llr;
  for (auto c : fec::conv_encode(src)) llr.push_back((c ? -1.0 : 1.0) + n(rng));
  return llr;
}

std::vector<fec::SoftSymbolVector> as_symbols(const std::vector<double>& llr, int bps) {
  std::vector<fec::SoftSymbolVector> out;
  for (std::size_t k = 0; k < llr.size(); k += static_cast<std::size_t>(bps)) {
    fec::SoftSymbolVector s(1 << bps);
    for (unsigned lab = 0; lab < (1u << bps); ++lab) {
      for (int p = 0; p < bps; ++p) {
        const double l = llr[k + static_cast<std::size_t>(p)];
        s[lab] += ((lab >> (bps - 1 - p)) & 1u) ? -l : l;
      }
    }
    out.push_back(s);
  }
  return out;
}

void BM_ViterbiBit(benchmark::State& st) {
  const auto llr = noisy_llrs(fec::padded_source_bits(1024, ModScheme::QAM16));
  for (auto _ : st) benchmark::DoNotOptimize(fec::viterbi_bit(llr));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(llr.size() / 2));
}
BENCHMARK(BM_ViterbiBit);

void BM_ViterbiSymbol(benchmark::State& st) {
  const auto scheme = st.range(0) == 2 ? ModScheme::QPSK : ModScheme::QAM16;
  const auto sym = as_symbols(noisy_llrs(fec::padded_source_bits(1024, ModScheme::QAM16)), bits_per_symbol(scheme));
  for (auto _ : st) benchmark::DoNotOptimize(fec::viterbi_symbol(sym, scheme));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(sym.size() * bits_per_symbol(scheme) / 2));
}
BENCHMARK(BM_ViterbiSymbol)->Arg(2)->Arg(4);

struct Samples {
  JointConstellation jc;
  std::vector<RxSamplePair> y;
};

Samples qam16_samples() {
  const ChannelState ch = from_phase_offsets(0.3, 1.1, 1.0, 1.0, sigma_from_snr(16.0, ModScheme::QAM16));
  Rng rng(2);
  Samples s{JointConstellation(ch, ModScheme::QAM16), {}};
  for (int i = 0; i < 1024; ++i) {
    const auto& p = s.jc.points()[rng() % 256];
    s.y.push_back(transmit(p.x_a, p.x_b, ch, rng));
  }
  return s;
}

void BM_MudExhaustive(benchmark::State& st) {
  const auto s = qam16_samples();
  for (auto _ : st) {
    for (const auto& y : s.y) benchmark::DoNotOptimize(demod::mud_symbol_logprob(y, s.jc, demod::User::A));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.y.size()));
}
BENCHMARK(BM_MudExhaustive);

void BM_MudReduced(benchmark::State& st) {
  const auto s = qam16_samples();
  for (auto _ : st) {
    for (const auto& y : s.y) benchmark::DoNotOptimize(demod::mud_reduced(y, s.jc, demod::User::A));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.y.size()));
}
BENCHMARK(BM_MudReduced);

void BM_PncExhaustive(benchmark::State& st) {
  const auto s = qam16_samples();
  for (auto _ : st) {
    for (const auto& y : s.y) benchmark::DoNotOptimize(demod::pnc_symbol_logprob(y, s.jc));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.y.size()));
}
BENCHMARK(BM_PncExhaustive);

void BM_PncNearest(benchmark::State& st) {
  const auto s = qam16_samples();
  const int k = static_cast<int>(st.range(0));
  for (auto _ : st) {
    for (const auto& y : s.y) benchmark::DoNotOptimize(demod::pnc_nearest_point(y, s.jc, k));
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(s.y.size()));
}
BENCHMARK(BM_PncNearest)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
