// Acceptance checks: one PASS/FAIL line per criterion.
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ncma/channel.hpp"
#include "ncma/demod.hpp"
#include "ncma/erasure.hpp"
#include "ncma/fec.hpp"
#include "ncma/harness.hpp"
#include "ncma/joint.hpp"
#include "ncma/mac.hpp"
#include "ncma/rng.hpp"

using namespace ncma;
using harness::Decoder;
using harness::ExperimentConfig;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::int64_t kFrames = 10000;

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string curve(const std::vector<harness::BerPoint>& pts) {
  std::string s;
  for (const auto& p : pts) s += fmt::format(" {:g}dB:{:.3g}", p.snr_db, p.ber());
  return s;
}

ExperimentConfig ber_config(ModScheme s, Decoder d, int antennas, std::optional<double> d1, std::optional<double> d2,
                            std::vector<double> grid) {
  ExperimentConfig c;
  c.scheme = s;
  c.decoder = d;
  c.antennas = antennas;
  c.dphi1 = d1;
  c.dphi2 = d2;
  c.snr_db = std::move(grid);
  c.trials = kFrames;
  c.frame_source_bits = 128;
  c.seed = 20240601;
  return c;
}

std::vector<double> grid(double a, double step, double b) {
  std::vector<double> g;
  for (double x = a; x <= b + 1e-9; x += step) g.push_back(x);
  return g;
}

// SNR where the curve first drops through `target`, by log-linear interpolation.
std::optional<double> crossing(const std::vector<harness::BerPoint>& pts, double target) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double b0 = pts[i].ber(), b1 = pts[i + 1].ber();
    if (b0 >= target && b1 < target) {
      if (b1 <= 0.0) return pts[i + 1].snr_db;
      const double t = (std::log10(b0) - std::log10(target)) / (std::log10(b0) - std::log10(b1));
      return pts[i].snr_db + t * (pts[i + 1].snr_db - pts[i].snr_db);
    }
  }
  return std::nullopt;
}

double sigma3(const harness::BerPoint& p) {
  const double q = p.ber();
  return 3.0 * std::sqrt(q * (1.0 - q) / static_cast<double>(p.bits));
}

Verdict criterion1() {
  Verdict v;
  const auto bad = harness::ber_sweep(ber_config(ModScheme::QPSK, Decoder::PncBit, 1, kPi / 2, 0.0, grid(4, 1, 12)));
  const auto good = harness::ber_sweep(ber_config(ModScheme::QPSK, Decoder::PncBit, 1, kPi / 4, 0.0, grid(4, 1, 12)));
  for (const auto& p : bad) v.require(p.ber() >= 0.2, fmt::format("pi/2 BER {:.3g} < 0.2 at {:g} dB", p.ber(), p.snr_db));
  const bool reached = std::any_of(good.begin(), good.end(), [](const auto& p) { return p.ber() < 1e-3; });
  v.require(reached, "pi/4 never below 1e-3 by 12 dB");
  v.detail += (v.detail.empty() ? "" : " |") + std::string(" pi/2:") + curve(bad) + " | pi/4:" + curve(good);
  return v;
}

Verdict criterion2() {
  Verdict v;
  std::string d;
  for (Decoder dec : {Decoder::PncBit, Decoder::MudBit, Decoder::PncSymbol, Decoder::MudSymbol}) {
    const auto pts = harness::ber_sweep(ber_config(ModScheme::QPSK, dec, 2, kPi / 2, 0.0, grid(0, 2, 12)));
    const bool reached = std::any_of(pts.begin(), pts.end(), [](const auto& p) { return p.ber() < 1e-3; });
    v.require(reached, std::string(harness::to_string(dec)) + " never below 1e-3");
    d += fmt::format(" {}:{}", harness::to_string(dec), curve(pts));
  }
  v.detail += d;
  return v;
}

Verdict criterion3() {
  Verdict v;
  const auto g = grid(14, 2, 24);
  const auto pb = harness::ber_sweep(ber_config(ModScheme::QAM16, Decoder::PncBit, 2, 0.0, 0.0, g));
  const auto ps = harness::ber_sweep(ber_config(ModScheme::QAM16, Decoder::PncSymbol, 2, 0.0, 0.0, g));
  const auto mb = harness::ber_sweep(ber_config(ModScheme::QAM16, Decoder::MudBit, 2, 0.0, 0.0, g));
  const auto ms = harness::ber_sweep(ber_config(ModScheme::QAM16, Decoder::MudSymbol, 2, 0.0, 0.0, g));
  for (const auto& p : pb) v.require(p.ber() > 1e-2, fmt::format("pnc_bit {:.3g} <= 1e-2 at {:g} dB", p.ber(), p.snr_db));
  v.require(std::any_of(ps.begin(), ps.end(), [](const auto& p) { return p.ber() < 1e-3; }),
            "pnc_symbol never below 1e-3");
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double margin = std::hypot(sigma3(ms[i]), sigma3(mb[i]));
    v.require(ms[i].ber() <= mb[i].ber() + margin,
              fmt::format("mud_symbol {:.4g} > mud_bit {:.4g} at {:g} dB", ms[i].ber(), mb[i].ber(), g[i]));
  }
  v.detail += fmt::format(" pnc_bit:{} | pnc_symbol:{} | mud_bit:{} | mud_symbol:{}", curve(pb), curve(ps), curve(mb),
                          curve(ms));
  return v;
}

Verdict criterion4() {
  Verdict v;
  const int frames = 1000;
  const std::size_t n = fec::padded_source_bits(128, ModScheme::QAM16);
  int mismatches = 0;
  std::int64_t errors = 0;
  for (int f = 0; f < frames; ++f) {
    Rng rng = substream(77, 0, static_cast<std::uint64_t>(f));
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    ChannelState ch;
    ch.h_a1 = {g(rng), g(rng)};
    ch.h_b1 = {g(rng), g(rng)};
    ch.h_a2 = {g(rng), g(rng)};
    ch.h_b2 = {g(rng), g(rng)};
    const double snr = std::uniform_real_distribution<double>(8.0, 24.0)(rng);
    ch.sigma1_sq = sigma_from_snr(snr, ModScheme::QAM16);
    ch.sigma2_sq = ch.sigma1_sq * std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    ch.antennas = f % 4 == 0 ? 1 : 2;
    Bits a(n), b(n);
    for (auto& x : a) x = static_cast<std::uint8_t>(rng() & 1u);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng() & 1u);
    const auto sa = modulate(fec::conv_encode(a), ModScheme::QAM16);
    const auto sb = modulate(fec::conv_encode(b), ModScheme::QAM16);
    std::vector<RxSamplePair> rx;
    for (std::size_t k = 0; k < sa.size(); ++k) rx.push_back(transmit(sa[k], sb[k], ch, rng));
    const JointConstellation jc(ch, ModScheme::QAM16);
    for (demod::User u : {demod::User::A, demod::User::B}) {
      std::vector<fec::SoftSymbolVector> ex, red;
      for (const auto& y : rx) {
        ex.push_back(demod::mud_symbol_logprob(y, jc, u));
        red.push_back(demod::mud_reduced(y, jc, u));
      }
      const Bits de = fec::viterbi_symbol(ex, ModScheme::QAM16);
      const Bits dr = fec::viterbi_symbol(red, ModScheme::QAM16);
      mismatches += de != dr;
      const Bits& truth = u == demod::User::A ? a : b;
      for (std::size_t i = 0; i < n; ++i) errors += de[i] != truth[i];
    }
  }
  v.require(mismatches == 0, fmt::format("{} mismatching frames", mismatches));
  v.detail += fmt::format(" {} frames x 2 users, {} mismatches, exhaustive bit errors {}", frames, mismatches, errors);
  return v;
}

Verdict criterion5() {
  Verdict v;
  const auto g = grid(4, 1, 14);
  auto cfg = ber_config(ModScheme::QAM16, Decoder::PncSymbol, 2, 0.0, kPi / 2, g);
  const auto ex = harness::ber_sweep(cfg);
  cfg.decoder = Decoder::PncNearest;
  cfg.nearest_k = 4;
  const auto k4 = harness::ber_sweep(cfg);
  cfg.nearest_k = 1;
  const auto k1 = harness::ber_sweep(cfg);
  for (std::size_t i = 0; i < g.size(); ++i) {
    v.require(k4[i].ber() <= k1[i].ber(), fmt::format("k=4 worse than k=1 at {:g} dB", g[i]));
    if (ex[i].ber() > 1e-4) {
      v.require(k4[i].ber() <= 1.5 * ex[i].ber(),
                fmt::format("k=4 {:.3g} > 1.5 x exhaustive {:.3g} at {:g} dB", k4[i].ber(), ex[i].ber(), g[i]));
    }
  }
  const auto cx = crossing(ex, 1e-2), c1 = crossing(k1, 1e-2);
  v.require(cx && c1, "a curve never crosses 1e-2");
  double gap = 0.0;
  if (cx && c1) {
    gap = *c1 - *cx;
    v.require(gap >= 1.0, fmt::format("k=1 gap {:.2f} dB < 1 dB", gap));
  }
  v.detail += fmt::format(" gap at 1e-2: {:.2f} dB | exhaustive:{} | k=4:{} | k=1:{}", gap, curve(ex), curve(k4), curve(k1));
  return v;
}

Verdict criterion6() {
  Verdict v;
  ChannelState ch;  // unit gains, B rotated by exactly 90 degrees
  ch.h_b1 = ch.h_b2 = cplx(0, 1);
  ch.sigma1_sq = ch.sigma2_sq = 1.0;
  const RxSamplePair y{cplx(2, 0), cplx(2, 0)};
  const auto s = demod::pnc_symbol_logprob(y, ch, ModScheme::QPSK);
  double best = -1e300;
  for (unsigned l = 0; l < 4; ++l) best = std::max(best, s[l]);
  std::vector<unsigned> top;
  for (unsigned l = 0; l < 4; ++l) {
    if (s[l] == best) top.push_back(l);
  }
  const unsigned pp = hard_label(cplx(1, 1), ModScheme::QPSK), mm = hard_label(cplx(-1, -1), ModScheme::QPSK);
  v.require(top == std::vector<unsigned>{pp, mm}, fmt::format("{} maxima", top.size()));
  const auto llr = demod::pnc_bit_llr(y, ch, ModScheme::QPSK);
  v.require(llr[0] == 0.0 && llr[1] == 0.0, fmt::format("bit LLRs {:g}, {:g}", llr[0], llr[1]));
  v.detail += fmt::format(" maxima {} at logp {:g}; LLRs ({:g}, {:g})", top.size(), best, llr[0], llr[1]);
  return v;
}

std::vector<fec::SoftSymbolVector> separable(const std::vector<double>& llr, int bps) {
  std::vector<fec::SoftSymbolVector> out;
  for (std::size_t k = 0; k < llr.size(); k += static_cast<std::size_t>(bps)) {
    fec::SoftSymbolVector s(1 << bps);
    for (unsigned lab = 0; lab < (1u << bps); ++lab) {
      double acc = 0.0;
      for (int p = 0; p < bps; ++p) {
        const double l = llr[k + static_cast<std::size_t>(p)];
        acc += ((lab >> (bps - 1 - p)) & 1u) ? -l : l;
      }
      s[lab] = acc;
    }
    out.push_back(s);
  }
  return out;
}

Verdict criterion7() {
  Verdict v;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (ModScheme sc : {ModScheme::QPSK, ModScheme::QAM16}) {
    int mismatches = 0;
    for (int f = 0; f < 500; ++f) {
      Bits src(fec::padded_source_bits(100, sc));
      for (auto& x : src) x = static_cast<std::uint8_t>(rng() & 1u);
      std::vector<double> llr;
      for (auto c : fec::conv_encode(src)) llr.push_back((c ? -1.0 : 1.0) + noise(rng));
      mismatches += fec::viterbi_bit(llr) != fec::viterbi_symbol(separable(llr, bits_per_symbol(sc)), sc);
    }
    v.require(mismatches == 0, fmt::format("{} frames differ for {}", mismatches, to_string(sc)));
  }
  const std::uint64_t steps = 100, expect = 2 * 64 * steps;
  Bits src(steps - 6, 0);
  std::vector<double> llr;
  for (auto c : fec::conv_encode(src)) llr.push_back(c ? -1.0 : 1.0);
  fec::DecodeStats a, b, c;
  fec::viterbi_bit(llr, &a);
  fec::viterbi_symbol(separable(llr, 2), ModScheme::QPSK, &b);
  fec::viterbi_symbol(separable(llr, 4), ModScheme::QAM16, &c);
  v.require(a.branch_ops == expect && b.branch_ops == expect && c.branch_ops == expect,
            fmt::format("counted {}/{}/{}", a.branch_ops, b.branch_ops, c.branch_ops));
  v.require(fec::count_branch_ops(ModScheme::QAM16, fec::DecoderKind::SymbolLevel, steps) == expect &&
                fec::count_branch_ops(ModScheme::QPSK, fec::DecoderKind::SymbolLevel, steps) == expect &&
                fec::count_branch_ops(ModScheme::QAM16, fec::DecoderKind::BitLevel, steps) == expect,
            "closed-form count");
  v.detail += fmt::format(" 500+500 frames identical; ops bit/qpsk/16qam = {}/{}/{} (2KN = {})", a.branch_ops,
                          b.branch_ops, c.branch_ops, expect);
  return v;
}

Verdict criterion8() {
  Verdict v;
  std::mt19937_64 rng(8);
  int failures = 0;
  for (int t = 0; t < 10000; ++t) {
    mac::Bytes a(1 + rng() % 64), b(a.size());
    for (auto& x : a) x = static_cast<std::uint8_t>(rng());
    for (auto& x : b) x = static_cast<std::uint8_t>(rng());
    const auto x = mac::xor_bytes(a, b);
    failures += mac::phy_bridge({true, false, true, 0}, a, std::nullopt, x).b != b;
    failures += mac::phy_bridge({false, true, true, 0}, std::nullopt, b, x).a != a;
    failures += mac::xor_bytes(a, b) != x;
  }
  v.require(failures == 0, fmt::format("{} bridging failures", failures));

  const std::vector<mac::SlotOutcome> trace{
      {true, true, false, 0}, {false, false, true, 1}, {true, false, false, 2}, {false, true, false, 3}, {true, false, false, 4}};
  mac::SessionConfig sc;
  sc.L_A = sc.L_B = 3;
  sc.N = 6;
  sc.payload_bytes = 16;
  sc.n_beacons = 4;
  const auto before = mac::run_session(mac::trace_oracle(trace), sc);
  sc.n_beacons = 5;
  const auto after = mac::run_session(mac::trace_oracle(trace), sc);
  v.require(before.n_a == 0 && before.n_b == 0, "messages decoded before slot 5");
  v.require(after.n_a == 1 && after.n_b == 1 && after.mac_bridged == 1, "slot-2 lone X did not complete B");

  int patterns = 0, bad = 0;
  for (auto [L, N] : {std::pair{3, 6}, std::pair{4, 8}}) {
    const mac::ErasureCode code(L, N);
    mac::Bytes msg(static_cast<std::size_t>(L) * 11);
    for (auto& x : msg) x = static_cast<std::uint8_t>(rng());
    const auto pk = code.encode(msg);
    for (unsigned mask = 0; mask < (1u << N); ++mask) {
      if (__builtin_popcount(mask) > N - L) continue;  // mask marks erasures
      std::vector<std::pair<int, mac::Bytes>> kept;
      for (int i = 0; i < N; ++i) {
        if (!(mask & (1u << i))) kept.emplace_back(i, pk[static_cast<std::size_t>(i)]);
      }
      ++patterns;
      const auto got = code.decode(kept);
      bad += !got || *got != msg;
    }
  }
  v.require(bad == 0, fmt::format("{} erasure patterns failed", bad));
  v.detail += fmt::format(" 30000 bridge checks; trace decodes A and B in slot 5 via {} MAC bridge; {} erasure patterns",
                          after.mac_bridged, patterns);
  return v;
}

Verdict criterion9() {
  Verdict v;
  mac::SessionStats s;
  s.n_a = 2;
  s.n_b = 3;
  s.n_beacon = 100;
  const double t1 = mac::throughput(s, 24, 16);
  s.n_a = s.n_b = 0;
  const double t2 = mac::throughput(s, 24, 16);
  s.n_a = 1;
  s.n_beacon = 24;
  const double t3 = mac::throughput(s, 24, 16);
  v.require(std::abs(t1 - 0.96) < 1e-12 && t2 == 0.0 && std::abs(t3 - 1.0) < 1e-12,
            fmt::format("throughput {:g} {:g} {:g}", t1, t2, t3));
  auto probs = [](std::initializer_list<std::pair<mac::Event, double>> l) {
    mac::EventProbs p{};
    for (auto [e, x] : l) p[static_cast<std::size_t>(e)] = x;
    return p;
  };
  const double u1 = mac::upper_bound(probs({{mac::Event::ABX, 1.0}}));
  const double u2 = mac::upper_bound(probs({{mac::Event::X, 1.0}}));
  const double u3 = mac::upper_bound(probs({{mac::Event::AB, 0.5}, {mac::Event::AorB, 0.5}}));
  v.require(std::abs(u1 - 2) < 1e-12 && std::abs(u2 - 1) < 1e-12 && std::abs(u3 - 1.5) < 1e-12,
            fmt::format("upper bound {:g} {:g} {:g}", u1, u2, u3));

  const std::vector<mac::SlotOutcome> eight{{1, 1, 1, 0}, {1, 1, 0, 0}, {1, 0, 1, 0}, {0, 1, 1, 0},
                                            {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0}};
  mac::SessionConfig sc;
  sc.n_beacons = 10000;
  const auto e8 = mac::run_session(mac::trace_oracle(eight), sc);
  const double th8 = mac::throughput(e8, sc.L_A, sc.L_B), ub8 = mac::upper_bound(e8.event_probs());
  const double margin = 2.0 * std::max(sc.L_A, sc.L_B) / static_cast<double>(sc.n_beacons);
  v.require(th8 <= ub8 + margin, fmt::format("eight-slot Th {:.4f} > bound {:.4f}", th8, ub8));

  std::mt19937_64 rng(9);
  double worst = -1e9;
  for (int t = 0; t < 50; ++t) {
    std::array<double, 8> w{};
    double sum = 0;
    for (auto& x : w) sum += (x = std::exponential_distribution<double>(1.0)(rng));
    for (auto& x : w) x /= sum;
    sc.seed = rng();
    const auto st = mac::run_session(mac::sampled_oracle(w, rng()), sc);
    const double slack = mac::throughput(st, sc.L_A, sc.L_B) - mac::upper_bound(st.event_probs());
    worst = std::max(worst, slack);
    v.require(slack <= margin, fmt::format("synthetic run exceeds bound by {:.4f}", slack));
  }

  sc.L_A = sc.L_B = 24;
  const auto all = mac::run_session(mac::trace_oracle({{true, true, true, 0}}), sc);
  const double th2 = mac::throughput(all, 24, 24);
  v.require(std::abs(th2 - 2.0) <= 0.02 * 2.0, fmt::format("all-ABX Th {:.4f}", th2));
  v.detail += fmt::format(" eight-slot Th {:.4f} <= {:.4f}; worst synthetic Th - bound {:+.4f}; all-ABX Th {:.4f}", th8,
                          ub8, worst, th2);
  return v;
}

#ifdef NCMA_CLI_PATH
std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}
#endif

Verdict criterion10() {
  Verdict v;
#ifdef NCMA_CLI_PATH
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "ncma_acceptance";
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"scheme": "qam16", "decoder": "pnc_nearest_k", "nearest_k": 4, "antennas": 2,
               "snr_db": "8:2:12", "dphi1": "uniform", "dphi2": "pi/3", "trials": 300, "frame_source_bits": 96})";
  }
  const std::vector<std::string> runs{
      "ber --config " + (dir / "cfg.json").string() + " --seed 11",
      "ber --scheme qpsk --decoder mud_bit --antennas 1 --snr 2:2:10 --dphi1 uniform --trials 500 --seed 5",
      "phystats --scheme qpsk --decoder pnc_symbol --snr 2,4 --dphi1 pi/2 --dphi2 0 --trials 400 --seed 3",
      "throughput --mode stats --scheme qpsk --decoder pnc_bit --snr 4 --dphi1 uniform --dphi2 uniform "
      "--trials 300 --beacons 2000 --seed 8",
      "throughput --mode full --scheme qpsk --decoder pnc_symbol --snr 5 --dphi1 uniform --dphi2 uniform "
      "--beacons 150 --la 12 --lb 8 --n 32 --seed 4"};
  int differing = 0, failed = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<std::string> outputs;
    for (const char* threads : {"1", "1", "3"}) {
      const fs::path out = dir / fmt::format("run{}_{}.csv", i, outputs.size());
      const std::string cmd =
          fmt::format("\"{}\" {} --threads {} --out \"{}\"", NCMA_CLI_PATH, runs[i], threads, out.string());
      if (std::system(cmd.c_str()) != 0) {
        ++failed;
        v.require(false, "command failed: " + runs[i]);
      }
      outputs.push_back(slurp(out));
    }
    const bool same = outputs[0] == outputs[1] && outputs[1] == outputs[2] && !outputs[0].empty();
    differing += !same;
    v.require(same, "output differs: " + runs[i]);
  }
  v.detail += fmt::format(" {} CLI configurations x 3 runs (threads 1,1,3): {} differing, {} failed", runs.size(),
                          differing, failed);
#else
  v.require(false, "CLI not built");
#endif
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> checks{
      {"phase-penalty floor (single antenna QPSK XOR-CD)", criterion1},
      {"two-antenna rescue at dphi1=pi/2, dphi2=0", criterion2},
      {"16-QAM bit-level floor vs symbol-level decoding", criterion3},
      {"reduced MUD decodes identically to exhaustive MUD", criterion4},
      {"nearest-point PNC with k=1 and k=4", criterion5},
      {"noiseless ambiguity at dphi=pi/2, y=2", criterion6},
      {"Viterbi equivalence and branch counts", criterion7},
      {"bridging algebra and MDS erasure recovery", criterion8},
      {"throughput accounting and upper bound", criterion9},
      {"CLI determinism", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = checks[i].second();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    fmt::print("criterion {:>2}: {} - {} ({:.1f}s){}\n", i + 1, v.pass ? "PASS" : "FAIL", checks[i].first, secs,
               v.detail.empty() ? "" : "\n    " + v.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", checks.size() - static_cast<std::size_t>(failed), checks.size());
  return failed == 0 ? 0 : 1;
}
