#include "ncma/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <mutex>
#include <exception>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ncma/channel.hpp"
#include "ncma/errors.hpp"
#include "ncma/fec.hpp"
#include "ncma/joint.hpp"
#include "ncma/rng.hpp"

namespace ncma::harness {

using demod::User;

std::string_view to_string(Decoder d) noexcept {
  switch (d) {
    case Decoder::PncBit: return "pnc_bit";
    case Decoder::PncSymbol: return "pnc_symbol";
    case Decoder::MudBit: return "mud_bit";
    case Decoder::MudSymbol: return "mud_symbol";
    case Decoder::MudReduced: return "mud_reduced";
    case Decoder::PncNearest: return "pnc_nearest_k";
  }
  return "?";
}

Decoder parse_decoder(std::string_view name) {
  for (Decoder d : {Decoder::PncBit, Decoder::PncSymbol, Decoder::MudBit, Decoder::MudSymbol, Decoder::MudReduced,
                    Decoder::PncNearest}) {
    if (name == to_string(d)) return d;
  }
  throw ConfigError("unknown decoder '" + std::string(name) + "'");
}

bool is_pnc(Decoder d) noexcept {
  return d == Decoder::PncBit || d == Decoder::PncSymbol || d == Decoder::PncNearest;
}

namespace {

bool is_symbol_level(Decoder d) noexcept { return d != Decoder::PncBit && d != Decoder::MudBit; }

std::string_view mode_name(SessionMode m) noexcept {
  switch (m) {
    case SessionMode::Stats: return "stats";
    case SessionMode::Trace: return "trace";
    case SessionMode::Full: return "full";
  }
  return "?";
}

SessionMode parse_mode(std::string_view s) {
  for (SessionMode m : {SessionMode::Stats, SessionMode::Trace, SessionMode::Full}) {
    if (s == mode_name(m)) return m;
  }
  throw ConfigError("unknown session mode '" + std::string(s) + "'");
}

double parse_number(std::string_view s) {
  std::string tmp(s);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError("not a number: '" + tmp + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (antennas != 1 && antennas != 2) throw ConfigError("antennas must be 1 or 2");
  if (snr_db.empty()) throw ConfigError("SNR grid is empty");
  if (trials <= 0) throw ConfigError("trials must be positive");
  if (frame_source_bits == 0) throw ConfigError("frame_source_bits must be positive");
  if (!(amp_a > 0.0) || !(amp_b > 0.0)) throw ConfigError("amplitudes must be positive");
  if (!(phase_jitter >= 0.0)) throw ConfigError("phase_jitter must be non-negative");
  if (threads < 0) throw ConfigError("threads must be non-negative");
  if (is_symbol_level(decoder) && scheme == ModScheme::BPSK) {
    throw ConfigError(std::string(to_string(decoder)) + " needs QPSK or QAM16");
  }
  if ((decoder == Decoder::MudReduced || decoder == Decoder::PncNearest) && scheme != ModScheme::QAM16) {
    throw ConfigError(std::string(to_string(decoder)) + " is defined for QAM16 only");
  }
  if (decoder == Decoder::PncNearest && nearest_k != 1 && nearest_k != 4) throw ConfigError("nearest_k must be 1 or 4");
  if (L_A < 1 || L_B < 1 || L_A > N || L_B > N || N > 255) throw ConfigError("need 1 <= L_A, L_B <= N <= 255");
  if (payload_bytes <= 0) throw ConfigError("payload_bytes must be positive");
  if (beacons <= 0) throw ConfigError("beacons must be positive");
}

std::optional<double> parse_angle(std::string_view text) {
  std::string_view s = trim(text);
  if (s == "uniform") return std::nullopt;
  const auto p = s.find("pi");
  if (p == std::string_view::npos) return parse_number(s);
  double coef = 1.0;
  std::string_view head = trim(s.substr(0, p));
  if (!head.empty()) {
    if (head == "-") {
      coef = -1.0;
    } else {
      if (head.back() != '*') throw ConfigError("bad angle '" + std::string(s) + "'");
      head.remove_suffix(1);
      coef = parse_number(trim(head));
    }
  }
  std::string_view tail = trim(s.substr(p + 2));
  double div = 1.0;
  if (!tail.empty()) {
    if (tail.front() != '/') throw ConfigError("bad angle '" + std::string(s) + "'");
    div = parse_number(trim(tail.substr(1)));
    if (div == 0.0) throw ConfigError("bad angle '" + std::string(s) + "'");
  }
  return coef * std::numbers::pi / div;
}

std::vector<double> parse_grid(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.empty()) throw ConfigError("empty SNR grid");
  std::vector<double> out;
  if (s.find(':') != std::string_view::npos) {
    const auto c1 = s.find(':');
    const auto c2 = s.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw ConfigError("SNR range must be start:step:stop");
    const double a = parse_number(trim(s.substr(0, c1)));
    const double step = parse_number(trim(s.substr(c1 + 1, c2 - c1 - 1)));
    const double b = parse_number(trim(s.substr(c2 + 1)));
    if (!(step > 0.0) || b < a) throw ConfigError("SNR range must be increasing with a positive step");
    const auto n = static_cast<std::int64_t>(std::floor((b - a) / step + 1e-9));
    for (std::int64_t i = 0; i <= n; ++i) out.push_back(a + static_cast<double>(i) * step);
    return out;
  }
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto c = s.find(',', start);
    const auto item = s.substr(start, c == std::string_view::npos ? std::string_view::npos : c - start);
    out.push_back(parse_number(trim(item)));
    if (c == std::string_view::npos) break;
    start = c + 1;
  }
  return out;
}

namespace {

std::optional<double> json_angle(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_angle(v.get<std::string>());
  throw ConfigError("angle must be a number or a string");
}

}  // namespace

void apply_json(ExperimentConfig& cfg, std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "scheme") cfg.scheme = parse_scheme(v.get<std::string>());
      else if (key == "decoder") cfg.decoder = parse_decoder(v.get<std::string>());
      else if (key == "antennas") cfg.antennas = v.get<int>();
      else if (key == "snr_db") cfg.snr_db = v.is_array() ? v.get<std::vector<double>>()
                                            : v.is_string() ? parse_grid(v.get<std::string>())
                                                            : std::vector<double>{v.get<double>()};
      else if (key == "dphi1") cfg.dphi1 = json_angle(v);
      else if (key == "dphi2") cfg.dphi2 = json_angle(v);
      else if (key == "amp_a") cfg.amp_a = v.get<double>();
      else if (key == "amp_b") cfg.amp_b = v.get<double>();
      else if (key == "phase_jitter") cfg.phase_jitter = v.get<double>();
      else if (key == "trials") cfg.trials = v.get<std::int64_t>();
      else if (key == "frame_source_bits") cfg.frame_source_bits = v.get<std::size_t>();
      else if (key == "seed") cfg.seed = v.get<std::uint64_t>();
      else if (key == "nearest_k") cfg.nearest_k = v.get<int>();
      else if (key == "threads") cfg.threads = v.get<int>();
      else if (key == "L_A") cfg.L_A = v.get<int>();
      else if (key == "L_B") cfg.L_B = v.get<int>();
      else if (key == "N") cfg.N = v.get<int>();
      else if (key == "payload_bytes") cfg.payload_bytes = v.get<int>();
      else if (key == "beacons") cfg.beacons = v.get<std::int64_t>();
      else if (key == "session") cfg.session = parse_mode(v.get<std::string>());
      else if (key == "trace") cfg.trace_path = v.get<std::string>();
      else throw ConfigError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg;
  apply_json(cfg, ss.str());
  return cfg;
}

// ---------------------------------------------------------------------------
// PHY link simulation

namespace {

struct Frame {
  Bits src_a;  // padded source bits
  Bits src_b;
  ChannelState channel;
  std::vector<RxSamplePair> rx;
};

Bits random_bits(std::size_t n, Rng& rng) {
  Bits out(n);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i % 64 == 0) word = rng();
    out[i] = static_cast<std::uint8_t>(word & 1u);
    word >>= 1;
  }
  return out;
}

Bits bytes_to_bits(const mac::Bytes& bytes) {
  Bits out;
  out.reserve(bytes.size() * 8);
  for (auto b : bytes) {
    for (int k = 7; k >= 0; --k) out.push_back(static_cast<std::uint8_t>((b >> k) & 1u));
  }
  return out;
}

ChannelState frame_channel(const ExperimentConfig& cfg, double sigma_sq, Rng& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  const double d1 = cfg.dphi1 ? *cfg.dphi1 : phase(rng);
  const double d2 = cfg.dphi2 ? *cfg.dphi2 : phase(rng);
  ChannelState ch = from_phase_offsets(d1, d2, cfg.amp_a, cfg.amp_b, sigma_sq, sigma_sq, cfg.antennas);
  ch.phase_jitter = cfg.phase_jitter;
  return ch;
}

// `src_a`/`src_b` hold the information bits; zero padding is appended so the
// codeword fills whole symbols.
Frame transmit_frame(const ExperimentConfig& cfg, double sigma_sq, Bits src_a, Bits src_b, Rng& rng) {
  Frame f;
  const std::size_t padded = fec::padded_source_bits(src_a.size(), cfg.scheme);
  src_a.resize(padded, 0);
  src_b.resize(padded, 0);
  f.channel = frame_channel(cfg, sigma_sq, rng);
  const auto sym_a = modulate(fec::conv_encode(src_a), cfg.scheme);
  const auto sym_b = modulate(fec::conv_encode(src_b), cfg.scheme);
  f.rx.reserve(sym_a.size());
  for (std::size_t k = 0; k < sym_a.size(); ++k) f.rx.push_back(transmit(sym_a[k], sym_b[k], f.channel, rng));
  f.src_a = std::move(src_a);
  f.src_b = std::move(src_b);
  return f;
}

Frame random_frame(const ExperimentConfig& cfg, double sigma_sq, Rng& rng) {
  Bits a = random_bits(cfg.frame_source_bits, rng);
  Bits b = random_bits(cfg.frame_source_bits, rng);
  return transmit_frame(cfg, sigma_sq, std::move(a), std::move(b), rng);
}

Bits decode_bit_level(const JointConstellation& jc, std::span<const RxSamplePair> rx, bool pnc, User user) {
  const auto bps = static_cast<std::size_t>(bits_per_symbol(jc.scheme()));
  std::vector<double> llr(rx.size() * bps);
  for (std::size_t k = 0; k < rx.size(); ++k) {
    const std::span<double> out(llr.data() + k * bps, bps);
    if (pnc) {
      demod::pnc_bit_llr(rx[k], jc, out);
    } else {
      demod::mud_bit_llr(rx[k], jc, user, out);
    }
  }
  return fec::viterbi_bit(llr);
}

template <typename SoftFn>
Bits decode_symbol_level(const JointConstellation& jc, std::span<const RxSamplePair> rx, SoftFn soft) {
  std::vector<fec::SoftSymbolVector> v;
  v.reserve(rx.size());
  for (const auto& y : rx) v.push_back(soft(y));
  return fec::viterbi_symbol(v, jc.scheme());
}

/// Estimate of the XOR source bits.
Bits decode_pnc(Decoder d, const JointConstellation& jc, std::span<const RxSamplePair> rx, int k) {
  switch (d) {
    case Decoder::PncBit: return decode_bit_level(jc, rx, true, User::A);
    case Decoder::PncSymbol:
      return decode_symbol_level(jc, rx, [&](const RxSamplePair& y) { return demod::pnc_symbol_logprob(y, jc); });
    case Decoder::PncNearest:
      return decode_symbol_level(jc, rx, [&](const RxSamplePair& y) { return demod::pnc_nearest_point(y, jc, k); });
    default: break;
  }
  throw ConfigError(std::string(to_string(d)) + " is not a PNC decoder");
}

/// Estimate of one user's source bits.
Bits decode_mud(Decoder d, const JointConstellation& jc, std::span<const RxSamplePair> rx, User user) {
  switch (d) {
    case Decoder::MudBit: return decode_bit_level(jc, rx, false, user);
    case Decoder::MudSymbol:
      return decode_symbol_level(jc, rx,
                                 [&](const RxSamplePair& y) { return demod::mud_symbol_logprob(y, jc, user); });
    case Decoder::MudReduced:
      return decode_symbol_level(jc, rx, [&](const RxSamplePair& y) { return demod::mud_reduced(y, jc, user); });
    default: break;
  }
  throw ConfigError(std::string(to_string(d)) + " is not a MUD decoder");
}

std::int64_t count_errors(const Bits& truth, const Bits& est, std::size_t n) {
  std::int64_t e = 0;
  for (std::size_t i = 0; i < n; ++i) e += (truth[i] != est[i]) ? 1 : 0;
  return e;
}

Bits xor_bits(const Bits& a, const Bits& b) {
  Bits out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

int worker_count(const ExperimentConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs body(i, worker) for i in [0, n) on a pool; each worker owns its
// accumulator slot so reduction order never affects integer results.
template <typename Body>
void parallel_for(std::int64_t n, int workers, Body body) {
  workers = static_cast<int>(std::min<std::int64_t>(workers, std::max<std::int64_t>(n, 1)));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i, 0);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mu;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::int64_t i = next++; i < n; i = next++) body(i, w);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::string angle_label(const std::optional<double>& a) { return a ? format_value(*a) : "uniform"; }

ResultRow base_row(const ExperimentConfig& cfg, double snr, std::string_view decoder) {
  ResultRow r;
  r.scheme = std::string(to_string(cfg.scheme));
  r.decoder = std::string(decoder);
  r.antennas = cfg.antennas;
  r.snr_db = snr;
  r.dphi1 = angle_label(cfg.dphi1);
  r.dphi2 = angle_label(cfg.dphi2);
  r.trials = cfg.trials;
  r.seed = cfg.seed;
  return r;
}

std::string decoder_label(const ExperimentConfig& cfg) {
  std::string s(to_string(cfg.decoder));
  if (cfg.decoder == Decoder::PncNearest) s += fmt::format("{}", cfg.nearest_k);
  return s;
}

}  // namespace

std::vector<BerPoint> ber_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const int workers = worker_count(cfg);
  std::vector<BerPoint> points;
  for (std::size_t p = 0; p < cfg.snr_db.size(); ++p) {
    const double sigma_sq = sigma_from_snr(cfg.snr_db[p], cfg.scheme);
    std::vector<BerPoint> partial(static_cast<std::size_t>(workers));
    parallel_for(cfg.trials, workers, [&](std::int64_t t, int w) {
      Rng rng = substream(cfg.seed, p, static_cast<std::uint64_t>(t));
      const Frame f = random_frame(cfg, sigma_sq, rng);
      const JointConstellation jc(f.channel, cfg.scheme);
      const std::size_t n = cfg.frame_source_bits;
      BerPoint& acc = partial[static_cast<std::size_t>(w)];
      if (is_pnc(cfg.decoder)) {
        const Bits est = decode_pnc(cfg.decoder, jc, f.rx, cfg.nearest_k);
        const std::int64_t e = count_errors(xor_bits(f.src_a, f.src_b), est, n);
        acc.bit_errors += e;
        acc.bits += static_cast<std::int64_t>(n);
        acc.frame_errors += e > 0 ? 1 : 0;
        acc.frames += 1;
      } else {
        for (User u : {User::A, User::B}) {
          const Bits est = decode_mud(cfg.decoder, jc, f.rx, u);
          const std::int64_t e = count_errors(u == User::A ? f.src_a : f.src_b, est, n);
          acc.bit_errors += e;
          acc.bits += static_cast<std::int64_t>(n);
          acc.frame_errors += e > 0 ? 1 : 0;
          acc.frames += 1;
        }
      }
    });
    BerPoint total;
    total.snr_db = cfg.snr_db[p];
    for (const auto& b : partial) {
      total.bit_errors += b.bit_errors;
      total.bits += b.bits;
      total.frame_errors += b.frame_errors;
      total.frames += b.frames;
    }
    points.push_back(total);
  }
  return points;
}

std::vector<ResultRow> run_ber_sweep(const ExperimentConfig& cfg) {
  std::vector<ResultRow> rows;
  for (const auto& pt : ber_sweep(cfg)) {
    ResultRow r = base_row(cfg, pt.snr_db, decoder_label(cfg));
    r.metric = "ber";
    r.value = pt.ber();
    rows.push_back(r);
    r.metric = "per";
    r.value = pt.per();
    rows.push_back(r);
  }
  return rows;
}

mac::EventCounts PhyStatsPoint::event_counts() const {
  mac::EventCounts c{};
  for (int i = 0; i < 8; ++i) {
    c[static_cast<std::size_t>(mac::classify_slot(mac::outcome_from_index(i)))] +=
        outcome_counts[static_cast<std::size_t>(i)];
  }
  return c;
}

mac::EventProbs PhyStatsPoint::event_probs() const {
  mac::EventProbs p{};
  const auto c = event_counts();
  for (std::size_t e = 0; e < p.size(); ++e) p[e] = slots ? static_cast<double>(c[e]) / static_cast<double>(slots) : 0.0;
  return p;
}

std::array<double, 8> PhyStatsPoint::outcome_probs() const {
  std::array<double, 8> p{};
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = slots ? static_cast<double>(outcome_counts[i]) / static_cast<double>(slots) : 0.0;
  }
  return p;
}

std::pair<Decoder, Decoder> decoder_pair(Decoder d) {
  switch (d) {
    case Decoder::PncBit:
    case Decoder::MudBit: return {Decoder::PncBit, Decoder::MudBit};
    case Decoder::PncSymbol:
    case Decoder::MudSymbol: return {Decoder::PncSymbol, Decoder::MudSymbol};
    case Decoder::MudReduced: return {Decoder::PncSymbol, Decoder::MudReduced};
    case Decoder::PncNearest: return {Decoder::PncNearest, Decoder::MudReduced};
  }
  return {Decoder::PncBit, Decoder::MudBit};
}

namespace {

// Decodes one slot with both decoders; returns the genie-verified outcome.
mac::SlotOutcome decode_slot(const ExperimentConfig& cfg, const Frame& f, std::size_t n, std::int64_t slot) {
  const auto [pnc, mud] = decoder_pair(cfg.decoder);
  const JointConstellation jc(f.channel, cfg.scheme);
  const Bits x = decode_pnc(pnc, jc, f.rx, cfg.nearest_k);
  const Bits a = decode_mud(mud, jc, f.rx, User::A);
  const Bits b = decode_mud(mud, jc, f.rx, User::B);
  mac::SlotOutcome o;
  o.slot = slot;
  o.got_a = count_errors(f.src_a, a, n) == 0;
  o.got_b = count_errors(f.src_b, b, n) == 0;
  o.got_x = count_errors(xor_bits(f.src_a, f.src_b), x, n) == 0;
  return o;
}

}  // namespace

std::vector<PhyStatsPoint> phy_stats(const ExperimentConfig& cfg, std::vector<mac::SlotOutcome>* trace) {
  cfg.validate();
  const int workers = worker_count(cfg);
  std::vector<PhyStatsPoint> points;
  if (trace) trace->clear();
  for (std::size_t p = 0; p < cfg.snr_db.size(); ++p) {
    const double sigma_sq = sigma_from_snr(cfg.snr_db[p], cfg.scheme);
    std::vector<mac::SlotOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    parallel_for(cfg.trials, workers, [&](std::int64_t t, int) {
      Rng rng = substream(cfg.seed, p, static_cast<std::uint64_t>(t));
      const Frame f = random_frame(cfg, sigma_sq, rng);
      outcomes[static_cast<std::size_t>(t)] = decode_slot(cfg, f, cfg.frame_source_bits, t);
    });
    PhyStatsPoint pt;
    pt.snr_db = cfg.snr_db[p];
    pt.slots = cfg.trials;
    for (const auto& o : outcomes) ++pt.outcome_counts[static_cast<std::size_t>(mac::outcome_index(o))];
    points.push_back(pt);
    if (trace) trace->insert(trace->end(), outcomes.begin(), outcomes.end());
  }
  return points;
}

std::vector<ResultRow> run_phy_stats(const ExperimentConfig& cfg) {
  const auto [pnc, mud] = decoder_pair(cfg.decoder);
  std::string label = std::string(to_string(pnc)) + "+" + std::string(to_string(mud));
  if (pnc == Decoder::PncNearest) label = decoder_label(cfg) + "+" + std::string(to_string(mud));
  std::vector<ResultRow> rows;
  for (const auto& pt : phy_stats(cfg)) {
    const auto probs = pt.event_probs();
    for (mac::Event e : mac::kAllEvents) {
      ResultRow r = base_row(cfg, pt.snr_db, label);
      r.metric = "event_prob_" + std::string(mac::event_name(e));
      r.value = probs[static_cast<std::size_t>(e)];
      rows.push_back(r);
    }
  }
  return rows;
}

namespace {

mac::SessionConfig session_config(const ExperimentConfig& cfg, std::size_t point) {
  mac::SessionConfig s;
  s.L_A = cfg.L_A;
  s.L_B = cfg.L_B;
  s.N = cfg.N;
  s.payload_bytes = cfg.payload_bytes;
  s.n_beacons = cfg.beacons;
  s.seed = mix64(cfg.seed ^ (0x100000001b3ULL * (point + 1)));
  return s;
}

ThroughputPoint finish_point(double snr, const mac::SessionStats& stats, const ExperimentConfig& cfg) {
  ThroughputPoint tp;
  tp.snr_db = snr;
  tp.stats = stats;
  tp.throughput = mac::throughput(stats, cfg.L_A, cfg.L_B);
  tp.upper_bound = mac::upper_bound(stats.event_probs());
  return tp;
}

mac::PhyOracle full_phy_oracle(const ExperimentConfig& cfg, std::size_t point) {
  const double sigma_sq = sigma_from_snr(cfg.snr_db[point], cfg.scheme);
  return [cfg, point, sigma_sq](std::int64_t slot, const mac::Bytes& pa, const mac::Bytes& pb) {
    Rng rng = substream(cfg.seed ^ 0xf011ULL, point, static_cast<std::uint64_t>(slot));
    const Frame f = transmit_frame(cfg, sigma_sq, bytes_to_bits(pa), bytes_to_bits(pb), rng);
    const mac::SlotOutcome o = decode_slot(cfg, f, pa.size() * 8, slot);
    mac::SlotDecode d;
    if (o.got_a) d.a = pa;
    if (o.got_b) d.b = pb;
    if (o.got_x) d.x = mac::xor_bytes(pa, pb);
    return d;
  };
}

}  // namespace

std::vector<ThroughputPoint> throughput_sweep(const ExperimentConfig& cfg, const std::vector<mac::SlotOutcome>* trace) {
  cfg.validate();
  std::vector<ThroughputPoint> out;
  if (cfg.session == SessionMode::Trace || trace) {
    std::vector<mac::SlotOutcome> loaded;
    if (!trace) {
      std::ifstream in(cfg.trace_path);
      if (!in) throw ConfigError("cannot open trace file '" + cfg.trace_path + "'");
      loaded = mac::read_trace(in);
      if (loaded.empty()) throw ConfigError("trace file '" + cfg.trace_path + "' has no slots");
      trace = &loaded;
    }
    const auto stats = mac::run_session(mac::trace_oracle(*trace), session_config(cfg, 0));
    out.push_back(finish_point(std::numeric_limits<double>::quiet_NaN(), stats, cfg));
    return out;
  }

  if (cfg.session == SessionMode::Stats) {
    const auto phy = phy_stats(cfg);
    for (std::size_t p = 0; p < phy.size(); ++p) {
      const auto probs = phy[p].outcome_probs();
      const auto stats = mac::run_session(mac::sampled_oracle(probs, mix64(cfg.seed + p)), session_config(cfg, p));
      out.push_back(finish_point(phy[p].snr_db, stats, cfg));
    }
    return out;
  }

  out.resize(cfg.snr_db.size());
  parallel_for(static_cast<std::int64_t>(cfg.snr_db.size()), worker_count(cfg), [&](std::int64_t p, int) {
    const auto pi = static_cast<std::size_t>(p);
    const auto stats = mac::run_session(full_phy_oracle(cfg, pi), session_config(cfg, pi));
    out[pi] = finish_point(cfg.snr_db[pi], stats, cfg);
  });
  return out;
}

std::vector<ResultRow> run_throughput(const ExperimentConfig& cfg) {
  std::vector<ResultRow> rows;
  const auto [pnc, mud] = decoder_pair(cfg.decoder);
  const std::string label = cfg.session == SessionMode::Trace
                                ? std::string("trace")
                                : (pnc == Decoder::PncNearest ? decoder_label(cfg) : std::string(to_string(pnc))) +
                                      "+" + std::string(to_string(mud));
  for (const auto& tp : throughput_sweep(cfg)) {
    ResultRow r = base_row(cfg, tp.snr_db, label);
    r.trials = tp.stats.n_beacon;
    r.metric = "throughput";
    r.value = tp.throughput;
    rows.push_back(r);
    r.metric = "upper_bound";
    r.value = tp.upper_bound;
    rows.push_back(r);
  }
  return rows;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  if (v == 0.0) return "0";
  return fmt::format("{:.6g}", v);
}

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.scheme << ',' << r.decoder << ',' << r.antennas << ',' << format_value(r.snr_db) << ',' << r.dphi1 << ','
        << r.dphi2 << ',' << r.metric << ',' << format_value(r.value) << ',' << r.trials << ',' << r.seed << '\n';
  }
}

void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing: " + std::strerror(errno));
  write_csv(out, rows);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path + "': " + std::strerror(errno));
}

}  // namespace ncma::harness
