#include "ncma/mac.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <string>

#include "ncma/errors.hpp"

namespace ncma::mac {

PacketKind native_kind(Owner owner) noexcept {
  return owner == Owner::A ? PacketKind::NativeA : PacketKind::NativeB;
}

std::vector<Packet> erasure_encode(const Message& msg, int L, int N) {
  const ErasureCode code(L, N);
  auto coded = code.encode(msg.payload);
  std::vector<Packet> out;
  out.reserve(coded.size());
  for (int i = 0; i < N; ++i) {
    out.push_back(Packet{msg.id, i, native_kind(msg.owner), std::move(coded[static_cast<std::size_t>(i)])});
  }
  return out;
}

std::vector<Packet> re_encode_packets(const Message& msg, int L, int N) { return erasure_encode(msg, L, N); }

DecodeResult erasure_decode(std::span<const Packet> packets, int L) {
  if (packets.empty()) return {};
  for (const auto& p : packets) {
    if (p.kind == PacketKind::Xor) throw ProtocolError("erasure_decode: XOR packets must be bridged first");
    if (p.kind != packets.front().kind || p.msg_id != packets.front().msg_id) {
      throw ProtocolError("erasure_decode: packets belong to different messages");
    }
  }
  // Generator rows do not depend on N, so the largest code serves every N.
  const ErasureCode code(L, 255);
  std::vector<std::pair<int, Bytes>> indexed;
  indexed.reserve(packets.size());
  for (const auto& p : packets) indexed.emplace_back(p.index, p.payload);
  auto payload = code.decode(indexed);
  if (!payload) return {};

  const Owner owner = packets.front().kind == PacketKind::NativeA ? Owner::A : Owner::B;
  DecodeResult r{DecodeStatus::Ok, Message{packets.front().msg_id, std::move(*payload), owner}};
  for (const auto& p : packets) {
    if (code.encode_one(r.message->payload, p.index) != p.payload) {
      r.status = DecodeStatus::Inconsistent;
      break;
    }
  }
  return r;
}

std::string_view event_name(Event e) noexcept {
  switch (e) {
    case Event::None: return "NONE";
    case Event::X: return "X";
    case Event::AorB: return "A|B";
    case Event::AXorBX: return "AX|BX";
    case Event::AB: return "AB";
    case Event::ABX: return "ABX";
  }
  return "?";
}

Event classify_slot(const SlotOutcome& o) noexcept {
  const int natives = (o.got_a ? 1 : 0) + (o.got_b ? 1 : 0);
  if (natives == 2) return o.got_x ? Event::ABX : Event::AB;
  if (natives == 1) return o.got_x ? Event::AXorBX : Event::AorB;
  return o.got_x ? Event::X : Event::None;
}

Bytes xor_bytes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw ShapeError("xor_bytes: payload sizes differ");
  Bytes out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

BridgeResult phy_bridge(const SlotOutcome& outcome, const std::optional<Bytes>& pkt_a,
                        const std::optional<Bytes>& pkt_b, const std::optional<Bytes>& pkt_x) {
  const bool has_a = outcome.got_a && pkt_a;
  const bool has_b = outcome.got_b && pkt_b;
  const bool has_x = outcome.got_x && pkt_x;
  BridgeResult r;
  if (has_a) r.a = *pkt_a;
  if (has_b) r.b = *pkt_b;
  if (has_x) {
    if (has_a && !has_b) r.b = xor_bytes(*pkt_a, *pkt_x);
    if (has_b && !has_a) r.a = xor_bytes(*pkt_b, *pkt_x);
    r.lone_x = !has_a && !has_b;
  }
  return r;
}

std::vector<Packet> mac_bridge(const Message& decoded, std::span<const Packet> lone_x, int L, int N) {
  std::vector<Packet> out;
  if (lone_x.empty()) return out;
  const auto natives = re_encode_packets(decoded, L, N);
  const PacketKind other = decoded.owner == Owner::A ? PacketKind::NativeB : PacketKind::NativeA;
  for (const auto& x : lone_x) {
    if (x.index < 0 || x.index >= N) {
      throw ProtocolError("mac_bridge: lone XOR packet index " + std::to_string(x.index) + " outside [0, " +
                          std::to_string(N) + ")");
    }
    out.push_back(Packet{x.msg_id, x.index, other,
                         xor_bytes(natives[static_cast<std::size_t>(x.index)].payload, x.payload)});
  }
  return out;
}

Bytes crc_append(std::span<const std::uint8_t> payload) {
  const uLong crc = crc32(crc32(0L, Z_NULL, 0), payload.data(), static_cast<uInt>(payload.size()));
  Bytes out(payload.begin(), payload.end());
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>((crc >> (8 * k)) & 0xffu));
  return out;
}

bool crc_check(std::span<const std::uint8_t> framed) {
  if (framed.size() < 4) return false;
  const auto body = framed.first(framed.size() - 4);
  const uLong crc = crc32(crc32(0L, Z_NULL, 0), body.data(), static_cast<uInt>(body.size()));
  uLong stored = 0;
  for (int k = 0; k < 4; ++k) stored |= static_cast<uLong>(framed[body.size() + static_cast<std::size_t>(k)]) << (8 * k);
  return crc == stored;
}

bool verify_packet(std::span<const std::uint8_t> decoded, VerifyMode mode, std::span<const std::uint8_t> truth) {
  if (mode == VerifyMode::Crc) return crc_check(decoded);
  return std::equal(decoded.begin(), decoded.end(), truth.begin(), truth.end());
}

EventProbs SessionStats::event_probs() const {
  EventProbs p{};
  if (n_beacon <= 0) return p;
  for (int e = 0; e < kEventCount; ++e) {
    p[static_cast<std::size_t>(e)] =
        static_cast<double>(event_counts[static_cast<std::size_t>(e)]) / static_cast<double>(n_beacon);
  }
  return p;
}

double throughput(const SessionStats& stats, int L_A, int L_B) {
  if (stats.n_beacon <= 0) throw ConfigError("throughput: no beacons");
  return (static_cast<double>(L_A) * static_cast<double>(stats.n_a) +
          static_cast<double>(L_B) * static_cast<double>(stats.n_b)) /
         static_cast<double>(stats.n_beacon);
}

double upper_bound(const EventProbs& p) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ConfigError("upper_bound: negative or NaN probability");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("upper_bound: event probabilities must sum to 1");
  auto at = [&](Event e) { return p[static_cast<std::size_t>(e)]; };
  return 2.0 * (at(Event::ABX) + at(Event::AXorBX) + at(Event::AB)) + (at(Event::AorB) + at(Event::X));
}

int outcome_index(const SlotOutcome& o) noexcept {
  return (o.got_a ? 4 : 0) | (o.got_b ? 2 : 0) | (o.got_x ? 1 : 0);
}

SlotOutcome outcome_from_index(int idx, std::int64_t slot) noexcept {
  return SlotOutcome{(idx & 4) != 0, (idx & 2) != 0, (idx & 1) != 0, slot};
}

namespace {

SlotDecode deliver(const SlotOutcome& o, const Bytes& a, const Bytes& b) {
  SlotDecode d;
  if (o.got_a) d.a = a;
  if (o.got_b) d.b = b;
  if (o.got_x) d.x = xor_bytes(a, b);
  return d;
}

struct UserState {
  Owner owner;
  int L;
  std::int64_t seq = -1;
  Message truth;
  std::vector<Bytes> coded;
  std::vector<std::optional<Bytes>> known;
  int known_count = 0;
  int next_index = 0;
  bool decoded = false;
  // Re-encoded packets of decoded messages still referenced by lone XORs.
  std::map<std::int64_t, std::vector<Bytes>> archive;
};

struct LoneX {
  std::int64_t a_seq;
  int a_idx;
  std::int64_t b_seq;
  int b_idx;
  Bytes x;
};

class Session {
 public:
  Session(const SessionConfig& cfg)
      : cfg_(cfg), code_a_(cfg.L_A, cfg.N), code_b_(cfg.L_B, cfg.N), rng_(mix64(cfg.seed)) {
    if (cfg.payload_bytes <= 0) throw ConfigError("payload_bytes must be positive");
    if (cfg.n_beacons <= 0) throw ConfigError("n_beacons must be positive");
    a_.owner = Owner::A;
    a_.L = cfg.L_A;
    b_.owner = Owner::B;
    b_.L = cfg.L_B;
    start_message(a_);
    start_message(b_);
  }

  SessionStats run(const PhyOracle& phy) {
    for (std::int64_t t = 0; t < cfg_.n_beacons; ++t) slot(t, phy);
    stats_.n_beacon = cfg_.n_beacons;
    return stats_;
  }

 private:
  const ErasureCode& code(const UserState& u) const { return u.owner == Owner::A ? code_a_ : code_b_; }

  void start_message(UserState& u) {
    ++u.seq;
    u.truth.id = u.seq;
    u.truth.owner = u.owner;
    u.truth.payload.resize(static_cast<std::size_t>(u.L) * static_cast<std::size_t>(cfg_.payload_bytes));
    for (auto& byte : u.truth.payload) byte = static_cast<std::uint8_t>(rng_() & 0xffu);
    u.coded = code(u).encode(u.truth.payload);
    u.known.assign(static_cast<std::size_t>(cfg_.N), std::nullopt);
    u.known_count = 0;
    u.next_index = 0;
    u.decoded = false;
  }

  void slot(std::int64_t t, const PhyOracle& phy) {
    const int ia = a_.next_index % cfg_.N;
    const int ib = b_.next_index % cfg_.N;
    const SlotDecode got = phy(t, a_.coded[static_cast<std::size_t>(ia)], b_.coded[static_cast<std::size_t>(ib)]);
    const SlotOutcome outcome{got.a.has_value(), got.b.has_value(), got.x.has_value(), t};
    ++stats_.event_counts[static_cast<std::size_t>(classify_slot(outcome))];
    ++stats_.outcome_counts[static_cast<std::size_t>(outcome_index(outcome))];

    const BridgeResult br = phy_bridge(outcome, got.a, got.b, got.x);
    if (br.a) {
      if (!got.a) ++stats_.phy_bridged;
      add_native(a_, ia, *br.a);
    }
    if (br.b) {
      if (!got.b) ++stats_.phy_bridged;
      add_native(b_, ib, *br.b);
    }
    if (br.lone_x) lone_.push_back(LoneX{a_.seq, ia, b_.seq, ib, *got.x});

    resolve();
    prune();

    for (UserState* u : {&a_, &b_}) {
      if (u->decoded) {
        start_message(*u);
      } else {
        ++u->next_index;
      }
    }
  }

  void add_native(UserState& u, int idx, const Bytes& payload) {
    if (u.decoded) return;
    auto& slot = u.known[static_cast<std::size_t>(idx)];
    if (slot) return;
    slot = payload;
    ++u.known_count;
  }

  const Bytes* knows(const UserState& u, std::int64_t seq, int idx) const {
    if (seq == u.seq && !u.decoded) {
      const auto& k = u.known[static_cast<std::size_t>(idx)];
      return k ? &*k : nullptr;
    }
    const auto it = u.archive.find(seq);
    return it == u.archive.end() ? nullptr : &it->second[static_cast<std::size_t>(idx)];
  }

  static bool needs(const UserState& u, std::int64_t seq, int idx) {
    return seq == u.seq && !u.decoded && !u.known[static_cast<std::size_t>(idx)];
  }

  bool try_decode(UserState& u) {
    if (u.decoded || u.known_count < u.L) return false;
    std::vector<std::pair<int, Bytes>> pkts;
    for (int i = 0; i < cfg_.N; ++i) {
      if (u.known[static_cast<std::size_t>(i)]) pkts.emplace_back(i, *u.known[static_cast<std::size_t>(i)]);
    }
    const auto payload = code(u).decode(pkts);
    u.decoded = true;
    if (payload && *payload == u.truth.payload) {
      (u.owner == Owner::A ? stats_.n_a : stats_.n_b) += 1;
    }
    u.archive[u.seq] = payload ? code(u).encode(*payload) : u.coded;
    return true;
  }

  void resolve() {
    bool progress = true;
    while (progress) {
      progress = false;
      for (const auto& x : lone_) {
        if (needs(b_, x.b_seq, x.b_idx)) {
          if (const Bytes* pa = knows(a_, x.a_seq, x.a_idx)) {
            add_native(b_, x.b_idx, xor_bytes(*pa, x.x));
            ++stats_.mac_bridged;
            progress = true;
          }
        }
        if (needs(a_, x.a_seq, x.a_idx)) {
          if (const Bytes* pb = knows(b_, x.b_seq, x.b_idx)) {
            add_native(a_, x.a_idx, xor_bytes(*pb, x.x));
            ++stats_.mac_bridged;
            progress = true;
          }
        }
      }
      progress = try_decode(a_) || progress;
      progress = try_decode(b_) || progress;
    }
  }

  static bool settled(const UserState& u, std::int64_t seq) { return seq != u.seq || u.decoded; }

  void prune() {
    std::erase_if(lone_, [&](const LoneX& x) { return settled(a_, x.a_seq) && settled(b_, x.b_seq); });
    auto referenced = [&](const UserState& u, std::int64_t seq) {
      return std::any_of(lone_.begin(), lone_.end(), [&](const LoneX& x) {
        return (u.owner == Owner::A ? x.a_seq : x.b_seq) == seq;
      });
    };
    for (UserState* u : {&a_, &b_}) {
      std::erase_if(u->archive, [&](const auto& kv) { return !referenced(*u, kv.first); });
    }
  }

  SessionConfig cfg_;
  ErasureCode code_a_;
  ErasureCode code_b_;
  Rng rng_;
  UserState a_;
  UserState b_;
  std::vector<LoneX> lone_;
  SessionStats stats_;
};

}  // namespace

SessionStats run_session(const PhyOracle& phy, const SessionConfig& cfg) {
  if (cfg.L_A > cfg.N || cfg.L_B > cfg.N) throw ConfigError("run_session: L must not exceed N");
  Session s(cfg);
  return s.run(phy);
}

PhyOracle trace_oracle(std::vector<SlotOutcome> trace) {
  if (trace.empty()) throw ConfigError("trace_oracle: empty trace");
  auto shared = std::make_shared<const std::vector<SlotOutcome>>(std::move(trace));
  return [shared](std::int64_t slot, const Bytes& a, const Bytes& b) {
    return deliver((*shared)[static_cast<std::size_t>(slot) % shared->size()], a, b);
  };
}

PhyOracle sampled_oracle(const std::array<double, 8>& outcome_probs, std::uint64_t seed) {
  double sum = 0.0;
  for (double p : outcome_probs) {
    if (!(p >= 0.0)) throw ConfigError("sampled_oracle: negative probability");
    sum += p;
  }
  if (!(sum > 0.0)) throw ConfigError("sampled_oracle: all probabilities are zero");
  struct State {
    Rng rng;
    std::discrete_distribution<int> dist;
  };
  auto st = std::make_shared<State>(State{Rng(mix64(seed ^ 0x5eedULL)),
                                          std::discrete_distribution<int>(outcome_probs.begin(), outcome_probs.end())});
  return [st](std::int64_t slot, const Bytes& a, const Bytes& b) {
    return deliver(outcome_from_index(st->dist(st->rng), slot), a, b);
  };
}

namespace {

bool parse_flag(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw ParseError("trace: expected a boolean, got '" + std::string(s) + "'", line);
}

}  // namespace

std::vector<SlotOutcome> read_trace(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<SlotOutcome> out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "slot_outcomes_v1") throw ParseError("trace: missing 'slot_outcomes_v1' header", lineno);
      header = true;
      continue;
    }
    const std::string_view sv(line);
    const auto c1 = sv.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : sv.find(',', c1 + 1);
    if (c2 == std::string_view::npos || sv.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError("trace: expected 'gotA,gotB,gotX'", lineno);
    }
    out.push_back(SlotOutcome{parse_flag(sv.substr(0, c1), lineno), parse_flag(sv.substr(c1 + 1, c2 - c1 - 1), lineno),
                              parse_flag(sv.substr(c2 + 1), lineno), static_cast<std::int64_t>(out.size())});
  }
  if (!header) throw ParseError("trace: empty input", lineno);
  return out;
}

void write_trace(std::ostream& out, std::span<const SlotOutcome> trace) {
  out << "slot_outcomes_v1\n";
  for (const auto& o : trace) out << (o.got_a ? 1 : 0) << ',' << (o.got_b ? 1 : 0) << ',' << (o.got_x ? 1 : 0) << '\n';
}

}  // namespace ncma::mac
