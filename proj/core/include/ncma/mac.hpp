#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ncma/erasure.hpp"
#include "ncma/rng.hpp"

namespace ncma::mac {

enum class Owner { A, B };

struct Message {
  std::int64_t id = 0;
  Bytes payload;
  Owner owner = Owner::A;

  friend bool operator==(const Message&, const Message&) = default;
};

enum class PacketKind { NativeA, NativeB, Xor };

struct Packet {
  std::int64_t msg_id = 0;
  int index = 0;
  PacketKind kind = PacketKind::NativeA;
  Bytes payload;

  friend bool operator==(const Packet&, const Packet&) = default;
};

PacketKind native_kind(Owner owner) noexcept;

/// Throws ConfigError unless 1 <= L <= N <= 255, ShapeError unless the
/// payload splits into L equal parts.
std::vector<Packet> erasure_encode(const Message& msg, int L, int N);

/// Identical to erasure_encode; named for its role after a message decodes.
std::vector<Packet> re_encode_packets(const Message& msg, int L, int N);

enum class DecodeStatus { Ok, NotYet, Inconsistent };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::NotYet;
  std::optional<Message> message;
};

/// Native packets of one message (all of the same kind). Decodes from the
/// first L distinct indices; any further packets must agree with the
/// re-encoded message or the status is Inconsistent.
DecodeResult erasure_decode(std::span<const Packet> packets, int L);

/// The eight PHY outcomes of one slot.
struct SlotOutcome {
  bool got_a = false;
  bool got_b = false;
  bool got_x = false;
  std::int64_t slot = 0;
};

enum class Event { None = 0, X, AorB, AXorBX, AB, ABX };
inline constexpr int kEventCount = 6;
inline constexpr std::array<Event, kEventCount> kAllEvents{Event::None, Event::X,  Event::AorB,
                                                           Event::AXorBX, Event::AB, Event::ABX};

std::string_view event_name(Event e) noexcept;
Event classify_slot(const SlotOutcome& outcome) noexcept;

struct BridgeResult {
  std::optional<Bytes> a;
  std::optional<Bytes> b;
  bool lone_x = false;
};

/// Completes the native pair from any two of {A, B, X}; a lone X is flagged
/// for MAC-layer bridging.
BridgeResult phy_bridge(const SlotOutcome& outcome, const std::optional<Bytes>& pkt_a,
                        const std::optional<Bytes>& pkt_b, const std::optional<Bytes>& pkt_x);

/// Converts stored lone XOR packets into the other user's native packets by
/// XOR with the re-encoded packets of a decoded message. Throws
/// ProtocolError for indices outside [0, N).
std::vector<Packet> mac_bridge(const Message& decoded, std::span<const Packet> lone_x, int L, int N);

Bytes xor_bytes(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

enum class VerifyMode { Genie, Crc };

/// CRC-32 (IEEE) appended little-endian.
Bytes crc_append(std::span<const std::uint8_t> payload);
bool crc_check(std::span<const std::uint8_t> framed);

/// Genie mode compares with `truth`; CRC mode validates the trailing CRC-32.
bool verify_packet(std::span<const std::uint8_t> decoded, VerifyMode mode, std::span<const std::uint8_t> truth = {});

using EventCounts = std::array<std::int64_t, kEventCount>;
using EventProbs = std::array<double, kEventCount>;

struct SessionStats {
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  std::int64_t n_beacon = 0;
  EventCounts event_counts{};
  /// Raw outcomes indexed by (got_a << 2) | (got_b << 1) | got_x.
  std::array<std::int64_t, 8> outcome_counts{};
  std::int64_t phy_bridged = 0;
  std::int64_t mac_bridged = 0;

  EventProbs event_probs() const;
};

/// Th = (L_A N_A + L_B N_B) / N_Beacon. Throws ConfigError on zero beacons.
double throughput(const SessionStats& stats, int L_A, int L_B);

/// 2 (P{ABX} + P{AX|BX} + P{AB}) + P{A|B} + P{X}. Throws ConfigError unless
/// the probabilities are non-negative and sum to 1 (1e-9).
double upper_bound(const EventProbs& probs);

/// What the PHY delivered in a slot, already verified.
struct SlotDecode {
  std::optional<Bytes> a;
  std::optional<Bytes> b;
  std::optional<Bytes> x;
};

/// Decodes one slot given the packets both nodes transmitted.
using PhyOracle = std::function<SlotDecode(std::int64_t slot, const Bytes& pkt_a, const Bytes& pkt_b)>;

struct SessionConfig {
  int L_A = 24;
  int L_B = 16;
  int N = 64;
  int payload_bytes = 32;
  std::int64_t n_beacons = 1000;
  std::uint64_t seed = 1;
};

/// Slotted uplink session with ideal feedback.
///
/// Each slot both nodes send the next coded packet of their current message
/// (index cycles through 0..N-1). The AP applies PHY bridging at once,
/// stores lone XOR packets, decodes a message as soon as L distinct native
/// packets are known and then runs MAC bridging, cascading between the two
/// users until nothing new is recovered. A node starts its next message in
/// the slot after its current one decodes. Lone XOR packets are dropped once
/// both messages they reference have decoded.
SessionStats run_session(const PhyOracle& phy, const SessionConfig& cfg);

/// Replays `trace` cyclically, delivering true payloads for the flags set.
PhyOracle trace_oracle(std::vector<SlotOutcome> trace);

/// Draws i.i.d. outcomes from `outcome_probs` (indexed as outcome_counts).
PhyOracle sampled_oracle(const std::array<double, 8>& outcome_probs, std::uint64_t seed);

int outcome_index(const SlotOutcome& o) noexcept;
SlotOutcome outcome_from_index(int idx, std::int64_t slot = 0) noexcept;

/// `slot_outcomes_v1` trace files: header line, then one `gotA,gotB,gotX`
/// line per slot with 0/1 or true/false fields.
std::vector<SlotOutcome> read_trace(std::istream& in);
void write_trace(std::ostream& out, std::span<const SlotOutcome> trace);

}  // namespace ncma::mac
