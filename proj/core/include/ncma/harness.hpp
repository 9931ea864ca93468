#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncma/demod.hpp"
#include "ncma/mac.hpp"
#include "ncma/modem.hpp"

namespace ncma::harness {

enum class Decoder { PncBit, PncSymbol, MudBit, MudSymbol, MudReduced, PncNearest };

std::string_view to_string(Decoder d) noexcept;
Decoder parse_decoder(std::string_view name);
bool is_pnc(Decoder d) noexcept;

enum class SessionMode { Stats, Trace, Full };

struct ExperimentConfig {
  ModScheme scheme = ModScheme::QPSK;
  Decoder decoder = Decoder::PncBit;
  int antennas = 2;
  std::vector<double> snr_db{10.0};
  /// Relative phase offsets in radians; nullopt draws them uniformly on
  /// [0, 2pi) per frame.
  std::optional<double> dphi1 = 0.0;
  std::optional<double> dphi2 = 0.0;
  double amp_a = 1.0;
  double amp_b = 1.0;
  double phase_jitter = 0.0;
  std::int64_t trials = 1000;
  std::size_t frame_source_bits = 128;
  std::uint64_t seed = 1;
  int nearest_k = 4;
  int threads = 0;  // 0: hardware concurrency

  // MAC session
  int L_A = 24;
  int L_B = 16;
  int N = 64;
  int payload_bytes = 32;
  std::int64_t beacons = 10000;
  SessionMode session = SessionMode::Stats;
  std::string trace_path;

  /// Throws ConfigError for invalid values and decoder/scheme combinations.
  void validate() const;
};

/// `{"scheme": "qpsk", "snr_db": [4, 6], "dphi1": "pi/2", ...}`; keys mirror
/// the fields above. Unknown keys are rejected.
ExperimentConfig load_config(std::istream& in);
void apply_json(ExperimentConfig& cfg, std::string_view json_text);

/// Radians from "1.57", "pi", "pi/2", "3*pi/4", "-pi/4"; nullopt for
/// "uniform".
std::optional<double> parse_angle(std::string_view text);

/// "4:2:12" (inclusive range) or "4,6,8" or a single value.
std::vector<double> parse_grid(std::string_view text);

struct ResultRow {
  std::string scheme;
  std::string decoder;
  int antennas = 2;
  double snr_db = 0.0;
  std::string dphi1;
  std::string dphi2;
  std::string metric;
  double value = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

struct BerPoint {
  double snr_db = 0.0;
  std::int64_t bit_errors = 0;
  std::int64_t bits = 0;
  std::int64_t frame_errors = 0;
  std::int64_t frames = 0;

  double ber() const noexcept { return bits ? static_cast<double>(bit_errors) / static_cast<double>(bits) : 0.0; }
  double per() const noexcept {
    return frames ? static_cast<double>(frame_errors) / static_cast<double>(frames) : 0.0;
  }
};

/// Post-decoding BER on information bits: XOR bits for PNC decoders, both
/// users' bits for MUD decoders. Trial streams depend only on (seed, SNR
/// index, trial index), so different decoders see identical frames.
std::vector<BerPoint> ber_sweep(const ExperimentConfig& cfg);
std::vector<ResultRow> run_ber_sweep(const ExperimentConfig& cfg);

struct PhyStatsPoint {
  double snr_db = 0.0;
  std::int64_t slots = 0;
  std::array<std::int64_t, 8> outcome_counts{};

  mac::EventCounts event_counts() const;
  mac::EventProbs event_probs() const;
  std::array<double, 8> outcome_probs() const;
};

/// PNC/MUD decoder pair used for slot statistics: bit-level decoders pair
/// with each other, symbol-level likewise; mud_reduced pairs with
/// pnc_symbol and pnc_nearest_k with mud_reduced.
std::pair<Decoder, Decoder> decoder_pair(Decoder d);

/// Runs both decoders on `cfg.trials` slots per SNR, genie-verifies, and
/// tallies the eight outcomes.
std::vector<PhyStatsPoint> phy_stats(const ExperimentConfig& cfg, std::vector<mac::SlotOutcome>* trace = nullptr);
std::vector<ResultRow> run_phy_stats(const ExperimentConfig& cfg);

struct ThroughputPoint {
  double snr_db = 0.0;
  mac::SessionStats stats;
  double throughput = 0.0;
  double upper_bound = 0.0;
};

/// Trace mode replays `cfg.trace_path` (or `trace`); stats mode samples
/// slots from per-SNR PHY statistics; full mode runs the PHY for every slot.
std::vector<ThroughputPoint> throughput_sweep(const ExperimentConfig& cfg,
                                              const std::vector<mac::SlotOutcome>* trace = nullptr);
std::vector<ResultRow> run_throughput(const ExperimentConfig& cfg);

inline constexpr std::string_view kCsvHeader = "scheme,decoder,antennas,snr_db,dphi1,dphi2,metric,value,trials,seed";

void write_csv(std::ostream& out, const std::vector<ResultRow>& rows);
/// Throws std::runtime_error naming `path` on I/O failure.
void emit_csv(const std::vector<ResultRow>& rows, const std::string& path);

/// Shortest decimal with at most six significant digits.
std::string format_value(double v);

}  // namespace ncma::harness
