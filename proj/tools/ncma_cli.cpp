// ncma: BER sweeps, PHY event statistics and throughput simulation.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "ncma/errors.hpp"
#include "ncma/harness.hpp"
#include "ncma/mac.hpp"

namespace {

using namespace ncma;
using namespace ncma::harness;

struct Flags {
  std::string config;
  std::string scheme;
  std::string decoder;
  std::optional<int> antennas;
  std::string snr;
  std::string dphi1;
  std::string dphi2;
  std::optional<std::int64_t> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> frame_bits;
  std::optional<int> k;
  std::optional<int> threads;
  std::optional<double> jitter;
  std::optional<std::int64_t> beacons;
  std::optional<int> l_a;
  std::optional<int> l_b;
  std::optional<int> n;
  std::string mode;
  std::string trace;
  std::string trace_out;
  std::string out;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "JSON file mirroring the experiment fields");
  sub->add_option("--scheme", f.scheme, "bpsk | qpsk | qam16");
  sub->add_option("--decoder", f.decoder,
                  "pnc_bit | pnc_symbol | mud_bit | mud_symbol | mud_reduced | pnc_nearest_k");
  sub->add_option("--antennas", f.antennas, "1 or 2");
  sub->add_option("--snr", f.snr, "per-antenna SNR grid in dB: 4:2:12 or 4,6,8");
  sub->add_option("--dphi1", f.dphi1, "relative phase at antenna 1: radians, pi/4, or uniform");
  sub->add_option("--dphi2", f.dphi2, "relative phase at antenna 2");
  sub->add_option("--trials", f.trials, "frames (slots) per SNR point");
  sub->add_option("--seed", f.seed, "64-bit master seed");
  sub->add_option("--frame-bits", f.frame_bits, "information bits per frame");
  sub->add_option("--k", f.k, "candidates per user for pnc_nearest_k (1 or 4)");
  sub->add_option("--threads", f.threads, "worker threads (0: all cores)");
  sub->add_option("--jitter", f.jitter, "std-dev of B's per-symbol phase jitter (rad)");
  sub->add_option("--out", f.out, "CSV output path (default stdout)");
}

ExperimentConfig build_config(const Flags& f) {
  ExperimentConfig cfg;
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw ConfigError("cannot open config '" + f.config + "'");
    cfg = load_config(in);
  }
  if (!f.scheme.empty()) cfg.scheme = parse_scheme(f.scheme);
  if (!f.decoder.empty()) cfg.decoder = parse_decoder(f.decoder);
  if (f.antennas) cfg.antennas = *f.antennas;
  if (!f.snr.empty()) cfg.snr_db = parse_grid(f.snr);
  if (!f.dphi1.empty()) cfg.dphi1 = parse_angle(f.dphi1);
  if (!f.dphi2.empty()) cfg.dphi2 = parse_angle(f.dphi2);
  if (f.trials) cfg.trials = *f.trials;
  if (f.seed) cfg.seed = *f.seed;
  if (f.frame_bits) cfg.frame_source_bits = *f.frame_bits;
  if (f.k) cfg.nearest_k = *f.k;
  if (f.threads) cfg.threads = *f.threads;
  if (f.jitter) cfg.phase_jitter = *f.jitter;
  if (f.beacons) cfg.beacons = *f.beacons;
  if (f.l_a) cfg.L_A = *f.l_a;
  if (f.l_b) cfg.L_B = *f.l_b;
  if (f.n) cfg.N = *f.n;
  if (!f.mode.empty()) {
    if (f.mode == "stats") cfg.session = SessionMode::Stats;
    else if (f.mode == "trace") cfg.session = SessionMode::Trace;
    else if (f.mode == "full") cfg.session = SessionMode::Full;
    else throw ConfigError("unknown --mode '" + f.mode + "'");
  }
  if (!f.trace.empty()) {
    cfg.trace_path = f.trace;
    if (f.mode.empty()) cfg.session = SessionMode::Trace;
  }
  if (cfg.session == SessionMode::Trace && cfg.trace_path.empty()) throw ConfigError("trace mode needs --trace");
  cfg.validate();
  return cfg;
}

void output(const std::vector<ResultRow>& rows, const std::string& path) {
  if (path.empty() || path == "-") {
    write_csv(std::cout, rows);
  } else {
    emit_csv(rows, path);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network-coded multiple access link and MAC simulator"};
  app.require_subcommand(1);
  Flags f;

  auto* ber = app.add_subcommand("ber", "post-decoding BER/PER sweep");
  add_common(ber, f);

  auto* phy = app.add_subcommand("phystats", "per-slot event frequencies from both decoders");
  add_common(phy, f);
  phy->add_option("--trace-out", f.trace_out, "also write per-slot outcomes (single SNR point)");

  auto* thr = app.add_subcommand("throughput", "session throughput and its upper bound");
  add_common(thr, f);
  thr->add_option("--mode", f.mode, "stats | trace | full");
  thr->add_option("--trace", f.trace, "slot_outcomes_v1 trace file (implies --mode trace)");
  thr->add_option("--beacons", f.beacons, "slots per session");
  thr->add_option("--la", f.l_a, "source packets per message of A");
  thr->add_option("--lb", f.l_b, "source packets per message of B");
  thr->add_option("--n", f.n, "coded packets per message");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig cfg = build_config(f);
    if (ber->parsed()) {
      output(run_ber_sweep(cfg), f.out);
    } else if (phy->parsed()) {
      if (!f.trace_out.empty()) {
        if (cfg.snr_db.size() != 1) throw ConfigError("--trace-out needs a single SNR point");
        std::vector<mac::SlotOutcome> trace;
        phy_stats(cfg, &trace);
        std::ofstream t(f.trace_out);
        if (!t) throw std::runtime_error("cannot open '" + f.trace_out + "' for writing");
        mac::write_trace(t, trace);
      }
      output(run_phy_stats(cfg), f.out);
    } else {
      output(run_throughput(cfg), f.out);
    }
  } catch (const ParseError& e) {
    std::cerr << "ncma: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "ncma: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ncma: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
