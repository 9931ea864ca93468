#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ncma/errors.hpp"
#include "ncma/harness.hpp"

using namespace ncma;
using namespace ncma::harness;

namespace {

std::string csv(const std::vector<ResultRow>& rows) {
  std::ostringstream o;
  write_csv(o, rows);
  return o.str();
}

ExperimentConfig quick(ModScheme s, Decoder d) {
  ExperimentConfig c;
  c.scheme = s;
  c.decoder = d;
  c.trials = 40;
  c.frame_source_bits = 64;
  c.snr_db = {4, 8};
  c.dphi1 = 0.6;
  c.dphi2 = 2.0;
  c.threads = 1;
  return c;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("angles and grids") {
    CHECK(*parse_angle("pi/2") == doctest::Approx(std::numbers::pi / 2));
    CHECK(*parse_angle("3*pi/4") == doctest::Approx(3 * std::numbers::pi / 4));
    CHECK(*parse_angle("-pi/4") == doctest::Approx(-std::numbers::pi / 4));
    CHECK(*parse_angle("pi") == doctest::Approx(std::numbers::pi));
    CHECK(*parse_angle("0.25") == doctest::Approx(0.25));
    CHECK_FALSE(parse_angle("uniform").has_value());
    CHECK_THROWS_AS(parse_angle("pie"), ConfigError);
    CHECK_THROWS_AS(parse_angle("pi/0"), ConfigError);

    CHECK(parse_grid("4:2:12") == std::vector<double>{4, 6, 8, 10, 12});
    CHECK(parse_grid("9:0.5:11.5").size() == 6);
    CHECK(parse_grid("4, 6,8") == std::vector<double>{4, 6, 8});
    CHECK(parse_grid("7") == std::vector<double>{7});
    CHECK_THROWS_AS(parse_grid(""), ConfigError);
    CHECK_THROWS_AS(parse_grid("4:0:8"), ConfigError);
    CHECK_THROWS_AS(parse_grid("4,x"), ConfigError);
  }

  TEST_CASE("config validation") {
    ExperimentConfig c;
    CHECK_NOTHROW(c.validate());
    c.decoder = Decoder::MudReduced;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.scheme = ModScheme::QAM16;
    CHECK_NOTHROW(c.validate());
    c.scheme = ModScheme::BPSK;
    c.decoder = Decoder::PncSymbol;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.trials = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.snr_db.clear();
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = ExperimentConfig{};
    c.antennas = 3;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    CHECK(parse_decoder("pnc_nearest_k") == Decoder::PncNearest);
    CHECK_THROWS_AS(parse_decoder("zf"), ConfigError);
  }

  TEST_CASE("json config") {
    ExperimentConfig c;
    apply_json(c, R"({"scheme": "qam16", "decoder": "mud_reduced", "antennas": 1, "snr_db": "10:2:14",
                      "dphi1": "pi/2", "dphi2": "uniform", "trials": 77, "seed": 99, "L_A": 12})");
    CHECK(c.scheme == ModScheme::QAM16);
    CHECK(c.decoder == Decoder::MudReduced);
    CHECK(c.antennas == 1);
    CHECK(c.snr_db == std::vector<double>{10, 12, 14});
    CHECK(*c.dphi1 == doctest::Approx(std::numbers::pi / 2));
    CHECK_FALSE(c.dphi2.has_value());
    CHECK(c.trials == 77);
    CHECK(c.seed == 99u);
    CHECK(c.L_A == 12);
    apply_json(c, R"({"snr_db": [1, 2.5]})");
    CHECK(c.snr_db == std::vector<double>{1, 2.5});
    CHECK_THROWS_AS(apply_json(c, R"({"snr": 3})"), ConfigError);
    CHECK_THROWS_AS(apply_json(c, R"({"trials": "many"})"), ConfigError);
    CHECK_THROWS_AS(apply_json(c, "{"), ConfigError);
    std::istringstream in(R"({"decoder": "pnc_symbol"})");
    CHECK(load_config(in).decoder == Decoder::PncSymbol);
  }

  TEST_CASE("csv format") {
    CHECK(csv({}) == std::string(kCsvHeader) + "\n");
    CHECK(format_value(0.123456789) == "0.123457");
    CHECK(format_value(2.0) == "2");
    CHECK(format_value(1.5e-7) == "1.5e-07");
    CHECK(format_value(0.0) == "0");
    ResultRow r{"qpsk", "pnc_bit", 2, 10, "0", "uniform", "ber", 0.25, 100, 7};
    CHECK(csv({r}) == std::string(kCsvHeader) + "\nqpsk,pnc_bit,2,10,0,uniform,ber,0.25,100,7\n");
  }

  TEST_CASE("csv file output") {
    const auto dir = std::filesystem::temp_directory_path() / "ncma_harness_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "rows.csv").string();
    emit_csv({}, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == kCsvHeader);
    const std::string bad = (dir / "missing" / "rows.csv").string();
    try {
      emit_csv({}, bad);
      FAIL("expected an I/O error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find(bad) != std::string::npos);
    }
  }

  TEST_CASE("ber sweeps are deterministic and thread independent") {
    for (auto d : {Decoder::PncBit, Decoder::MudSymbol}) {
      auto c = quick(ModScheme::QPSK, d);
      c.antennas = 1;
      c.dphi1 = std::nullopt;
      const auto a = csv(run_ber_sweep(c));
      c.threads = 3;
      CHECK(csv(run_ber_sweep(c)) == a);
      c.seed = 2;
      CHECK(csv(run_ber_sweep(c)) != a);
    }
  }

  TEST_CASE("decoders see the same frames for a seed") {
    auto c = quick(ModScheme::QAM16, Decoder::MudSymbol);
    c.dphi1 = std::nullopt;
    c.dphi2 = std::nullopt;
    const auto e = ber_sweep(c);
    c.decoder = Decoder::MudReduced;
    const auto r = ber_sweep(c);
    for (std::size_t i = 0; i < e.size(); ++i) {
      CHECK(e[i].bit_errors == r[i].bit_errors);
      CHECK(e[i].frame_errors == r[i].frame_errors);
    }
  }

  TEST_CASE("ber rows") {
    auto c = quick(ModScheme::QPSK, Decoder::MudBit);
    const auto rows = run_ber_sweep(c);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].metric == "ber");
    CHECK(rows[1].metric == "per");
    CHECK(rows[0].dphi1 == "0.6");
    for (const auto& r : rows) CHECK((r.value >= 0.0 && r.value <= 1.0));
    const auto pts = ber_sweep(c);
    CHECK(pts[0].frames == 80);  // both users
    CHECK(pts[0].bits == 80 * 64);
  }

  TEST_CASE("phy statistics at the extremes") {
    auto c = quick(ModScheme::QPSK, Decoder::PncSymbol);
    c.dphi1 = std::numbers::pi / 2;
    c.dphi2 = 0.0;
    c.snr_db = {200.0, -60.0};
    const auto pts = phy_stats(c);
    CHECK(pts[0].event_probs()[static_cast<std::size_t>(mac::Event::ABX)] == 1.0);
    CHECK(pts[1].event_probs()[static_cast<std::size_t>(mac::Event::None)] == 1.0);
    const auto rows = run_phy_stats(c);
    CHECK(rows.size() == 12);
    double sum = 0;
    for (int i = 0; i < 6; ++i) sum += rows[static_cast<std::size_t>(i)].value;
    CHECK(sum == doctest::Approx(1.0));
    CHECK(rows[5].metric == "event_prob_ABX");
    CHECK(rows[0].decoder == "pnc_symbol+mud_symbol");
  }

  TEST_CASE("event frequencies partition every point") {
    auto c = quick(ModScheme::QPSK, Decoder::PncBit);
    c.antennas = 1;
    c.dphi1 = std::nullopt;
    c.snr_db = {3, 5, 7};
    for (const auto& p : phy_stats(c)) {
      double s = 0;
      for (double v : p.event_probs()) s += v;
      CHECK(s == doctest::Approx(1.0));
    }
  }

  TEST_CASE("decoder pairs") {
    CHECK(decoder_pair(Decoder::MudBit) == std::pair{Decoder::PncBit, Decoder::MudBit});
    CHECK(decoder_pair(Decoder::PncSymbol) == std::pair{Decoder::PncSymbol, Decoder::MudSymbol});
    CHECK(decoder_pair(Decoder::MudReduced) == std::pair{Decoder::PncSymbol, Decoder::MudReduced});
    CHECK(decoder_pair(Decoder::PncNearest) == std::pair{Decoder::PncNearest, Decoder::MudReduced});
  }

  TEST_CASE("throughput from a trace") {
    std::vector<mac::SlotOutcome> all(1, mac::SlotOutcome{true, true, true, 0});
    ExperimentConfig c;
    c.L_A = c.L_B = 16;
    c.beacons = 10000;
    c.session = SessionMode::Trace;
    const auto pts = throughput_sweep(c, &all);
    REQUIRE(pts.size() == 1);
    CHECK(std::isnan(pts[0].snr_db));
    CHECK(pts[0].throughput == doctest::Approx(2.0).epsilon(0.02));
    CHECK(pts[0].upper_bound == doctest::Approx(2.0));

    c.trace_path = "/nonexistent/trace.txt";
    CHECK_THROWS_AS(run_throughput(c), ConfigError);
  }

  TEST_CASE("throughput from statistics and from the full stack") {
    auto c = quick(ModScheme::QPSK, Decoder::PncSymbol);
    c.snr_db = {6};
    c.trials = 200;
    c.beacons = 300;
    c.N = 32;
    c.L_A = 12;
    c.L_B = 8;
    c.payload_bytes = 8;
    for (auto mode : {SessionMode::Stats, SessionMode::Full}) {
      c.session = mode;
      const auto rows = run_throughput(c);
      REQUIRE(rows.size() == 2);
      CHECK(rows[0].metric == "throughput");
      CHECK(rows[1].metric == "upper_bound");
      CHECK(rows[0].trials == 300);
      CHECK(rows[0].value <= rows[1].value + 2.0 * 12 / 300);
      CHECK(rows[0].value > 0.5);
      CHECK(csv(run_throughput(c)) == csv(rows));
    }
  }
}
