#pragma once

#include <optional>

#include "ncma/modem.hpp"
#include "ncma/rng.hpp"

namespace ncma {

/// Flat two-user uplink into a one- or two-antenna receiver.
///
/// y_i = h_Ai x_A + h_Bi x_B + w_i, with w_i circular complex Gaussian of
/// variance sigma_i_sq. With `antennas == 1` only the first antenna exists;
/// the second-antenna fields are carried but ignored by every consumer.
struct ChannelState {
  cplx h_a1{1.0, 0.0};
  cplx h_b1{1.0, 0.0};
  cplx h_a2{1.0, 0.0};
  cplx h_b2{1.0, 0.0};
  double sigma1_sq = 1.0;
  double sigma2_sq = 1.0;
  /// Std-dev (radians) of a per-symbol Gaussian rotation of B's gains.
  /// Zero disables it.
  double phase_jitter = 0.0;
  int antennas = 2;

  /// Throws ConfigError on non-finite gains or non-positive variances.
  void validate() const;
};

struct RxSamplePair {
  cplx y1{};
  cplx y2{};
};

/// h_A1 = h_A2 = amp_a, h_B1 = amp_b e^{j dphi1}, h_B2 = amp_b e^{j dphi2}.
ChannelState from_phase_offsets(double dphi1, double dphi2, double amp_a, double amp_b, double sigma1_sq,
                                std::optional<double> sigma2_sq = std::nullopt, int antennas = 2);

/// Noise-free superposition.
RxSamplePair superpose(cplx x_a, cplx x_b, const ChannelState& ch) noexcept;

RxSamplePair transmit(const Symbol& x_a, const Symbol& x_b, const ChannelState& ch, Rng& rng);

/// Noise variance for a per-node, per-antenna Es/sigma^2 of `snr_db`.
double sigma_from_snr(double snr_db, ModScheme scheme) noexcept;

}  // namespace ncma
