#include "ncma/channel.hpp"

#include <cmath>

#include "ncma/errors.hpp"

namespace ncma {

namespace {

bool finite(cplx z) noexcept { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

void ChannelState::validate() const {
  if (!(finite(h_a1) && finite(h_b1) && finite(h_a2) && finite(h_b2))) {
    throw ConfigError("channel gains must be finite");
  }
  if (!(sigma1_sq > 0.0) || !(sigma2_sq > 0.0)) throw ConfigError("noise variances must be positive");
  if (antennas != 1 && antennas != 2) throw ConfigError("antennas must be 1 or 2");
  if (!(phase_jitter >= 0.0)) throw ConfigError("phase jitter must be non-negative");
}

ChannelState from_phase_offsets(double dphi1, double dphi2, double amp_a, double amp_b, double sigma1_sq,
                                std::optional<double> sigma2_sq, int antennas) {
  if (!(amp_a > 0.0) || !(amp_b > 0.0)) throw ConfigError("channel amplitudes must be positive");
  ChannelState ch;
  ch.h_a1 = ch.h_a2 = cplx(amp_a, 0.0);
  ch.h_b1 = std::polar(amp_b, dphi1);
  ch.h_b2 = std::polar(amp_b, dphi2);
  ch.sigma1_sq = sigma1_sq;
  ch.sigma2_sq = sigma2_sq.value_or(sigma1_sq);
  ch.antennas = antennas;
  ch.validate();
  return ch;
}

RxSamplePair superpose(cplx x_a, cplx x_b, const ChannelState& ch) noexcept {
  return {ch.h_a1 * x_a + ch.h_b1 * x_b, ch.h_a2 * x_a + ch.h_b2 * x_b};
}

RxSamplePair transmit(const Symbol& x_a, const Symbol& x_b, const ChannelState& ch, Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  cplx hb1 = ch.h_b1;
  cplx hb2 = ch.h_b2;
  if (ch.phase_jitter > 0.0) {
    const cplx rot = std::polar(1.0, ch.phase_jitter * unit(rng));
    hb1 *= rot;
    hb2 *= rot;
  }
  const double s1 = std::sqrt(ch.sigma1_sq / 2.0);
  const double s2 = std::sqrt(ch.sigma2_sq / 2.0);
  const double n1r = unit(rng), n1i = unit(rng);
  const double n2r = unit(rng), n2i = unit(rng);
  return {ch.h_a1 * x_a.value + hb1 * x_b.value + cplx(s1 * n1r, s1 * n1i),
          ch.h_a2 * x_a.value + hb2 * x_b.value + cplx(s2 * n2r, s2 * n2i)};
}

double sigma_from_snr(double snr_db, ModScheme scheme) noexcept {
  return symbol_energy(scheme) / std::pow(10.0, snr_db / 10.0);
}

}  // namespace ncma
