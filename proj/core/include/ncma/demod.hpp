#pragma once

#include <span>
#include <vector>

#include "ncma/fec.hpp"
#include "ncma/joint.hpp"

namespace ncma::demod {

using fec::SoftSymbolVector;

enum class User { A, B };

/// Max-log soft demodulators over a joint constellation.
///
/// Every metric is the noise-weighted distance sum
///   d = |y1 - rx1|^2 / s1^2 + |y2 - rx2|^2 / s2^2
/// (second term absent with one antenna). Bit LLRs are
///   min_{bit = 1} d - min_{bit = 0} d,
/// positive favoring bit 0; symbol log-likelihoods are -min d over the
/// points carrying that label. Equal distances resolve to the first point
/// in enumeration order.

/// One LLR per XOR-label bit, written to `out` (size = bits per symbol).
void pnc_bit_llr(const RxSamplePair& y, const JointConstellation& jc, std::span<double> out);
std::vector<double> pnc_bit_llr(const RxSamplePair& y, const ChannelState& ch, ModScheme scheme);

/// One LLR per label bit of `user`'s symbol.
void mud_bit_llr(const RxSamplePair& y, const JointConstellation& jc, User user, std::span<double> out);
std::vector<double> mud_bit_llr(const RxSamplePair& y, const ChannelState& ch, ModScheme scheme, User user);

SoftSymbolVector pnc_symbol_logprob(const RxSamplePair& y, const JointConstellation& jc);
SoftSymbolVector pnc_symbol_logprob(const RxSamplePair& y, const ChannelState& ch, ModScheme scheme);

SoftSymbolVector mud_symbol_logprob(const RxSamplePair& y, const JointConstellation& jc, User user);
SoftSymbolVector mud_symbol_logprob(const RxSamplePair& y, const ChannelState& ch, ModScheme scheme, User user);

/// Noise-weighted MRC estimate of the other user's symbol given that `user`
/// sent `fixed`:
///   z = sum_i w_i conj(h_oi) (y_i - h_ui x) / sum_i w_i |h_oi|^2, w_i = 1/s_i^2.
/// With equal variances this is the plain MRC + equalization estimate.
cplx mrc_estimate(const RxSamplePair& y, const ChannelState& ch, User user, cplx fixed) noexcept;

/// Reduced-complexity QAM16 MUD: for each candidate symbol of `user`, the
/// other user's symbol is grid-decided from the MRC estimate instead of
/// searched. Throws ConfigError for other schemes.
SoftSymbolVector mud_reduced(const RxSamplePair& y, const JointConstellation& jc, User user);

struct Candidate {
  unsigned label_a;
  unsigned label_b;
  double d_sq;
};

struct CandidateSet {
  User origin;
  std::vector<Candidate> entries;
};

/// S_A (origin A) holds, for each fixed x_A, the k closest joint points over
/// x_B; S_B is the mirror image. QAM16 only.
CandidateSet select_candidates(const RxSamplePair& y, const JointConstellation& jc, User origin, int k);

struct NearestPointResult {
  SoftSymbolVector logp;
  int union_size = 0;
  int missing_labels = 0;
};

/// Nearest-point PNC demodulator over S_A u S_B. Labels with no
/// representative get -(max observed d + 10 Es / mean sigma^2).
/// k must be 1 or 4; QAM16 only.
NearestPointResult pnc_nearest_point_detail(const RxSamplePair& y, const JointConstellation& jc, int k);
SoftSymbolVector pnc_nearest_point(const RxSamplePair& y, const JointConstellation& jc, int k);

}  // namespace ncma::demod
