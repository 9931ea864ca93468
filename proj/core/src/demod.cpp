#include "ncma/demod.hpp"

#include <algorithm>
#include <array>
#include <bitset>
#include <limits>
#include <numeric>

#include "ncma/errors.hpp"

namespace ncma::demod {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

unsigned user_label(const JointPoint& p, User user) noexcept {
  return user == User::A ? p.x_a.label : p.x_b.label;
}

// Per-bit minima of d over the points whose selected label has that bit
// clear (min0) or set (min1).
template <typename LabelOf>
void bit_llr(const RxSamplePair& y, const JointConstellation& jc, LabelOf label_of, std::span<double> out) {
  const int nbits = bits_per_symbol(jc.scheme());
  if (out.size() != static_cast<std::size_t>(nbits)) throw ShapeError("bit LLR output has the wrong size");
  std::array<double, 4> min0;
  std::array<double, 4> min1;
  min0.fill(kInf);
  min1.fill(kInf);
  for (const auto& p : jc.points()) {
    const double d = jc.distance(y, p);
    const unsigned label = label_of(p);
    for (int b = 0; b < nbits; ++b) {
      const bool set = (label >> (nbits - 1 - b)) & 1u;
      double& slot = set ? min1[static_cast<std::size_t>(b)] : min0[static_cast<std::size_t>(b)];
      if (d < slot) slot = d;
    }
  }
  for (int b = 0; b < nbits; ++b) {
    out[static_cast<std::size_t>(b)] = min1[static_cast<std::size_t>(b)] - min0[static_cast<std::size_t>(b)];
  }
}

template <typename LabelOf>
SoftSymbolVector symbol_logprob(const RxSamplePair& y, const JointConstellation& jc, LabelOf label_of) {
  const int order = jc.order();
  SoftSymbolVector v(order);
  std::array<double, 16> best;
  best.fill(kInf);
  for (const auto& p : jc.points()) {
    const double d = jc.distance(y, p);
    double& slot = best[label_of(p)];
    if (d < slot) slot = d;
  }
  for (int s = 0; s < order; ++s) v.logp[static_cast<std::size_t>(s)] = -best[static_cast<std::size_t>(s)];
  return v;
}

void require_qam16(const JointConstellation& jc, const char* who) {
  if (jc.scheme() != ModScheme::QAM16) throw ConfigError(std::string(who) + " is defined for QAM16 only");
}

}  // namespace

void pnc_bit_llr(const RxSamplePair& y, const JointConstellation& jc, std::span<double> out) {
  bit_llr(y, jc, [](const JointPoint& p) { return p.xor_label; }, out);
}

std::vector<double> pnc_bit_llr(const RxSamplePair& y, const ChannelState& ch, ModScheme scheme) {
  const JointConstellation jc(ch, scheme);
  std::vector<double> out(static_cast<std::size_t>(bits_per_symbol(scheme)));
  pnc_bit_llr(y, jc, out);
  return out;
}

void mud_bit_llr(const RxSamplePair& y, const JointConstellation& jc, User user, std::span<double> out) {
  bit_llr(y, jc, [user](const JointPoint& p) { return user_label(p, user); }, out);
}

std::vector<double> mud_bit_llr(const RxSamplePair& y, const ChannelState& ch, ModScheme scheme, User user) {
  const JointConstellation jc(ch, scheme);
  std::vector<double> out(static_cast<std::size_t>(bits_per_symbol(scheme)));
  mud_bit_llr(y, jc, user, out);
  return out;
}

SoftSymbolVector pnc_symbol_logprob(const RxSamplePair& y, const JointConstellation& jc) {
  return symbol_logprob(y, jc, [](const JointPoint& p) { return p.xor_label; });
}

SoftSymbolVector pnc_symbol_logprob(const RxSamplePair& y, const ChannelState& ch, ModScheme scheme) {
  return pnc_symbol_logprob(y, JointConstellation(ch, scheme));
}

SoftSymbolVector mud_symbol_logprob(const RxSamplePair& y, const JointConstellation& jc, User user) {
  return symbol_logprob(y, jc, [user](const JointPoint& p) { return user_label(p, user); });
}

SoftSymbolVector mud_symbol_logprob(const RxSamplePair& y, const ChannelState& ch, ModScheme scheme, User user) {
  return mud_symbol_logprob(y, JointConstellation(ch, scheme), user);
}

cplx mrc_estimate(const RxSamplePair& y, const ChannelState& ch, User user, cplx fixed) noexcept {
  const bool is_a = user == User::A;
  const cplx hu1 = is_a ? ch.h_a1 : ch.h_b1;
  const cplx ho1 = is_a ? ch.h_b1 : ch.h_a1;
  const double w1 = 1.0 / ch.sigma1_sq;
  cplx num = w1 * std::conj(ho1) * (y.y1 - hu1 * fixed);
  double den = w1 * std::norm(ho1);
  if (ch.antennas == 2) {
    const cplx hu2 = is_a ? ch.h_a2 : ch.h_b2;
    const cplx ho2 = is_a ? ch.h_b2 : ch.h_a2;
    const double w2 = 1.0 / ch.sigma2_sq;
    num += w2 * std::conj(ho2) * (y.y2 - hu2 * fixed);
    den += w2 * std::norm(ho2);
  }
  return num / den;
}

SoftSymbolVector mud_reduced(const RxSamplePair& y, const JointConstellation& jc, User user) {
  require_qam16(jc, "mud_reduced");
  const int order = jc.order();
  SoftSymbolVector v(order);
  for (unsigned fixed = 0; fixed < static_cast<unsigned>(order); ++fixed) {
    const cplx z = mrc_estimate(y, jc.channel(), user, symbol_value(fixed, jc.scheme()));
    const unsigned other = hard_label(z, jc.scheme());
    const JointPoint& p = user == User::A ? jc.at(fixed, other) : jc.at(other, fixed);
    v.logp[fixed] = -jc.distance(y, p);
  }
  return v;
}

CandidateSet select_candidates(const RxSamplePair& y, const JointConstellation& jc, User origin, int k) {
  require_qam16(jc, "select_candidates");
  const unsigned order = static_cast<unsigned>(jc.order());
  if (k < 1 || static_cast<unsigned>(k) > order) throw ConfigError("select_candidates: k out of range");
  CandidateSet set{origin, {}};
  set.entries.reserve(order * static_cast<unsigned>(k));
  std::array<unsigned, 16> idx;
  std::array<double, 16> dist;
  for (unsigned fixed = 0; fixed < order; ++fixed) {
    const cplx z = mrc_estimate(y, jc.channel(), origin, symbol_value(fixed, jc.scheme()));
    // The joint metric is an increasing affine function of |x - z|^2 over
    // the other user's symbol x, so ranking by it is exact.
    for (unsigned o = 0; o < order; ++o) dist[o] = std::norm(symbol_value(o, jc.scheme()) - z);
    std::iota(idx.begin(), idx.begin() + order, 0u);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.begin() + order, [&](unsigned l, unsigned r) {
      return dist[l] < dist[r] || (dist[l] == dist[r] && l < r);
    });
    for (int r = 0; r < k; ++r) {
      const unsigned other = idx[static_cast<std::size_t>(r)];
      const unsigned la = origin == User::A ? fixed : other;
      const unsigned lb = origin == User::A ? other : fixed;
      set.entries.push_back(Candidate{la, lb, jc.distance(y, jc.at(la, lb))});
    }
  }
  return set;
}

NearestPointResult pnc_nearest_point_detail(const RxSamplePair& y, const JointConstellation& jc, int k) {
  require_qam16(jc, "pnc_nearest_point");
  if (k != 1 && k != 4) throw ConfigError("pnc_nearest_point: k must be 1 or 4");
  const CandidateSet sa = select_candidates(y, jc, User::A, k);
  const CandidateSet sb = select_candidates(y, jc, User::B, k);

  const int order = jc.order();
  std::bitset<256> in_union;
  std::array<double, 16> best;
  best.fill(kInf);
  double max_d = 0.0;
  for (const CandidateSet* set : {&sa, &sb}) {
    for (const auto& c : set->entries) {
      in_union.set(c.label_a * static_cast<unsigned>(order) + c.label_b);
      const unsigned x = c.label_a ^ c.label_b;
      if (c.d_sq < best[x]) best[x] = c.d_sq;
      max_d = std::max(max_d, c.d_sq);
    }
  }

  const ChannelState& ch = jc.channel();
  const double mean_var = ch.antennas == 2 ? 0.5 * (ch.sigma1_sq + ch.sigma2_sq) : ch.sigma1_sq;
  const double floor = -(max_d + 10.0 * symbol_energy(jc.scheme()) / mean_var);

  NearestPointResult r;
  r.logp = SoftSymbolVector(order);
  r.union_size = static_cast<int>(in_union.count());
  for (int s = 0; s < order; ++s) {
    const double b = best[static_cast<std::size_t>(s)];
    if (b == kInf) {
      r.logp.logp[static_cast<std::size_t>(s)] = floor;
      ++r.missing_labels;
    } else {
      r.logp.logp[static_cast<std::size_t>(s)] = -b;
    }
  }
  return r;
}

SoftSymbolVector pnc_nearest_point(const RxSamplePair& y, const JointConstellation& jc, int k) {
  return pnc_nearest_point_detail(y, jc, k).logp;
}

}  // namespace ncma::demod
