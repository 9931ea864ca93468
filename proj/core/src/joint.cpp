#include "ncma/joint.hpp"

namespace ncma {

JointConstellation::JointConstellation(const ChannelState& channel, ModScheme scheme)
    : channel_(channel),
      scheme_(scheme),
      inv_s1_(1.0 / channel.sigma1_sq),
      inv_s2_(1.0 / channel.sigma2_sq),
      two_antennas_(channel.antennas == 2) {
  channel_.validate();
  const auto m = static_cast<unsigned>(constellation_size(scheme));
  points_.reserve(m * m);
  for (unsigned a = 0; a < m; ++a) {
    const Symbol xa = make_symbol(a, scheme);
    for (unsigned b = 0; b < m; ++b) {
      const Symbol xb = make_symbol(b, scheme);
      const RxSamplePair rx = superpose(xa.value, xb.value, channel);
      points_.push_back(JointPoint{xa, xb, rx.y1, rx.y2, a ^ b});
    }
  }
}

JointConstellation build_joint(const ChannelState& channel, ModScheme scheme) {
  return JointConstellation(channel, scheme);
}

}  // namespace ncma
