#pragma once

#include <vector>

#include "ncma/channel.hpp"
#include "ncma/modem.hpp"

namespace ncma {

struct JointPoint {
  Symbol x_a;
  Symbol x_b;
  cplx rx1;
  cplx rx2;
  unsigned xor_label;
};

/// All (x_A, x_B) pairs of a scheme seen through a channel, noise-free.
///
/// Points are enumerated with x_A's label as the major key and x_B's as the
/// minor key, so `points[a * M + b]` holds the pair of labels (a, b).
class JointConstellation {
 public:
  JointConstellation(const ChannelState& channel, ModScheme scheme);

  ModScheme scheme() const noexcept { return scheme_; }
  const ChannelState& channel() const noexcept { return channel_; }
  int order() const noexcept { return constellation_size(scheme_); }
  const std::vector<JointPoint>& points() const noexcept { return points_; }
  const JointPoint& at(unsigned label_a, unsigned label_b) const noexcept {
    return points_[label_a * static_cast<unsigned>(order()) + label_b];
  }

  /// Noise-weighted squared distance sum over the active antennas:
  /// |y1 - rx1|^2 / s1^2 (+ |y2 - rx2|^2 / s2^2).
  double distance(const RxSamplePair& y, const JointPoint& p) const noexcept {
    double d = std::norm(y.y1 - p.rx1) * inv_s1_;
    if (two_antennas_) d += std::norm(y.y2 - p.rx2) * inv_s2_;
    return d;
  }

 private:
  ChannelState channel_;
  ModScheme scheme_;
  std::vector<JointPoint> points_;
  double inv_s1_;
  double inv_s2_;
  bool two_antennas_;
};

JointConstellation build_joint(const ChannelState& channel, ModScheme scheme);

}  // namespace ncma
