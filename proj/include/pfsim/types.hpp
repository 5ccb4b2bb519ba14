// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace pfsim {

using Vec2 = Eigen::Vector2d;

/// Cellular uplink user. Indices are dense and 0-based throughout the
/// library; 1-based numbering only ever appears in documentation.
struct CueUser {
  int id = 0;
  Vec2 position = Vec2::Zero();
  double max_power_w = 0.0;   // transmit power budget
  double avg_rate_bps = 0.0;  // running average rate
};

/// Direct device-to-device pair (one transmitter, one receiver).
struct D2dPair {
  int id = 0;
  Vec2 tx_position = Vec2::Zero();
  Vec2 rx_position = Vec2::Zero();
  double max_power_w = 0.0;
  double avg_rate_bps = 0.0;
};

/// Linear power gains between every pair of endpoints on every subchannel,
/// plus the noise parameters needed to turn a gain into a rate.
///
/// Endpoint numbering: 0 is the base station, then the CUEs, then the D2D
/// transmitters, then the D2D receivers (see NetworkState helpers).
class GainTensor {
 public:
  GainTensor() = default;
  GainTensor(int num_endpoints, int num_subchannels, double noise_density,
             double bandwidth)
      : noise_density_w_hz(noise_density),
        bandwidth_hz(bandwidth),
        num_endpoints_(num_endpoints),
        gains_(Eigen::ArrayXXd::Zero(
            static_cast<Eigen::Index>(num_endpoints) * num_endpoints, num_subchannels)) {}

  int num_endpoints() const { return num_endpoints_; }
  int num_subchannels() const { return static_cast<int>(gains_.cols()); }

  double operator()(int tx, int rx, int k) const {
    return gains_(static_cast<Eigen::Index>(tx) * num_endpoints_ + rx, k);
  }
  void set(int tx, int rx, int k, double gain) {
    gains_(static_cast<Eigen::Index>(tx) * num_endpoints_ + rx, k) = gain;
  }
  /// All-subchannel gain row for one link.
  Eigen::ArrayXd link(int tx, int rx) const {
    return gains_.row(static_cast<Eigen::Index>(tx) * num_endpoints_ + rx).transpose();
  }

  /// Noise power over one subchannel, N0 * B.
  double noise_power_w() const { return noise_density_w_hz * bandwidth_hz; }

  double noise_density_w_hz = 0.0;
  double bandwidth_hz = 0.0;

 private:
  int num_endpoints_ = 0;
  Eigen::ArrayXXd gains_;
};

/// Everything one scheduling instant needs: users, channel gains, and any
/// interference arriving from outside the scheduling domain (other cells).
struct NetworkState {
  std::vector<CueUser> cues;
  std::vector<D2dPair> d2d;
  GainTensor gains;
  Eigen::ArrayXd ext_interference_enb;     // watts per subchannel at the eNB
  Eigen::ArrayXXd ext_interference_d2drx;  // watts, (pair, subchannel)

  int num_cues() const { return static_cast<int>(cues.size()); }
  int num_d2d() const { return static_cast<int>(d2d.size()); }
  int num_subchannels() const { return gains.num_subchannels(); }

  static constexpr int kEnbEndpoint = 0;
  int cue_endpoint(int i) const { return 1 + i; }
  int d2d_tx_endpoint(int j) const { return 1 + num_cues() + j; }
  int d2d_rx_endpoint(int j) const { return 1 + num_cues() + num_d2d() + j; }
  int num_endpoints() const { return 1 + num_cues() + 2 * num_d2d(); }

  double ext_at_enb(int k) const {
    return ext_interference_enb.size() > 0 ? ext_interference_enb(k) : 0.0;
  }
  double ext_at_d2drx(int j, int k) const {
    return ext_interference_d2drx.size() > 0 ? ext_interference_d2drx(j, k) : 0.0;
  }
};

/// Per-tier binary subchannel assignment and transmit powers for one
/// scheduling instant. Within a tier each subchannel belongs to at most one
/// user and each user's assigned set is one contiguous run of indices;
/// across tiers a subchannel may be reused.
struct Allocation {
  Eigen::ArrayXXi cue_assign;  // (num CUEs, K) of 0/1
  Eigen::ArrayXXi d2d_assign;  // (num pairs, K) of 0/1
  Eigen::ArrayXXd cue_power;   // watts
  Eigen::ArrayXXd d2d_power;

  static Allocation zero(int num_cues, int num_d2d, int num_subchannels) {
    Allocation a;
    a.cue_assign = Eigen::ArrayXXi::Zero(num_cues, num_subchannels);
    a.d2d_assign = Eigen::ArrayXXi::Zero(num_d2d, num_subchannels);
    a.cue_power = Eigen::ArrayXXd::Zero(num_cues, num_subchannels);
    a.d2d_power = Eigen::ArrayXXd::Zero(num_d2d, num_subchannels);
    return a;
  }
};

/// Post-adjustment data rates for one tier, with the per-user caps that the
/// adjustment ran against and the set of users clamped at their cap.
struct RateVector {
  Eigen::ArrayXd rates_bps;
  Eigen::ArrayXd caps_bps;
  std::vector<int> clamped;  // user ids held at their cap
};

}  // namespace pfsim
