#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace cfmimo {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Log-distance path loss with log-normal shadowing. The gain at distance d is
///   beta = (max(d, min_distance) / ref_distance)^(-exponent) * 10^(z * shadow_sigma_db / 10)
/// with z standard normal per (AP, UE) pair.
struct PathLossParams {
  double exponent = 3.76;
  double ref_distance = 1.0;    // meters
  double shadow_sigma_db = 8.0; // dB
  double min_distance = 10.0;   // meters, floor for UE-AP separation

  void validate() const;
};

enum class PrecoderMode { Mrt, Zf };

/// Static scenario constants. Noise variance is fixed to 1 by convention and
/// the SNR sweep scales the per-antenna power rho_f = sigma_w2 * 10^(SNR/10).
struct SystemParams {
  int ap_count = 16;        // L
  int antennas_per_ap = 4;  // N
  int ue_count = 32;        // K
  double area_side = 400.0; // meters
  double sigma_w2 = 1.0;
  double tau = 0.1;         // CSI error fraction in [0, 1)
  PrecoderMode precoder = PrecoderMode::Zf;
  std::vector<double> snr_levels_db = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
  PathLossParams pl;

  int total_antennas() const { return ap_count * antennas_per_ap; } // M = L*N
  double rho_f(double snr_db) const;
  /// AP index of antenna row m, i.e. m / N.
  int ap_of_antenna(int m) const { return m / antennas_per_ap; }

  void validate() const;
};

struct Topology {
  MatrixXd ap_positions; // L x 2
  MatrixXd ue_positions; // K x 2
  std::uint64_t seed = 0;
};

/// One channel instance. g = g_hat + g_tilde holds exactly by construction,
/// and all N antenna rows of AP l share beta(l, k).
struct ChannelRealization {
  MatrixXd beta;     // L x K large-scale fading, linear power gain
  MatrixXcd g;       // M x K true channel
  MatrixXcd g_hat;   // M x K estimate
  MatrixXcd g_tilde; // M x K estimation error
  Topology topology;
};

/// AP and UE positions i.i.d. uniform over the square, deterministic per seed.
Topology generate_topology(const SystemParams& params, std::uint64_t seed);

/// L x K matrix of large-scale fading gains; shadowing draws are row-major
/// over (l, k) from the given seed.
MatrixXd large_scale_fading(const Topology& topology, const PathLossParams& pl,
                            std::uint64_t seed);

/// Rayleigh small-scale fading plus the CSI error decomposition
///   g_hat = sqrt(1 - tau^2) * g + tau * sqrt(beta) * e,   g_tilde = g - g_hat
/// with h, e i.i.d. CN(0,1). Small-scale and error draws use substreams
/// kSmallScaleStream / kCsiErrorStream of `seed`, so changing tau never
/// perturbs the fading realization.
ChannelRealization draw_channel(const MatrixXd& beta, const SystemParams& params,
                                std::uint64_t seed);

/// Full instance draw: topology, shadowing and channels from the documented
/// substreams (kTopologyStream, kShadowingStream, ...) of `instance_seed`.
ChannelRealization draw_instance(const SystemParams& params, std::uint64_t instance_seed);

}  // namespace cfmimo
