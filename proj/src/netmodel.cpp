#include "cfmimo/netmodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cfmimo/rng.hpp"

namespace cfmimo {

void PathLossParams::validate() const {
  if (!(exponent > 0.0)) throw std::invalid_argument("pl.exponent must be > 0");
  if (!(ref_distance > 0.0)) throw std::invalid_argument("pl.ref_distance must be > 0");
  if (!(shadow_sigma_db >= 0.0)) throw std::invalid_argument("pl.shadow_sigma_db must be >= 0");
  if (!(min_distance > 0.0)) throw std::invalid_argument("pl.min_distance must be > 0");
}

double SystemParams::rho_f(double snr_db) const {
  return sigma_w2 * std::pow(10.0, snr_db / 10.0);
}

void SystemParams::validate() const {
  if (ap_count < 1) throw std::invalid_argument("L must be >= 1");
  if (antennas_per_ap < 1) throw std::invalid_argument("N must be >= 1");
  if (ue_count < 1) throw std::invalid_argument("K must be >= 1");
  if (!(area_side > 0.0)) throw std::invalid_argument("area_side must be > 0");
  if (!(sigma_w2 > 0.0)) throw std::invalid_argument("sigma_w2 must be > 0");
  if (!(tau >= 0.0 && tau < 1.0)) throw std::invalid_argument("tau must be in [0, 1)");
  if (snr_levels_db.empty()) throw std::invalid_argument("snr_levels_db must be nonempty");
  for (double s : snr_levels_db) {
    if (!std::isfinite(s)) throw std::invalid_argument("snr_levels_db entries must be finite");
  }
  pl.validate();
}

Topology generate_topology(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  Topology topo;
  topo.seed = seed;
  topo.ap_positions.resize(params.ap_count, 2);
  for (int l = 0; l < params.ap_count; ++l) {
    topo.ap_positions(l, 0) = rng.uniform(0.0, params.area_side);
    topo.ap_positions(l, 1) = rng.uniform(0.0, params.area_side);
  }
  topo.ue_positions.resize(params.ue_count, 2);
  for (int k = 0; k < params.ue_count; ++k) {
    topo.ue_positions(k, 0) = rng.uniform(0.0, params.area_side);
    topo.ue_positions(k, 1) = rng.uniform(0.0, params.area_side);
  }
  return topo;
}

MatrixXd large_scale_fading(const Topology& topology, const PathLossParams& pl,
                            std::uint64_t seed) {
  pl.validate();
  const auto n_ap = topology.ap_positions.rows();
  const auto n_ue = topology.ue_positions.rows();
  Rng rng(seed);
  MatrixXd beta(n_ap, n_ue);
  for (Eigen::Index l = 0; l < n_ap; ++l) {
    for (Eigen::Index k = 0; k < n_ue; ++k) {
      const double d = (topology.ap_positions.row(l) - topology.ue_positions.row(k)).norm();
      const double d_eff = std::max(d, pl.min_distance);
      const double path = std::pow(d_eff / pl.ref_distance, -pl.exponent);
      const double shadow = std::pow(10.0, rng.normal() * pl.shadow_sigma_db / 10.0);
      beta(l, k) = path * shadow;
    }
  }
  return beta;
}

ChannelRealization draw_channel(const MatrixXd& beta, const SystemParams& params,
                                std::uint64_t seed) {
  if ((beta.array() <= 0.0).any()) {
    throw std::invalid_argument("draw_channel: beta must be strictly positive");
  }
  const int m_total = params.total_antennas();
  const int n_ue = static_cast<int>(beta.cols());
  if (beta.rows() != params.ap_count) {
    throw std::invalid_argument("draw_channel: beta rows != L");
  }

  ChannelRealization chan;
  chan.beta = beta;
  chan.g.resize(m_total, n_ue);
  chan.g_hat.resize(m_total, n_ue);
  chan.g_tilde.resize(m_total, n_ue);

  Rng small(derive_seed(seed, kSmallScaleStream));
  for (int m = 0; m < m_total; ++m) {
    const int l = params.ap_of_antenna(m);
    for (int k = 0; k < n_ue; ++k) {
      chan.g(m, k) = std::sqrt(beta(l, k)) * small.cnormal();
    }
  }

  const double keep = std::sqrt(1.0 - params.tau * params.tau);
  Rng err(derive_seed(seed, kCsiErrorStream));
  for (int m = 0; m < m_total; ++m) {
    const int l = params.ap_of_antenna(m);
    for (int k = 0; k < n_ue; ++k) {
      const std::complex<double> e = err.cnormal();
      chan.g_hat(m, k) = keep * chan.g(m, k) + params.tau * std::sqrt(beta(l, k)) * e;
    }
  }
  chan.g_tilde = chan.g - chan.g_hat;
  return chan;
}

ChannelRealization draw_instance(const SystemParams& params, std::uint64_t instance_seed) {
  Topology topo = generate_topology(params, derive_seed(instance_seed, kTopologyStream));
  MatrixXd beta = large_scale_fading(topo, params.pl, derive_seed(instance_seed, kShadowingStream));
  ChannelRealization chan = draw_channel(beta, params, instance_seed);
  chan.topology = std::move(topo);
  return chan;
}

}  // namespace cfmimo
