#pragma once

#include <Eigen/Dense>

#include "cfmimo/netmodel.hpp"

namespace cfmimo {

/// Linear precoder, columns per UE. After construction the per-antenna power
/// budget holds: max_m sum_k |p(m,k)|^2 == 1 (rho_f carries the power level),
/// and column k is zero on every antenna the input masked out for UE k.
struct Precoder {
  MatrixXcd p;  // M x K
  PrecoderMode mode = PrecoderMode::Zf;
  double scale = 1.0;  // global factor applied after per-column normalization
};

/// Per-link achievable rates, sr(k, m) in bits/s/Hz.
struct RateMatrix {
  MatrixXd sr;  // K x M
};

/// MRT: P = conj(G_hat). ZF: P = conj(G_hat) * (G_hat^T conj(G_hat) + reg*I)^-1,
/// with the input's zero pattern re-applied so masked entries stay zero.
/// Columns are then scaled to unit norm and a global factor enforces the
/// per-antenna budget. Throws if a UE has no serving antenna (all-zero column)
/// or if the ZF system is singular with reg = 0.
Precoder build_precoder(const MatrixXcd& g_hat_masked, PrecoderMode mode, double reg = 1e-9);

/// Network sum-rate log2 det[R + I_K] with
///   R = rho_f G_hat^T P P^H G_hat^* (rho_f G_tilde^T P P^H G_tilde^* + sigma_w2 I_K)^-1.
/// Evaluated as logdet(D + rho_f U U^H) - logdet(D) via Cholesky of the two
/// Hermitian positive definite factors (U = G_hat^T P, D the noise-plus-error
/// covariance), which never forms the inverse. Serves both CF (unmasked
/// inputs) and UCCF (masked inputs) on the same code path.
double sum_rate(const MatrixXcd& g_hat, const MatrixXcd& g_tilde, const Precoder& p,
                double rho_f, double sigma_w2);

/// Per AP-antenna -> UE rates
///   sr(k,m) = log2(1 + f*|g_hat(m,k)|^2*||p_k||^2 / (f*|g_tilde(m,k)|^2*||p_k||^2 + sigma_w2))
/// with f = sqrt(rho_f) when rho_sqrt (the printed form) or f = rho_f.
RateMatrix per_link_rates(const MatrixXcd& g_hat, const MatrixXcd& g_tilde, const Precoder& p,
                          double rho_f, double sigma_w2, bool rho_sqrt = true);

}  // namespace cfmimo
