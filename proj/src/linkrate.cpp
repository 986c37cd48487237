#include "cfmimo/linkrate.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cfmimo {

namespace {

/// log2 det of a Hermitian positive definite matrix via Cholesky.
double log2det_hpd(const MatrixXcd& a, const char* what) {
  Eigen::LLT<MatrixXcd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(std::string("sum_rate: ") + what +
                             " is not positive definite (Cholesky failed)");
  }
  const auto& l = llt.matrixLLT();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    acc += std::log2(std::real(l(i, i)));
  }
  return 2.0 * acc;
}

}  // namespace

Precoder build_precoder(const MatrixXcd& g_hat_masked, PrecoderMode mode, double reg) {
  const Eigen::Index m_total = g_hat_masked.rows();
  const Eigen::Index n_ue = g_hat_masked.cols();
  for (Eigen::Index k = 0; k < n_ue; ++k) {
    if (g_hat_masked.col(k).isZero(0.0)) {
      throw std::invalid_argument("build_precoder: UE " + std::to_string(k) +
                                  " has no serving antenna (all-zero column)");
    }
  }

  Precoder out;
  out.mode = mode;
  if (mode == PrecoderMode::Mrt) {
    out.p = g_hat_masked.conjugate();
  } else {
    const MatrixXcd conj_g = g_hat_masked.conjugate();
    MatrixXcd gram = g_hat_masked.transpose() * conj_g;  // K x K, Hermitian PSD
    if (reg == 0.0) {
      Eigen::FullPivLU<MatrixXcd> lu(gram);
      if (!lu.isInvertible()) {
        throw std::runtime_error("build_precoder: ZF system singular with reg = 0 (rank " +
                                 std::to_string(lu.rank()) + " of " + std::to_string(n_ue) + ")");
      }
      out.p = conj_g * lu.inverse();
    } else {
      gram += reg * MatrixXcd::Identity(n_ue, n_ue);
      out.p = conj_g * gram.partialPivLu().inverse();
    }
    // The Gram inverse mixes columns, so ZF fills in entries the mask zeroed;
    // restore the input's zero pattern before normalization.
    for (Eigen::Index k = 0; k < n_ue; ++k) {
      for (Eigen::Index m = 0; m < m_total; ++m) {
        if (g_hat_masked(m, k) == std::complex<double>(0.0, 0.0)) {
          out.p(m, k) = 0.0;
        }
      }
    }
  }

  for (Eigen::Index k = 0; k < n_ue; ++k) {
    const double norm = out.p.col(k).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw std::runtime_error("build_precoder: precoder column for UE " + std::to_string(k) +
                               " is zero or non-finite");
    }
    out.p.col(k) /= norm;
  }

  const double max_row_power = out.p.cwiseAbs2().rowwise().sum().maxCoeff();
  out.scale = 1.0 / std::sqrt(max_row_power);
  out.p *= out.scale;
  return out;
}

double sum_rate(const MatrixXcd& g_hat, const MatrixXcd& g_tilde, const Precoder& p,
                double rho_f, double sigma_w2) {
  if (g_hat.rows() != p.p.rows() || g_hat.cols() != p.p.cols() ||
      g_tilde.rows() != g_hat.rows() || g_tilde.cols() != g_hat.cols()) {
    throw std::invalid_argument("sum_rate: dimension mismatch");
  }
  const Eigen::Index n_ue = g_hat.cols();

  const MatrixXcd u = g_hat.transpose() * p.p;    // K x K
  const MatrixXcd v = g_tilde.transpose() * p.p;  // K x K
  const MatrixXcd noise =
      rho_f * (v * v.adjoint()) + sigma_w2 * MatrixXcd::Identity(n_ue, n_ue);
  const MatrixXcd total = noise + rho_f * (u * u.adjoint());

  const double rate = log2det_hpd(total, "signal-plus-noise covariance") -
                      log2det_hpd(noise, "noise covariance");
  if (!std::isfinite(rate)) {
    throw std::runtime_error("sum_rate: non-finite result (K=" + std::to_string(n_ue) +
                             ", rho_f=" + std::to_string(rho_f) + ")");
  }
  if (rate < -1e-9) {
    throw std::runtime_error("sum_rate: negative rate " + std::to_string(rate));
  }
  return std::max(rate, 0.0);
}

RateMatrix per_link_rates(const MatrixXcd& g_hat, const MatrixXcd& g_tilde, const Precoder& p,
                          double rho_f, double sigma_w2, bool rho_sqrt) {
  if (g_hat.rows() != p.p.rows() || g_hat.cols() != p.p.cols() ||
      g_tilde.rows() != g_hat.rows() || g_tilde.cols() != g_hat.cols()) {
    throw std::invalid_argument("per_link_rates: dimension mismatch");
  }
  const Eigen::Index m_total = g_hat.rows();
  const Eigen::Index n_ue = g_hat.cols();
  const double f = rho_sqrt ? std::sqrt(rho_f) : rho_f;

  VectorXd col_power(n_ue);
  for (Eigen::Index k = 0; k < n_ue; ++k) {
    col_power(k) = p.p.col(k).squaredNorm();
  }

  RateMatrix rates;
  rates.sr.resize(n_ue, m_total);
  for (Eigen::Index k = 0; k < n_ue; ++k) {
    for (Eigen::Index m = 0; m < m_total; ++m) {
      const double sig = f * std::norm(g_hat(m, k)) * col_power(k);
      const double err = f * std::norm(g_tilde(m, k)) * col_power(k);
      const double r = std::log2(1.0 + sig / (err + sigma_w2));
      if (!std::isfinite(r)) {
        throw std::runtime_error("per_link_rates: non-finite rate at (k=" + std::to_string(k) +
                                 ", m=" + std::to_string(m) + ")");
      }
      rates.sr(k, m) = r;
    }
  }
  return rates;
}

}  // namespace cfmimo
