#include "cfmimo/clustering.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cfmimo/csv.hpp"

namespace cfmimo {

namespace {

void validate_assignment(const BinaryMatrix& a, Granularity granularity, int antennas_per_ap) {
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    bool any = false;
    for (Eigen::Index m = 0; m < a.cols(); ++m) {
      if (a(k, m) > 1) {
        throw std::invalid_argument("assignment entries must be 0 or 1");
      }
      any = any || a(k, m) == 1;
    }
    if (!any) {
      throw std::invalid_argument("assignment row " + std::to_string(k) +
                                  " has no serving antenna");
    }
  }
  if (granularity == Granularity::PerAp) {
    if (antennas_per_ap < 1 || a.cols() % antennas_per_ap != 0) {
      throw std::invalid_argument("PerAp assignment needs M divisible by N");
    }
    for (Eigen::Index k = 0; k < a.rows(); ++k) {
      for (Eigen::Index m = 0; m < a.cols(); ++m) {
        if (a(k, m) != a(k, m - m % antennas_per_ap)) {
          throw std::invalid_argument("PerAp assignment splits antennas of AP " +
                                      std::to_string(m / antennas_per_ap) + " in row " +
                                      std::to_string(k));
        }
      }
    }
  }
}

}  // namespace

ClusterAssignment make_assignment(BinaryMatrix a, Granularity granularity, double threshold,
                                  int antennas_per_ap) {
  validate_assignment(a, granularity, antennas_per_ap);
  return ClusterAssignment{std::move(a), granularity, threshold};
}

double lsf_threshold(const MatrixXd& beta, int antennas_per_ap) {
  if (antennas_per_ap < 1) throw std::invalid_argument("lsf_threshold: N must be >= 1");
  // Each AP row stands for N identical antenna rows; replication cancels.
  return beta.mean();
}

ClusterAssignment lsf_cluster(const MatrixXd& beta, const SystemParams& params) {
  const int n_ap = static_cast<int>(beta.rows());
  const int n_ue = static_cast<int>(beta.cols());
  const int n = params.antennas_per_ap;
  const double alpha = lsf_threshold(beta, n);

  BinaryMatrix a = BinaryMatrix::Zero(n_ue, n_ap * n);
  for (int k = 0; k < n_ue; ++k) {
    bool any = false;
    for (int l = 0; l < n_ap; ++l) {
      if (beta(l, k) >= alpha) {
        a.row(k).segment(l * n, n).setOnes();
        any = true;
      }
    }
    if (!any) {
      Eigen::Index best = 0;
      beta.col(k).maxCoeff(&best);  // first index on exact ties
      a.row(k).segment(best * n, n).setOnes();
    }
  }
  return make_assignment(std::move(a), Granularity::PerAp, alpha, n);
}

ClusterAssignment bsr_cluster(const RateMatrix& rates, int min_links) {
  const MatrixXd& sr = rates.sr;
  const int n_ue = static_cast<int>(sr.rows());
  const int m_total = static_cast<int>(sr.cols());
  if (min_links < 1 || min_links > m_total) {
    throw std::invalid_argument("bsr_cluster: min_links must be in [1, M]");
  }
  if (!sr.allFinite()) {
    throw std::invalid_argument("bsr_cluster: rate matrix has non-finite entries");
  }
  const double alpha = sr.mean();

  BinaryMatrix a = BinaryMatrix::Zero(n_ue, m_total);
  for (int k = 0; k < n_ue; ++k) {
    int selected = 0;
    for (int m = 0; m < m_total; ++m) {
      if (sr(k, m) >= alpha) {
        a(k, m) = 1;
        ++selected;
      }
    }
    if (selected == 0) {
      Eigen::Index best = 0;
      sr.row(k).maxCoeff(&best);
      a(k, best) = 1;
      ++selected;
    }
    while (selected < min_links) {
      // Highest-rate unselected antenna, ties to the lowest index.
      int best = -1;
      for (int m = 0; m < m_total; ++m) {
        if (a(k, m) == 0 && (best < 0 || sr(k, m) > sr(k, best))) {
          best = m;
        }
      }
      a(k, best) = 1;
      ++selected;
    }
  }
  return make_assignment(std::move(a), Granularity::PerAntenna, alpha, 1);
}

MatrixXcd apply_mask(const MatrixXcd& g, const ClusterAssignment& assignment) {
  const auto& a = assignment.a;
  if (g.rows() != a.cols() || g.cols() != a.rows()) {
    throw std::invalid_argument("apply_mask: dimension mismatch (g is M x K, a is K x M)");
  }
  MatrixXcd masked = g;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    for (Eigen::Index m = 0; m < a.cols(); ++m) {
      if (a(k, m) == 0) masked(m, k) = 0.0;
    }
  }
  return masked;
}

void write_assignment_csv(std::ostream& os, const ClusterAssignment& assignment) {
  const auto& a = assignment.a;
  os << a.rows() << ',' << a.cols() << ','
     << (assignment.granularity == Granularity::PerAp ? "per_ap" : "per_antenna") << ','
     << format_double(assignment.threshold) << '\n';
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    for (Eigen::Index m = 0; m < a.cols(); ++m) {
      if (m) os << ',';
      os << int(a(k, m));
    }
    os << '\n';
  }
}

ClusterAssignment read_assignment_csv(std::istream& is, int antennas_per_ap) {
  std::string header;
  if (!std::getline(is, header)) {
    throw std::runtime_error("assignment csv: missing header");
  }
  std::istringstream hs(header);
  std::string k_str, m_str, gran_str, thr_str;
  if (!std::getline(hs, k_str, ',') || !std::getline(hs, m_str, ',') ||
      !std::getline(hs, gran_str, ',') || !std::getline(hs, thr_str, ',')) {
    throw std::runtime_error("assignment csv: malformed header '" + header + "'");
  }
  const int n_ue = std::stoi(k_str);
  const int m_total = std::stoi(m_str);
  Granularity gran;
  if (gran_str == "per_ap") {
    gran = Granularity::PerAp;
  } else if (gran_str == "per_antenna") {
    gran = Granularity::PerAntenna;
  } else {
    throw std::runtime_error("assignment csv: unknown granularity '" + gran_str + "'");
  }
  const double threshold = std::stod(thr_str);

  BinaryMatrix a(n_ue, m_total);
  std::string line;
  for (int k = 0; k < n_ue; ++k) {
    if (!std::getline(is, line)) {
      throw std::runtime_error("assignment csv: expected " + std::to_string(n_ue) + " rows");
    }
    std::istringstream ls(line);
    std::string cell;
    for (int m = 0; m < m_total; ++m) {
      if (!std::getline(ls, cell, ',')) {
        throw std::runtime_error("assignment csv: short row " + std::to_string(k));
      }
      const int v = std::stoi(cell);
      if (v != 0 && v != 1) {
        throw std::runtime_error("assignment csv: entry not 0/1 in row " + std::to_string(k));
      }
      a(k, m) = static_cast<std::uint8_t>(v);
    }
  }
  return make_assignment(std::move(a), gran, threshold,
                         gran == Granularity::PerAp ? antennas_per_ap : 1);
}

}  // namespace cfmimo
