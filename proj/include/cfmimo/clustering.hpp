#pragma once

#include <iosfwd>
#include <string>

#include "cfmimo/linkrate.hpp"
#include "cfmimo/netmodel.hpp"

namespace cfmimo {

enum class Granularity { PerAp, PerAntenna };

/// Binary link matrix, rows = UEs, columns = AP antennas. Row k encodes the
/// serving set U_k; every row has at least one 1, and PerAp assignments keep
/// all N antennas of an AP equal within a row.
struct ClusterAssignment {
  BinaryMatrix a;  // K x M
  Granularity granularity = Granularity::PerAntenna;
  double threshold = 0.0;  // the alpha the selection rule used
};

/// Validating constructor; antennas_per_ap is only needed for the PerAp
/// block-structure check.
ClusterAssignment make_assignment(BinaryMatrix a, Granularity granularity, double threshold,
                                  int antennas_per_ap);

/// Grand mean of beta over all L*N*K antenna-UE pairs; with per-AP beta
/// replicated N times per antenna this equals the plain mean over L*K pairs.
double lsf_threshold(const MatrixXd& beta, int antennas_per_ap);

/// Per UE: every AP whose beta meets the grand-mean threshold, falling back to
/// the argmax AP when none qualifies (ties to the lowest index). Selected APs
/// expand to all N of their antennas.
ClusterAssignment lsf_cluster(const MatrixXd& beta, const SystemParams& params);

/// Per UE: every antenna whose rate meets the network-average threshold,
/// argmax fallback, then a greedy fill adds the highest-rate unselected
/// antennas until min_links are serving.
ClusterAssignment bsr_cluster(const RateMatrix& rates, int min_links);

/// Zeroes column k of g at every antenna row the assignment masks out.
MatrixXcd apply_mask(const MatrixXcd& g, const ClusterAssignment& assignment);

/// 0/1 CSV grid with the one-line header "K,M,granularity,threshold".
void write_assignment_csv(std::ostream& os, const ClusterAssignment& assignment);
ClusterAssignment read_assignment_csv(std::istream& is, int antennas_per_ap);

}  // namespace cfmimo
