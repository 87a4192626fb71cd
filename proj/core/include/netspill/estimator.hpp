#ifndef NETSPILL_ESTIMATOR_HPP
#define NETSPILL_ESTIMATOR_HPP

#include <Eigen/Dense>
#include <optional>
#include <utility>
#include <vector>

#include "netspill/instruments.hpp"
#include "netspill/panel.hpp"
#include "netspill/transforms.hpp"

namespace netspill {

// Group moments: A = sum_t (1/n_K) sum_{i in K} (Z_{i,t}-Z^C_{i,t}) y^H_{i,t}
// and B likewise against W^H_{i,t}.
struct MomentSet {
  Eigen::VectorXd A;  // d_Z
  Eigen::MatrixXd B;  // d_Z x d_W
  Group group = Group::B;
  int n_K = 0;
};

MomentSet moment_matrices(const InstrumentPanel& Z, const PanelDataset& data,
                          const RegressorPanel& W, const ClusterMap& clusters,
                          const HelmertWeights& weights, Group group);

// Unweighted solve delta_tilde = (B'B)^{-1} B'A via QR.
Eigen::VectorXd initial_estimator(const MomentSet& m);

// Omega = (1/n_K) sum_i g_i g_i', g_i = sum_t (Z_{i,t}-Z^C_{i,t}) u^H_{i,t}.
Eigen::MatrixXd weight_matrix(const InstrumentPanel& Z,
                              const std::vector<Eigen::VectorXd>& residuals_H,
                              const ClusterMap& clusters, Group group,
                              const GroupPartition& partition);

// Two-step solve. In the just-identified case (d_Z == d_W) the weight drops
// out: delta_hat = B^{-1} A and V = B^{-1} Omega B^{-T}, so a degenerate
// Omega (e.g. noiseless data) still yields the estimator.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> two_step_estimate(
    const MomentSet& m, const Eigen::MatrixXd& Omega);

struct GroupEstimate {
  Eigen::VectorXd delta_hat;
  Eigen::VectorXd delta_tilde;
  Eigen::MatrixXd V_hat;      // d_W x d_W
  Eigen::MatrixXd Omega_hat;  // d_Z x d_Z
  Eigen::VectorXd se;         // sqrt(V_jj / n_K)
  std::vector<std::pair<double, double>> ci;
  int n_K = 0;
  double B_condition = 0.0;
  double lemma1_rel_residual = -1.0;  // < 0 when not computed
};

struct EstimationResult {
  GroupEstimate groups[2];  // indexed by group_index()
  double alpha = 0.05;
  IvOption option = IvOption::Simple;
  int d_W = 0;
  int L = 1;

  const GroupEstimate& group(Group g) const { return groups[group_index(g)]; }
  GroupEstimate& group(Group g) { return groups[group_index(g)]; }
};

// Known generative components, used only in simulation mode to evaluate the
// martingale-representation diagnostic.
struct TruthForDiagnostics {
  Eigen::MatrixXd epsilon;      // n x (T+1); columns 1..T enter the check
  Eigen::VectorXd delta_B;
  Eigen::VectorXd delta_F;
};

// Full pipeline for both groups: transforms -> instruments -> moments ->
// initial estimate -> weight matrix -> two-step estimate, CIs at level
// 1 - alpha.
EstimationResult estimate(const PanelDataset& data, const NetworkStack& nets,
                          IvOption option, double alpha,
                          const TruthForDiagnostics* truth = nullptr);

}  // namespace netspill

#endif
