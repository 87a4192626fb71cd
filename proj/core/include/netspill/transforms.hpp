#ifndef NETSPILL_TRANSFORMS_HPP
#define NETSPILL_TRANSFORMS_HPP

#include <Eigen/Dense>
#include <vector>

#include "netspill/panel.hpp"

namespace netspill {

// Forward orthogonal deviation weights h(s,t), 1 <= t <= T-1, t <= s <= T.
// For each t the weights sum to zero and have unit sum of squares.
class HelmertWeights {
 public:
  explicit HelmertWeights(int T);

  int T() const { return T_; }

  double operator()(int s, int t) const {
    const double m = static_cast<double>(T_ - t);
    if (s == t) return std::sqrt(m / (m + 1.0));
    return -1.0 / std::sqrt(m * (m + 1.0));
  }

 private:
  int T_;
};

inline HelmertWeights helmert_weights(int T) { return HelmertWeights(T); }

// Cluster mean of `values`, broadcast back to units. Means are accumulated
// with Kahan compensation; clusters can hold 1e5+ units in empirical use.
Eigen::VectorXd cluster_average(const Eigen::VectorXd& values,
                                const ClusterMap& clusters);

// Column-wise x - x^C.
Eigen::MatrixXd cluster_demean(const Eigen::MatrixXd& values,
                               const ClusterMap& clusters);

// Mean over j in N_{t-1,l,K'}(i) of (y_{j,t-1} - y^C_{j,t-1}); zero for
// empty neighborhoods. The cluster mean is the neighbor's own cluster.
Eigen::VectorXd neighbor_average_regressor(const PanelDataset& data,
                                           const NetworkStack& nets, int t,
                                           int layer, Group src);

// Stacked regressor W_{i,t} = [y_{i,t-1}, bank-source averages (layers 1..L),
// firm-source averages (layers 1..L), X_{i,t}], for t = 1..T.
struct RegressorPanel {
  std::vector<Eigen::MatrixXd> W;  // W[t-1] is n x d_W
  int d_W = 0;
};

RegressorPanel build_regressors(const PanelDataset& data,
                                const NetworkStack& nets);

// x^H_{i,t} = sum_{s=t}^T h(s,t) (x_{i,s} - x^C_{i,s}) for t = 1..T-1.
// `series` holds periods 1..T (one matrix per period); the result drops the
// last period. Removes unit fixed effects and cluster-period shocks.
std::vector<Eigen::MatrixXd> helmert_cluster_transform(
    const std::vector<Eigen::MatrixXd>& series, const ClusterMap& clusters,
    const HelmertWeights& weights);

}  // namespace netspill

#endif
