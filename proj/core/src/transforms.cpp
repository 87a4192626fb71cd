#include "netspill/transforms.hpp"

#include <cmath>

namespace netspill {

HelmertWeights::HelmertWeights(int T) : T_(T) {
  if (T < 2)
    throw Error("transforms", "Helmert weights need T >= 2, got T = " +
                                  std::to_string(T));
}

Eigen::VectorXd cluster_average(const Eigen::VectorXd& values,
                                const ClusterMap& clusters) {
  if (values.size() != clusters.n())
    throw Error("transforms", "cluster_average: one value per unit required");
  Eigen::VectorXd out(values.size());
  for (const auto& mem : clusters.members) {
    double sum = 0.0, comp = 0.0;
    for (UnitId i : mem) {
      const double term = values[i] - comp;
      const double next = sum + term;
      comp = (next - sum) - term;
      sum = next;
    }
    const double mean = sum / static_cast<double>(mem.size());
    for (UnitId i : mem) out[i] = mean;
  }
  return out;
}

Eigen::MatrixXd cluster_demean(const Eigen::MatrixXd& values,
                               const ClusterMap& clusters) {
  if (values.rows() != clusters.n())
    throw Error("transforms", "cluster_demean: one row per unit required");
  Eigen::MatrixXd out(values.rows(), values.cols());
  for (Eigen::Index c = 0; c < values.cols(); ++c)
    out.col(c) = values.col(c) - cluster_average(values.col(c), clusters);
  return out;
}

Eigen::VectorXd neighbor_average_regressor(const PanelDataset& data,
                                           const NetworkStack& nets, int t,
                                           int layer, Group src) {
  if (t < 1 || t > data.T)
    throw Error("transforms", "neighbor average: period out of range");
  const int n = data.n();
  const Eigen::VectorXd yd =
      data.y.col(t - 1) - cluster_average(data.y.col(t - 1), data.clusters);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    const auto& nbrs = nets.in_neighbors(t - 1, layer, i, src);
    if (nbrs.empty()) continue;
    double sum = 0.0;
    for (UnitId j : nbrs) sum += yd[j];
    out[i] = sum / static_cast<double>(nbrs.size());
  }
  return out;
}

RegressorPanel build_regressors(const PanelDataset& data,
                                const NetworkStack& nets) {
  const int n = data.n();
  const int L = nets.layers;
  RegressorPanel panel;
  panel.d_W = 1 + 2 * L + data.p;
  panel.W.reserve(data.T);
  for (int t = 1; t <= data.T; ++t) {
    Eigen::MatrixXd Wt(n, panel.d_W);
    Wt.col(0) = data.y.col(t - 1);
    for (int l = 0; l < L; ++l)
      Wt.col(1 + l) = neighbor_average_regressor(data, nets, t, l, Group::B);
    for (int l = 0; l < L; ++l)
      Wt.col(1 + L + l) =
          neighbor_average_regressor(data, nets, t, l, Group::F);
    if (data.p > 0) Wt.rightCols(data.p) = data.X[t - 1];
    panel.W.push_back(std::move(Wt));
  }
  return panel;
}

std::vector<Eigen::MatrixXd> helmert_cluster_transform(
    const std::vector<Eigen::MatrixXd>& series, const ClusterMap& clusters,
    const HelmertWeights& weights) {
  const int T = weights.T();
  if (static_cast<int>(series.size()) != T)
    throw Error("transforms",
                "helmert_cluster_transform: series must cover periods 1..T");
  std::vector<Eigen::MatrixXd> demeaned;
  demeaned.reserve(T);
  for (const auto& xt : series) {
    if (xt.rows() != clusters.n() || xt.cols() != series[0].cols())
      throw Error("transforms", "helmert_cluster_transform: shape mismatch");
    demeaned.push_back(cluster_demean(xt, clusters));
  }
  std::vector<Eigen::MatrixXd> out;
  out.reserve(T - 1);
  for (int t = 1; t <= T - 1; ++t) {
    Eigen::MatrixXd acc =
        Eigen::MatrixXd::Zero(series[0].rows(), series[0].cols());
    for (int s = t; s <= T; ++s) acc += weights(s, t) * demeaned[s - 1];
    out.push_back(std::move(acc));
  }
  return out;
}

}  // namespace netspill
