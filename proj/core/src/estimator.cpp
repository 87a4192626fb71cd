#include "netspill/estimator.hpp"

#include <cmath>

#include "netspill/stats.hpp"

namespace netspill {

namespace {

constexpr double kConditionLimit = 1e12;

std::vector<Eigen::MatrixXd> outcome_series(const PanelDataset& data) {
  std::vector<Eigen::MatrixXd> series;
  series.reserve(data.T);
  for (int t = 1; t <= data.T; ++t) series.push_back(data.y.col(t));
  return series;
}

MomentSet accumulate_moments(const std::vector<Eigen::MatrixXd>& Z_demeaned,
                             const std::vector<Eigen::MatrixXd>& y_H,
                             const std::vector<Eigen::MatrixXd>& W_H,
                             const GroupPartition& partition, Group group) {
  const int d_Z = static_cast<int>(Z_demeaned[0].cols());
  const int d_W = static_cast<int>(W_H[0].cols());
  const int n_K = partition.count(group);
  if (n_K == 0) throw Error("moments", "group is empty");

  MomentSet m;
  m.group = group;
  m.n_K = n_K;
  m.A = Eigen::VectorXd::Zero(d_Z);
  m.B = Eigen::MatrixXd::Zero(d_Z, d_W);
  const int n = partition.n();
  for (std::size_t t = 0; t < Z_demeaned.size(); ++t) {
    for (int i = 0; i < n; ++i) {
      if (partition.group_of[i] != group) continue;
      m.A.noalias() += Z_demeaned[t].row(i).transpose() * y_H[t](i, 0);
      m.B.noalias() +=
          Z_demeaned[t].row(i).transpose() * W_H[t].row(i);
    }
  }
  m.A /= static_cast<double>(n_K);
  m.B /= static_cast<double>(n_K);
  return m;
}

}  // namespace

MomentSet moment_matrices(const InstrumentPanel& Z, const PanelDataset& data,
                          const RegressorPanel& W, const ClusterMap& clusters,
                          const HelmertWeights& weights, Group group) {
  const auto y_H = helmert_cluster_transform(outcome_series(data), clusters,
                                             weights);
  const auto W_H = helmert_cluster_transform(W.W, clusters, weights);
  std::vector<Eigen::MatrixXd> Zd;
  Zd.reserve(Z.Z.size());
  for (const auto& Zt : Z.Z) Zd.push_back(cluster_demean(Zt, clusters));
  return accumulate_moments(Zd, y_H, W_H, data.partition, group);
}

Eigen::VectorXd initial_estimator(const MomentSet& m) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.B);
  qr.setThreshold(1e-10);
  if (qr.rank() < m.B.cols()) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < m.B.cols(); ++k)
      cols += (cols.empty() ? "" : ", ") + std::to_string(perm[k]);
    throw Error("initial_estimator",
                "moment matrix B is rank deficient in column(s) " + cols);
  }
  return qr.solve(m.A);
}

Eigen::MatrixXd weight_matrix(const InstrumentPanel& Z,
                              const std::vector<Eigen::VectorXd>& residuals_H,
                              const ClusterMap& clusters, Group group,
                              const GroupPartition& partition) {
  if (residuals_H.size() != Z.Z.size())
    throw Error("weight_matrix", "residuals must cover t = 1..T-1");
  std::vector<Eigen::MatrixXd> Zd;
  Zd.reserve(Z.Z.size());
  for (const auto& Zt : Z.Z) Zd.push_back(cluster_demean(Zt, clusters));

  const int n = partition.n();
  const int n_K = partition.count(group);
  Eigen::MatrixXd Omega = Eigen::MatrixXd::Zero(Z.d_Z, Z.d_Z);
  Eigen::VectorXd g(Z.d_Z);
  for (int i = 0; i < n; ++i) {
    if (partition.group_of[i] != group) continue;
    g.setZero();
    for (std::size_t t = 0; t < Zd.size(); ++t)
      g.noalias() += Zd[t].row(i).transpose() * residuals_H[t](i);
    Omega.noalias() += g * g.transpose();
  }
  Omega /= static_cast<double>(n_K);
  return Omega;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> two_step_estimate(
    const MomentSet& m, const Eigen::MatrixXd& Omega) {
  const Eigen::Index d_Z = m.B.rows();
  const Eigen::Index d_W = m.B.cols();

  if (d_Z == d_W) {
    // Just identified: the weight matrix cancels, delta = B^{-1} A and
    // V = B^{-1} Omega B^{-T}. No inversion of Omega, so a near-zero Omega
    // (noiseless data) is handled.
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m.B);
    qr.setThreshold(1e-10);
    if (qr.rank() < d_W)
      throw Error("two_step_estimate", "moment matrix B is singular");
    const Eigen::VectorXd delta = qr.solve(m.A);
    const Eigen::MatrixXd Binv =
        qr.solve(Eigen::MatrixXd::Identity(d_Z, d_Z));
    Eigen::MatrixXd V = Binv * Omega * Binv.transpose();
    V = 0.5 * (V + V.transpose()).eval();
    return {delta, V};
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Omega);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConditionLimit)
    throw Error("two_step_estimate",
                "weight matrix is ill conditioned; use more time periods or "
                "fewer instruments");
  const Eigen::MatrixXd Omega_inv =
      es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
      es.eigenvectors().transpose();
  const Eigen::MatrixXd G = m.B.transpose() * Omega_inv;
  const Eigen::MatrixXd M = G * m.B;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success)
    throw Error("two_step_estimate", "B' Omega^{-1} B is not invertible");
  const Eigen::VectorXd delta = ldlt.solve(G * m.A);
  Eigen::MatrixXd V = ldlt.solve(Eigen::MatrixXd::Identity(d_W, d_W));
  V = 0.5 * (V + V.transpose()).eval();
  return {delta, V};
}

namespace {

double lemma1_residual(const std::vector<Eigen::MatrixXd>& Zd,
                       const MomentSet& m, const HelmertWeights& weights,
                       const GroupPartition& partition, Group group,
                       const Eigen::MatrixXd& epsilon,
                       const Eigen::VectorXd& delta_true) {
  const int T = weights.T();
  const int n = partition.n();
  const double sqrt_nK = std::sqrt(static_cast<double>(m.n_K));

  // Route 1: sqrt(n_K) U_K from the moments and the true coefficients.
  const Eigen::VectorXd lhs = sqrt_nK * (m.A - m.B * delta_true);

  // Route 2: the martingale-sum form over accumulated instruments.
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m.A.size());
  for (int s = 1; s <= T; ++s) {
    Eigen::VectorXd xi = Eigen::VectorXd::Zero(m.A.size());
    const int t_max = std::min(s, T - 1);
    for (int i = 0; i < n; ++i) {
      if (partition.group_of[i] != group) continue;
      Eigen::VectorXd z_tilde = Eigen::VectorXd::Zero(m.A.size());
      for (int t = 1; t <= t_max; ++t)
        z_tilde.noalias() += weights(s, t) * Zd[t - 1].row(i).transpose();
      xi.noalias() += z_tilde * epsilon(i, s);
    }
    rhs.noalias() += xi / sqrt_nK;
  }

  const double scale = std::max(rhs.norm(), 1e-12);
  return (lhs - rhs).norm() / scale;
}

}  // namespace

EstimationResult estimate(const PanelDataset& data, const NetworkStack& nets,
                          IvOption option, double alpha,
                          const TruthForDiagnostics* truth) {
  const auto report = validate_dataset(data, nets);
  if (!report.ok())
    throw Error("validate", "invalid dataset: " +
                                report.violations.front().message);

  const HelmertWeights weights(data.T);
  const RegressorPanel regs = build_regressors(data, nets);
  const auto y_H =
      helmert_cluster_transform(outcome_series(data), data.clusters, weights);
  const auto W_H = helmert_cluster_transform(regs.W, data.clusters, weights);
  const InstrumentPanel Z =
      build_instruments(option, regs, W_H, data.clusters);

  std::vector<Eigen::MatrixXd> Zd;
  Zd.reserve(Z.Z.size());
  for (const auto& Zt : Z.Z) Zd.push_back(cluster_demean(Zt, data.clusters));

  EstimationResult result;
  result.alpha = alpha;
  result.option = option;
  result.d_W = regs.d_W;
  result.L = nets.layers;
  const double z_crit = normal_quantile(1.0 - alpha / 2.0);

  for (Group group : {Group::B, Group::F}) {
    const int n_K = data.partition.count(group);
    if (n_K < regs.d_W)
      throw Error("moments",
                  std::string("group ") + group_name(group) +
                      " has fewer units than coefficients; the moment "
                      "equations cannot identify its parameters");

    MomentSet m =
        accumulate_moments(Zd, y_H, W_H, data.partition, group);
    GroupEstimate& est = result.group(group);
    est.n_K = n_K;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.B);
    est.B_condition = svd.singularValues()(0) /
                      svd.singularValues()(svd.singularValues().size() - 1);

    est.delta_tilde = initial_estimator(m);

    std::vector<Eigen::VectorXd> residuals;
    residuals.reserve(y_H.size());
    for (std::size_t t = 0; t < y_H.size(); ++t)
      residuals.push_back(y_H[t].col(0) - W_H[t] * est.delta_tilde);
    est.Omega_hat =
        weight_matrix(Z, residuals, data.clusters, group, data.partition);

    auto [delta_hat, V_hat] = two_step_estimate(m, est.Omega_hat);
    est.delta_hat = std::move(delta_hat);
    est.V_hat = std::move(V_hat);

    est.se.resize(regs.d_W);
    est.ci.clear();
    for (int j = 0; j < regs.d_W; ++j) {
      est.se[j] =
          std::sqrt(std::max(est.V_hat(j, j), 0.0) / static_cast<double>(n_K));
      est.ci.emplace_back(est.delta_hat[j] - z_crit * est.se[j],
                          est.delta_hat[j] + z_crit * est.se[j]);
    }

    if (truth != nullptr) {
      const Eigen::VectorXd& delta_true =
          group == Group::B ? truth->delta_B : truth->delta_F;
      est.lemma1_rel_residual = lemma1_residual(
          Zd, m, weights, data.partition, group, truth->epsilon, delta_true);
    }
  }
  return result;
}

}  // namespace netspill
