#include "netspill/instruments.hpp"

#include <cmath>

namespace netspill {

std::string iv_option_name(IvOption option) {
  switch (option) {
    case IvOption::Simple: return "simple";
    case IvOption::ProjA: return "A";
    case IvOption::ProjB: return "B";
    case IvOption::ProjC: return "C";
  }
  return "?";
}

IvOption iv_option_from_name(const std::string& name) {
  if (name == "simple") return IvOption::Simple;
  if (name == "A" || name == "a") return IvOption::ProjA;
  if (name == "B" || name == "b") return IvOption::ProjB;
  if (name == "C" || name == "c") return IvOption::ProjC;
  throw Error("instruments", "unknown IV option '" + name + "'");
}

Eigen::MatrixXd phi_basis(IvOption option, const Eigen::MatrixXd& Wd,
                          const Eigen::MatrixXd* Wd_prev, int t) {
  const Eigen::Index n = Wd.rows();
  const Eigen::Index d = Wd.cols();
  switch (option) {
    case IvOption::Simple:
      throw Error("instruments", "phi_basis: Simple option has no basis");
    case IvOption::ProjA:
      return Wd;
    case IvOption::ProjB: {
      Eigen::MatrixXd phi(n, 2 * d);
      phi.leftCols(d) = Wd;
      phi.rightCols(d) = Wd.array().square();
      return phi;
    }
    case IvOption::ProjC: {
      if (t == 1) return phi_basis(IvOption::ProjB, Wd, nullptr, t);
      if (Wd_prev == nullptr)
        throw Error("instruments",
                    "phi_basis: option C needs previous-period regressors at "
                    "t = " + std::to_string(t));
      Eigen::MatrixXd phi(n, 3 * d);
      phi.leftCols(d) = Wd;
      phi.middleCols(d, d) = Wd.array().square();
      phi.rightCols(d) = Wd_prev->array().square();
      return phi;
    }
  }
  throw Error("instruments", "phi_basis: unreachable");
}

namespace {

constexpr double kConditionLimit = 1e12;

}  // namespace

Eigen::MatrixXd project_instruments(const Eigen::MatrixXd& phi,
                                    const Eigen::MatrixXd& target_H, int t) {
  // Equilibrate the basis columns first: rescaling a column changes neither
  // the span nor the fitted values, but keeps the rank check from tripping on
  // scale differences between a column and its square.
  Eigen::VectorXd scale = phi.colwise().norm();
  for (Eigen::Index j = 0; j < scale.size(); ++j)
    if (scale[j] <= 0.0) scale[j] = 1.0;
  const Eigen::MatrixXd phi_s = phi * scale.cwiseInverse().asDiagonal();

  // Gram matrix of the basis; rank checked through its eigenvalues so a
  // deficient basis fails loudly instead of via a pseudo-inverse.
  const Eigen::MatrixXd gram = phi_s.transpose() * phi_s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConditionLimit)
    throw Error("instruments",
                "singular instrument basis at period t = " + std::to_string(t) +
                    " (condition estimate " +
                    std::to_string(hi / std::max(lo, 0.0)) + ")");
  const Eigen::MatrixXd cross = phi_s.transpose() * target_H;
  const Eigen::MatrixXd coef = es.eigenvectors() *
                               es.eigenvalues().cwiseInverse().asDiagonal() *
                               es.eigenvectors().transpose() * cross;
  return phi_s * coef;
}

InstrumentPanel build_instruments(IvOption option, const RegressorPanel& regs,
                                  const std::vector<Eigen::MatrixXd>& regs_H,
                                  const ClusterMap& clusters) {
  const int T = static_cast<int>(regs.W.size());
  InstrumentPanel panel;
  panel.d_Z = regs.d_W;
  panel.Z.reserve(T - 1);

  if (option == IvOption::Simple) {
    for (int t = 1; t <= T - 1; ++t) panel.Z.push_back(regs.W[t - 1]);
    return panel;
  }

  if (static_cast<int>(regs_H.size()) != T - 1)
    throw Error("instruments", "build_instruments: regs_H must cover t=1..T-1");

  std::vector<Eigen::MatrixXd> demeaned;
  demeaned.reserve(T);
  for (const auto& Wt : regs.W) demeaned.push_back(cluster_demean(Wt, clusters));

  for (int t = 1; t <= T - 1; ++t) {
    const Eigen::MatrixXd* prev = t > 1 ? &demeaned[t - 2] : nullptr;
    const Eigen::MatrixXd phi = phi_basis(option, demeaned[t - 1], prev, t);
    panel.Z.push_back(project_instruments(phi, regs_H[t - 1], t));
  }
  return panel;
}

}  // namespace netspill
