#ifndef NETSPILL_INSTRUMENTS_HPP
#define NETSPILL_INSTRUMENTS_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netspill/panel.hpp"
#include "netspill/transforms.hpp"

namespace netspill {

// Simple takes Z = W. ProjA/B/C fit W^H on a basis of the cluster-demeaned
// regressors by cross-sectional least squares and use the fitted values.
enum class IvOption { Simple, ProjA, ProjB, ProjC };

std::string iv_option_name(IvOption option);
IvOption iv_option_from_name(const std::string& name);

struct InstrumentPanel {
  std::vector<Eigen::MatrixXd> Z;  // Z[t-1] is n x d_Z, t = 1..T-1
  int d_Z = 0;
};

// Basis phi_t evaluated row-wise on demeaned regressors:
//   ProjA: w;  ProjB: [w, w^2];  ProjC: [w, w^2] at t=1, [w, w^2, w_prev^2]
// for t > 1. `Wd_prev` may be null only when it is not needed.
Eigen::MatrixXd phi_basis(IvOption option, const Eigen::MatrixXd& Wd,
                          const Eigen::MatrixXd* Wd_prev, int t);

// Cross-sectional least-squares fit of `target_H` on the basis `phi`;
// returns the fitted values. Errors if the basis Gram matrix is singular.
Eigen::MatrixXd project_instruments(const Eigen::MatrixXd& phi,
                                    const Eigen::MatrixXd& target_H, int t);

// Instrument panel over t = 1..T-1. `regs_H` is the Helmert-transformed
// regressor series. The projection pools all units of both groups.
InstrumentPanel build_instruments(IvOption option, const RegressorPanel& regs,
                                  const std::vector<Eigen::MatrixXd>& regs_H,
                                  const ClusterMap& clusters);

}  // namespace netspill

#endif
