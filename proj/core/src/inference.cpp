#include "netspill/inference.hpp"

#include <cmath>

#include "netspill/stats.hpp"

namespace netspill {

double chi2_1_quantile(double tau) {
  if (!(tau > 0.0 && tau < 1.0))
    throw Error("inference", "chi2_1_quantile: tau must lie in (0,1)");
  // chi2(1) is the square of a standard normal.
  const double z = normal_quantile(0.5 * (1.0 + tau));
  return z * z;
}

std::pair<double, double> squared_t_stats(const EstimationResult& res,
                                          int idx_FB, int idx_BF) {
  const GroupEstimate& bank = res.group(Group::B);
  const GroupEstimate& firm = res.group(Group::F);
  if (idx_FB < 0 || idx_FB >= res.d_W || idx_BF < 0 || idx_BF >= res.d_W)
    throw Error("inference", "squared_t_stats: coefficient index out of range");

  const double v_FB = bank.V_hat(idx_FB, idx_FB);
  const double v_BF = firm.V_hat(idx_BF, idx_BF);
  if (!(v_FB > 0.0) || !(v_BF > 0.0))
    throw Error("inference",
                "squared_t_stats: zero variance for a tested coefficient");

  const double Q_FB =
      bank.n_K * bank.delta_hat[idx_FB] * bank.delta_hat[idx_FB] / v_FB;
  const double Q_BF =
      firm.n_K * firm.delta_hat[idx_BF] * firm.delta_hat[idx_BF] / v_BF;
  return {Q_FB, Q_BF};
}

StepdownDecision stepdown(double Q_FB, double Q_BF, double alpha) {
  StepdownDecision d;
  d.Q_FB = Q_FB;
  d.Q_BF = Q_BF;
  d.alpha = alpha;
  d.c_low = chi2_1_quantile(std::sqrt(1.0 - alpha));
  d.c_high = chi2_1_quantile(1.0 - alpha);

  const bool fb_passes = Q_FB <= d.c_low;
  const bool bf_passes = Q_BF <= d.c_low;

  if (fb_passes && bf_passes) {  // step 1
    d.retain_FB = true;
    d.retain_BF = true;
    return d;
  }
  if (!fb_passes && !bf_passes) {  // neither enters S_hat
    d.retain_FB = false;
    d.retain_BF = false;
    return d;
  }
  // Step 2 kept exactly one; step 3 re-tests it at the marginal threshold.
  if (fb_passes) {
    d.retain_BF = false;
    d.retain_FB = Q_FB <= d.c_high;
  } else {
    d.retain_FB = false;
    d.retain_BF = Q_BF <= d.c_high;
  }
  return d;
}

}  // namespace netspill
