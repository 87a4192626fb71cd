#ifndef NETSPILL_INFERENCE_HPP
#define NETSPILL_INFERENCE_HPP

#include <utility>

#include "netspill/estimator.hpp"

namespace netspill {

// Percentile of chi-squared with one degree of freedom.
double chi2_1_quantile(double tau);

// Squared t statistics for the cross-group spillover coefficients:
// Q_FB = n_B beta_FB^2 / v_FB^2 from the bank equation, Q_BF likewise from
// the firm equation. `idx_FB` / `idx_BF` are coefficient positions within
// each group's delta vector.
std::pair<double, double> squared_t_stats(const EstimationResult& res,
                                          int idx_FB, int idx_BF);

// Outcome of the step-down procedure. Hypotheses in S_hat are retained;
// reject J iff J is not in S_hat.
struct StepdownDecision {
  double Q_FB = 0.0;
  double Q_BF = 0.0;
  double alpha = 0.05;
  double c_low = 0.0;   // chi2 quantile at sqrt(1-alpha), the joint screen
  double c_high = 0.0;  // chi2 quantile at 1-alpha, the marginal re-test
  bool retain_FB = true;
  bool retain_BF = true;

  bool reject_FB() const { return !retain_FB; }
  bool reject_BF() const { return !retain_BF; }
};

// Step 1 screens both statistics at c_low; survivors of step 2 are re-tested
// at c_high in step 3. When both statistics exceed the screen, both are
// rejected.
StepdownDecision stepdown(double Q_FB, double Q_BF, double alpha);

}  // namespace netspill

#endif
