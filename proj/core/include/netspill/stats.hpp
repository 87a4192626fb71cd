#ifndef NETSPILL_STATS_HPP
#define NETSPILL_STATS_HPP

namespace netspill {

// Standard normal CDF via erfc.
double normal_cdf(double x);

// Inverse standard normal CDF: rational approximation refined by one Newton
// step on the CDF, accurate to ~1e-15 over (0,1).
double normal_quantile(double p);

}  // namespace netspill

#endif
