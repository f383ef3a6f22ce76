#pragma once

namespace kbal {

// Standard normal CDF, absolute error below 1e-15.
double normal_cdf(double x);

// Standard normal quantile (Wichura's rational approximation), absolute
// error below 1e-13 on (0,1). Throws DomainError outside (0,1).
double normal_quantile(double p);

// Two-sided critical value for a confidence level in (0,1):
// z_quantile(0.95) = normal_quantile(0.975) = 1.959964...
double z_quantile(double level);

}  // namespace kbal
