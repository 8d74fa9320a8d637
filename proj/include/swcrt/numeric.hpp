// Scalar numeric utilities: normal CDF/quantile, chi-square tail, and a
// bracketed scalar minimizer.
#pragma once

#include <functional>

namespace swcrt {

// Standard normal CDF via the complementary error function.
double normal_cdf(double x);

// Inverse standard normal CDF by a rational approximation (Wichura-style),
// absolute error well below 1e-9 across (0, 1).
double normal_quantile(double p);

// Upper tail P(X > x) of a chi-square distribution with df degrees of freedom.
double chisq_upper_tail(double x, int df);

// Golden-section minimization of f over [lo, hi] to the given x-tolerance.
// f must be finite on the interval.  Returns the abscissa of the minimum.
double golden_section_minimize(const std::function<double(double)>& f,
                               double lo, double hi, double tol);

}  // namespace swcrt
