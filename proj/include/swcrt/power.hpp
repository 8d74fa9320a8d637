// Analytic estimator variances, power, detectable effect sizes, sample-size
// search, and power-comparison grids.
#pragma once

#include <string>
#include <vector>

#include "swcrt/common.hpp"
#include "swcrt/correlation.hpp"
#include "swcrt/design.hpp"

namespace swcrt {

struct VarianceResult {
  Model model = Model::HH;
  double variance = 0;  // variance of the reported effect estimator
  double se = 0;
  // input echo
  int I = 0, J = 0, K = 0, ell = 0;
  double rho = 0;
  double sigma_t_sq = 0;

  std::string to_json() const;
};

// Variance of the treatment-effect estimator (the exposure-time average for
// ETI-type models) under the working model, from the design-constant closed
// forms.  Valid for any layout and window length.  Throws RankError when the
// information is singular (for example an exposure time never observed).
VarianceResult variance(const Layout& layout, Model model,
                        const CorrelationParams& params);

// Simplified standard-design forms for the constant-effect models:
//   V = 12 Q sigma_t^2 lambda1 lambda2 / [I K (Q-1) {Q lambda1 + c lambda2}]
// with c = Q+2 without anticipation and c = Q-1 with it.  Requires Q >= 2.
VarianceResult variance_standard(Model model, int I, int Q, int K,
                                 const CorrelationParams& params);

// Two-tailed Wald power at the given alternative.
double power(double effect, double variance, double alpha);

// Effect size with the requested power: (z_{1-alpha/2} + z_{power}) * SE.
double detectable_effect(const Layout& layout, Model model,
                         const CorrelationParams& params, double target_power,
                         double alpha);

// Smallest cluster count (vary = 'I', standard layouts only, stepping by the
// sequence count) or cell size (vary = 'K') reaching the target power for the
// given effect.  Throws ConvergenceError when the cap is exceeded.
struct SampleSizeResult {
  int value = 0;
  double achieved_power = 0;
};
SampleSizeResult sample_size_search(const Layout& tmpl, Model model,
                                    const CorrelationParams& params,
                                    double effect, double target_power,
                                    double alpha, char vary, int cap = 100000);

// Power-comparison grid over (rho, gamma/effect ratio).  The truth family is
// a constant effect of the given size plus an anticipation effect of
// ratio*effect; each working model's power is evaluated at its own predicted
// (possibly contaminated) alternative.  The valid flag is 0 when the model's
// test does not preserve its level under the null, which happens exactly when
// the anticipation effect contaminates the estimator (nonzero ratio and a
// working model without an anticipation term).
struct GridRequest {
  Model model_a = Model::HH;
  Model model_b = Model::HH_ANT;
  Model truth_family = Model::HH_ANT;
  std::vector<double> rhos;
  std::vector<double> ratios;
  double effect = 0.1;
  double sigma_sq = 1.0;
  double alpha = 0.05;
};
// Rows: param1 (rho), param2 (ratio), power_A, power_B, ratio (A over B),
// valid; emitted in row-major order over (rhos, ratios).
std::string power_ratio_grid(const Layout& layout, const GridRequest& req);

}  // namespace swcrt
