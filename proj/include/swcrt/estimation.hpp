// Working-model fitting on cluster-period means.
//
// All four working models are linear in an intercept, period effects
// (first-period effect fixed at zero), an optional anticipation term, and
// either a constant treatment effect or exposure-time effects.  Fitting is
// generalized least squares with the exchangeable covariance of the means;
// variance components come from a profiled restricted (or full) likelihood
// reduced to one dimension in the intraclass correlation.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swcrt/common.hpp"
#include "swcrt/correlation.hpp"
#include "swcrt/design.hpp"
#include "swcrt/truth.hpp"

namespace swcrt {

// Sufficient statistics of one data set: cluster-period means, the pooled
// within-cell sum of squares, and the individual count.
struct CellData {
  Eigen::MatrixXd means;  // I x J
  double within_ss = 0;   // sum over cells of sum_k (Y - cell mean)^2
  long n_individuals = 0; // I*J*K

  static CellData from_dataset_csv(const std::string& text, Layout* layout_out);
};

// Fixed-effect design block of one sequence: J rows, one per period.
// Columns: intercept, period effects for periods 2..J, then gamma for
// anticipation models, then the effect columns (one for the constant effect,
// J-1 for exposure-time effects).
Eigen::MatrixXd model_design_block(const Layout& layout, Model model, int q);
std::vector<std::string> coefficient_labels(const Layout& layout, Model model);

struct FitResult {
  Model model = Model::HH;
  int J = 0;  // periods; fixes the coefficient block boundaries
  std::vector<std::string> labels;
  Eigen::VectorXd coef;
  Eigen::MatrixXd cov;      // covariance of coef at the fitted variance scale
  double tau_sq = 0;
  double sigma_sq = 0;
  double rho = 0;
  double sigma_t_sq = 0;
  double loglik = 0;        // maximized log-likelihood (REML criterion if reml)
  double ml_loglik = 0;     // maximized full likelihood (for nested-model tests)
  bool reml = true;
  bool boundary = false;    // correlation estimate pinned at a search bound
  int criterion_evals = 0;

  double tau() const;
  int effect_offset() const;  // index of the first effect column
  // Point estimate and standard error of the reported treatment effect:
  // delta for constant-effect models, the exposure-time average otherwise.
  double effect() const;
  double effect_se() const;
  // Anticipation coefficient; NaN for models without one.
  double gamma_hat() const;
  double gamma_se() const;
  Eigen::VectorXd exposure_effects() const;  // empty for constant-effect models

  std::string to_json() const;
};

// GLS at a fixed intraclass correlation.  The covariance in the result is
// scaled by the plug-in total variance estimate (residual-based, divisor
// N - p).  Throws RankError naming the offending column when the model is not
// estimable on the layout.
FitResult gls_fit(const Layout& layout, const CellData& data, Model model,
                  double rho);

// Variance components by profiled REML (or ML when reml is false), then GLS
// at the optimum.  rho is searched on [0, kMaxRho]; hitting either end sets
// the boundary flag.
FitResult fit_model(const Layout& layout, const CellData& data, Model model,
                    bool reml = true);

// Likelihood-ratio test of constant treatment effect against exposure-time
// heterogeneity: HH vs ETI (or HH-ANT vs ETI-ANT with anticipation).  Both
// models are fitted by ML.  df = J-2; throws ConfigError when df < 1.
struct LrtResult {
  double statistic = 0;
  int df = 0;
  double p_value = 0;
};
LrtResult lrt_exposure_heterogeneity(const Layout& layout, const CellData& data,
                                     bool with_anticipation);

// Closed-form estimator weights on sequence-by-period mean outcomes for the
// standard design with a one-period anticipation window.  Entry (q, j) is the
// weight of the mean outcome of sequence q at period j; dividing by the
// per-sequence cluster count gives per-cluster weights.  Each grid reproduces
// the corresponding GLS estimator exactly.
Eigen::MatrixXd hh_weights(int Q, double phi);
Eigen::MatrixXd hhant_delta_weights(int Q, double phi);
Eigen::MatrixXd hhant_gamma_weights(int Q, double phi);
// Exposure-time estimators in the three-period standard design; s is 1 or 2.
Eigen::MatrixXd eti_weights_J3(double phi, int s);

// Exact expectation of every working-model coefficient when the data mean
// follows `truth`: the GLS projection of the true mean surface.  Depends on
// the correlation only through phi.  Labels follow coefficient_labels.
Eigen::VectorXd expected_estimate(const Layout& layout, Model working,
                                  const TrueModelParams& truth, double phi);

}  // namespace swcrt
