// Exchangeable random-intercept covariance algebra.
//
// With cluster variance tau^2 and residual variance sigma^2, the individual
// outcomes of one cluster have covariance sigma^2 I + tau^2 11', and the J
// cluster-period means have covariance V = tau^2 11' + (sigma^2/K) I.  All
// derived quantities below are closed forms in (tau^2, sigma^2, J, K).
#pragma once

#include <Eigen/Dense>

#include "swcrt/common.hpp"

namespace swcrt {

// Largest correlation admitted anywhere; the closed forms blow up as rho -> 1.
inline constexpr double kMaxRho = 0.999;

struct CorrelationParams {
  double tau_sq = 0;    // between-cluster variance
  double sigma_sq = 0;  // residual variance
  int J = 0;            // periods
  int K = 0;            // individuals per cluster-period

  // Requires sigma_sq > 0, tau_sq >= 0, J >= 2, K >= 1, and an implied
  // rho <= kMaxRho.
  static CorrelationParams derive(double tau_sq, double sigma_sq, int J, int K);
  // Planning-style inputs: intraclass correlation and residual variance, so
  // tau^2 = rho*sigma_sq/(1-rho).
  static CorrelationParams from_icc(double rho, double sigma_sq, int J, int K);

  double sigma_t_sq() const { return tau_sq + sigma_sq; }
  double rho() const { return tau_sq / (tau_sq + sigma_sq); }
  // Correlation of two cluster-period means of the same cluster.
  double phi() const;
  // Eigenvalues of the JK x JK exchangeable correlation matrix.
  double lambda1() const { return 1.0 - rho(); }
  double lambda2() const { return 1.0 + (static_cast<double>(J) * K - 1.0) * rho(); }

  // Cluster-period-mean covariance V = eta^2 {(1-phi) I + phi 11'} and its
  // inverse V^{-1} = x I - y 11'.  When tau_sq = 0 these degenerate to
  // V = (sigma^2/K) I, y = 0, x = K/sigma^2.
  double eta_sq() const;
  double x_coef() const;
  double y_coef() const;
  Eigen::MatrixXd mean_covariance() const;
  Eigen::MatrixXd mean_precision() const;
};

// Correlation-scale covariance of cluster-period means as a function of the
// intraclass correlation alone: C = rho 11' + ((1-rho)/K) I, so that
// V = sigma_t^2 C.  Used by the profiled variance-component fits.
struct MeanCorrelation {
  double rho = 0;
  int J = 0;
  int K = 0;

  double lambda1() const { return 1.0 - rho; }
  double lambda2() const { return 1.0 + (static_cast<double>(J) * K - 1.0) * rho; }
  // C^{-1} = xc I - yc 11'.
  double xc() const { return K / lambda1(); }
  double yc() const {
    return rho * static_cast<double>(K) * K / (lambda1() * lambda2());
  }
  double logdet() const;  // log |C|
  Eigen::MatrixXd matrix() const;
  Eigen::MatrixXd inverse() const;
};

// Projection weights proportional to the inverse of (1-phi) I + phi 11'.
// GLS estimates are invariant to the overall scale, so this is the only
// function of phi the estimator weights and bias formulas need.
Eigen::MatrixXd phi_precision(double phi, int J);

}  // namespace swcrt
