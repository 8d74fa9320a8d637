// Closed-form expectations of misspecified working-model estimators on the
// standard design, and a dispatcher that predicts the expectation for any
// working/true model pair, falling back to the exact GLS projection when no
// closed form exists.
//
// Notation: Q = J-1 sequences, phi is the within-cluster correlation of
// cluster-period means, j indexes exposure time 1..Q, ell is the anticipation
// window length.
#pragma once

#include <Eigen/Dense>

#include "swcrt/common.hpp"
#include "swcrt/design.hpp"
#include "swcrt/truth.hpp"

namespace swcrt {

// Loading of the anticipation effect on the constant-effect estimator when
// anticipation is omitted: E(delta_hat) = delta + omega * gamma.  Always
// negative.
double omega_hh_hhant(int Q, double phi);

// Same loading for an ell-period anticipation window; ell = 1 reduces to
// omega_hh_hhant and ell = Q gives exactly -1.
double omega_hh_hhant_order(int Q, double phi, int ell);

// Constant-effect estimator under exposure-time heterogeneity plus
// anticipation: E(delta_hat) = sum_j pi(j) delta(j) + sum_j omega(j) * gamma.
// pi sums to one; omega sums to omega_hh_hhant.
Eigen::VectorXd pi_hh_under_etiant(int Q, double phi);
Eigen::VectorXd omega_hh_under_etiant(int Q, double phi);

// Anticipation-adjusted constant-effect model under exposure-time
// heterogeneity: E(delta_hat) = sum_j pi(j) delta(j) and
// E(gamma_hat) = gamma + sum_j psi(j) delta(j).  The same weights apply
// whether or not the truth has an anticipation term.  pi sums to one, psi
// sums to zero.
Eigen::VectorXd pi_hhant_under_eti(int Q, double phi);
Eigen::VectorXd psi_hhant_under_eti(int Q, double phi);

// Exposure-time working model in the three-period standard design when the
// truth adds an anticipation effect: E{delta_hat(s)} = delta(s) - (1+s*phi)*gamma.
double eti_j3_gamma_loading(double phi, int s);

// Predicted expectation of a working model's estimators under a true model.
struct ExpectationReport {
  Model working = Model::HH;
  Model truth = Model::HH;
  std::string method;        // "closed_form" or "numeric"
  double effect = 0;         // E of the reported effect (delta or average)
  double gamma = 0;          // E of the anticipation coefficient; NaN if absent
  Eigen::VectorXd exposure;  // E of delta_hat(s); empty for constant-effect models

  std::string to_json() const;
};

// Dispatch: correctly specified and over-specified pairs return the truth
// values; pairs covered by a closed form use it; everything else (general
// layouts, exposure-time working models beyond J = 3, multi-period windows
// outside the constant-effect pair) is computed by the exact projection
// oracle and labeled "numeric".
ExpectationReport predict_expectation(const Layout& layout, Model working,
                                      const TrueModelParams& truth, double phi);

// Weight-grid export for figures: rows Q,phi,j,weight_name,value.
std::string bias_grid_csv(const std::vector<int>& Qs,
                          const std::vector<double>& phis);

}  // namespace swcrt
