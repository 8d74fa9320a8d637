#include "swcrt/correlation.hpp"

#include <cmath>

namespace swcrt {

CorrelationParams CorrelationParams::derive(double tau_sq, double sigma_sq,
                                            int J, int K) {
  if (sigma_sq <= 0) throw ConfigError("residual variance must be positive");
  if (tau_sq < 0) throw ConfigError("cluster variance must be nonnegative");
  if (J < 2) throw ConfigError("need at least 2 periods");
  if (K < 1) throw ConfigError("need at least 1 individual per cell");
  CorrelationParams p{tau_sq, sigma_sq, J, K};
  if (p.rho() > kMaxRho)
    throw ConfigError("intraclass correlation above " + std::to_string(kMaxRho));
  return p;
}

CorrelationParams CorrelationParams::from_icc(double rho, double sigma_sq,
                                              int J, int K) {
  if (rho < 0 || rho > kMaxRho)
    throw ConfigError("intraclass correlation outside [0, " +
                      std::to_string(kMaxRho) + "]");
  if (sigma_sq <= 0) throw ConfigError("residual variance must be positive");
  return derive(rho * sigma_sq / (1.0 - rho), sigma_sq, J, K);
}

double CorrelationParams::phi() const {
  return tau_sq / (tau_sq + sigma_sq / K);
}

double CorrelationParams::eta_sq() const {
  // eta^2 = tau^2/phi = tau^2 + sigma^2/K, the variance of one cell mean;
  // this form stays finite at tau^2 = 0.
  return tau_sq + sigma_sq / K;
}

double CorrelationParams::x_coef() const {
  // With V = eta^2 {(1-phi) I + phi 11'}, the inverse is x I - y 11'.
  return 1.0 / (eta_sq() * (1.0 - phi()));
}

double CorrelationParams::y_coef() const {
  double f = phi();
  if (f == 0) return 0.0;
  return f / (eta_sq() * (1.0 - f) * (1.0 + f * J - f));
}

Eigen::MatrixXd CorrelationParams::mean_covariance() const {
  Eigen::MatrixXd v = Eigen::MatrixXd::Constant(J, J, tau_sq);
  v.diagonal().array() += sigma_sq / K;
  return v;
}

Eigen::MatrixXd CorrelationParams::mean_precision() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(J, J, -y_coef());
  p.diagonal().array() += x_coef();
  return p;
}

double MeanCorrelation::logdet() const {
  // Eigenvalues of C: lambda2/K once (constant vector) and (1-rho)/K with
  // multiplicity J-1.
  return (J - 1) * std::log(lambda1()) + std::log(lambda2()) -
         J * std::log(static_cast<double>(K));
}

Eigen::MatrixXd MeanCorrelation::matrix() const {
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(J, J, rho);
  c.diagonal().array() += lambda1() / K;
  return c;
}

Eigen::MatrixXd MeanCorrelation::inverse() const {
  Eigen::MatrixXd p = Eigen::MatrixXd::Constant(J, J, -yc());
  p.diagonal().array() += xc();
  return p;
}

Eigen::MatrixXd phi_precision(double phi, int J) {
  if (phi < 0 || phi >= 1) throw ConfigError("phi outside [0, 1)");
  Eigen::MatrixXd p =
      Eigen::MatrixXd::Constant(J, J, -phi / (1.0 + (J - 1.0) * phi));
  p.diagonal().array() += 1.0;
  return p;
}

}  // namespace swcrt
