#include "swcrt/bias.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "swcrt/estimation.hpp"
#include "swcrt/formats.hpp"

namespace swcrt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_q(int Q) {
  if (Q < 2) throw ConfigError("need at least two sequences (J >= 3)");
}

void check_phi(double phi) {
  if (!(phi >= 0 && phi < 1)) throw ConfigError("phi must be in [0, 1)");
}

}  // namespace

double omega_hh_hhant(int Q, double phi) {
  check_q(Q);
  check_phi(phi);
  return -6 * (1 + phi * Q) / ((Q + 1) * (2 + phi * Q));
}

double omega_hh_hhant_order(int Q, double phi, int ell) {
  check_q(Q);
  check_phi(phi);
  if (ell < 1 || ell > Q) throw ConfigError("window length must be in 1..J-1");
  const double L = ell, q = Q;
  double numer = 6 * phi * q * q * q - 9 * phi * L * q * q + 3 * phi * q * q +
                 6 * q * q + 4 * phi * L * L * q - 3 * phi * L * q - 6 * L * q -
                 phi * q + 2 * L * L - 2;
  double denom = q * (q + 1) * (q - 1) * (phi * q + 2);
  return -L * numer / denom;
}

Eigen::VectorXd pi_hh_under_etiant(int Q, double phi) {
  check_q(Q);
  check_phi(phi);
  Eigen::VectorXd pi(Q);
  const double denom = Q * (Q + 1.0) * (Q - 1.0) * (phi * Q + 2);
  for (int j = 1; j <= Q; ++j)
    pi(j - 1) = 6 * (j - Q - 1.0) *
                ((1 + 2 * phi * Q) * j - (1 + phi + phi * Q) * Q) / denom;
  return pi;
}

Eigen::VectorXd omega_hh_under_etiant(int Q, double phi) {
  check_q(Q);
  check_phi(phi);
  Eigen::VectorXd omega(Q);
  const double denom = Q * (Q - 1.0) * (Q + 1.0) * (phi * Q + 2);
  for (int j = 1; j <= Q; ++j)
    omega(j - 1) = -6 * (phi * Q * Q - phi * Q + 2.0 * j - 2) / denom;
  return omega;
}

Eigen::VectorXd pi_hhant_under_eti(int Q, double phi) {
  check_q(Q);
  check_phi(phi);
  Eigen::VectorXd pi(Q);
  const double q = Q;
  const double denom = q * (q - 1) * (phi * q * q - 2 * phi * q + 2 * q - 1);
  for (int jj = 1; jj <= Q; ++jj) {
    const double j = jj;
    pi(jj - 1) = 6 *
                 (phi * q * q * q - 3 * phi * q * q * j + phi * q * q + q * q +
                  2 * phi * q * j * j - 2 * phi * q * j + phi * q - 2 * q * j +
                  j * j) /
                 denom;
  }
  return pi;
}

Eigen::VectorXd psi_hhant_under_eti(int Q, double phi) {
  check_q(Q);
  check_phi(phi);
  Eigen::VectorXd psi(Q);
  const double q = Q;
  const double denom = q * (q - 1) * (phi * q * q - 2 * phi * q + 2 * q - 1);
  for (int jj = 1; jj <= Q; ++jj) {
    const double j = jj;
    psi(jj - 1) = (2 * phi * q * q * q - 8 * phi * q * q * j +
                   5 * phi * q * q + q * q + 6 * phi * q * j * j -
                   8 * phi * q * j + 3 * phi * q - 4 * q * j + q + 3 * j * j -
                   j) /
                  denom;
  }
  return psi;
}

double eti_j3_gamma_loading(double phi, int s) {
  check_phi(phi);
  if (s != 1 && s != 2)
    throw ConfigError("exposure time must be 1 or 2 in the three-period design");
  return -(1 + s * phi);
}

std::string ExpectationReport::to_json() const {
  std::ostringstream out;
  out << "{\"working\":\"" << model_name(working) << "\"";
  out << ",\"truth\":\"" << model_name(truth) << "\"";
  out << ",\"method\":\"" << method << "\"";
  out << ",\"effect\":" << json_double(effect);
  out << ",\"gamma\":" << json_double(gamma);
  if (exposure.size() > 0) out << ",\"exposure\":" << json_vector(exposure);
  out << "}";
  return out.str();
}

ExpectationReport predict_expectation(const Layout& layout, Model working,
                                      const TrueModelParams& truth,
                                      double phi) {
  truth.validate(layout);
  check_phi(phi);
  const int J = layout.periods();
  const int Q = J - 1;
  ExpectationReport rep;
  rep.working = working;
  rep.truth = truth.kind;
  rep.gamma = kNaN;

  const bool w_ant = has_anticipation(working);
  const bool w_curve = has_exposure_curve(working);
  const bool t_ant = has_anticipation(truth.kind);
  const bool t_curve = has_exposure_curve(truth.kind);

  // The working model contains the true mean structure, so GLS is unbiased
  // coefficient by coefficient whatever the layout.
  if (w_ant >= t_ant && w_curve >= t_curve) {
    rep.method = "closed_form";
    rep.effect = truth.target_effect(J);
    if (w_ant) rep.gamma = t_ant ? truth.gamma : 0.0;
    if (w_curve) {
      rep.exposure.resize(Q);
      for (int s = 1; s <= Q; ++s) rep.exposure(s - 1) = truth.effect_at(s);
    }
    return rep;
  }

  const bool standard = layout.is_standard();
  const int ell = layout.ell();

  if (standard && working == Model::HH && truth.kind == Model::HH_ANT) {
    rep.method = "closed_form";
    rep.effect = truth.delta + omega_hh_hhant_order(Q, phi, ell) * truth.gamma;
    return rep;
  }
  if (standard && working == Model::HH && truth.kind == Model::ETI) {
    // No anticipation term on either side, so the window length drops out.
    rep.method = "closed_form";
    rep.effect = pi_hh_under_etiant(Q, phi).dot(truth.delta_s);
    return rep;
  }
  if (standard && ell == 1 && working == Model::HH &&
      truth.kind == Model::ETI_ANT) {
    rep.method = "closed_form";
    rep.effect = pi_hh_under_etiant(Q, phi).dot(truth.delta_s) +
                 omega_hh_under_etiant(Q, phi).sum() * truth.gamma;
    return rep;
  }
  if (standard && ell == 1 && working == Model::HH_ANT && t_curve) {
    rep.method = "closed_form";
    rep.effect = pi_hhant_under_eti(Q, phi).dot(truth.delta_s);
    rep.gamma = (t_ant ? truth.gamma : 0.0) +
                psi_hhant_under_eti(Q, phi).dot(truth.delta_s);
    return rep;
  }
  if (standard && ell == 1 && J == 3 && working == Model::ETI && t_ant) {
    rep.method = "closed_form";
    rep.exposure.resize(2);
    for (int s = 1; s <= 2; ++s)
      rep.exposure(s - 1) =
          truth.effect_at(s) + eti_j3_gamma_loading(phi, s) * truth.gamma;
    rep.effect = rep.exposure.mean();
    return rep;
  }

  rep.method = "numeric";
  Eigen::VectorXd theta = expected_estimate(layout, working, truth, phi);
  const int offset = J + (w_ant ? 1 : 0);
  if (w_ant) rep.gamma = theta(J);
  if (w_curve) {
    rep.exposure = theta.segment(offset, Q);
    rep.effect = rep.exposure.mean();
  } else {
    rep.effect = theta(offset);
  }
  return rep;
}

std::string bias_grid_csv(const std::vector<int>& Qs,
                          const std::vector<double>& phis) {
  std::ostringstream out;
  out << "Q,phi,j,weight_name,value\n";
  auto emit = [&](int Q, double phi, int j, const char* name, double value) {
    out << Q << ',' << format_double(phi) << ',' << j << ',' << name << ','
        << format_double(value) << '\n';
  };
  for (int Q : Qs) {
    for (double phi : phis) {
      emit(Q, phi, 0, "omega", omega_hh_hhant(Q, phi));
      Eigen::VectorXd pi1 = pi_hh_under_etiant(Q, phi);
      Eigen::VectorXd om1 = omega_hh_under_etiant(Q, phi);
      Eigen::VectorXd pi2 = pi_hhant_under_eti(Q, phi);
      Eigen::VectorXd ps2 = psi_hhant_under_eti(Q, phi);
      for (int j = 1; j <= Q; ++j) {
        emit(Q, phi, j, "pi_hh", pi1(j - 1));
        emit(Q, phi, j, "omega_hh", om1(j - 1));
        emit(Q, phi, j, "pi_hhant", pi2(j - 1));
        emit(Q, phi, j, "psi_hhant", ps2(j - 1));
      }
    }
  }
  return out.str();
}

}  // namespace swcrt
