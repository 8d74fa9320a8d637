#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swcrt/bias.hpp"
#include "swcrt/estimation.hpp"

using swcrt::ConfigError;
using swcrt::Layout;
using swcrt::Model;
using swcrt::TrueModelParams;

namespace {

TrueModelParams anticipation_truth(Model kind, int J, double gamma,
                                   double delta) {
  TrueModelParams t;
  t.kind = kind;
  t.mu = 0.2;
  t.beta = Eigen::VectorXd::LinSpaced(J, 0.0, 0.1 * (J - 1));
  if (swcrt::has_exposure_curve(kind)) {
    t.delta_s = Eigen::VectorXd(J - 1);
    for (int s = 1; s < J; ++s)
      t.delta_s[s - 1] = delta + 0.11 * std::sin(1.7 * s);
  } else {
    t.delta = delta;
  }
  t.gamma = swcrt::has_anticipation(kind) ? gamma : 0.0;
  t.tau_sq = 0.02;
  t.sigma_sq = 1.0;
  return t;
}

}  // namespace

TEST_CASE("anticipation loading on the constant-effect estimator") {
  for (int Q : {2, 4, 8}) {
    for (double phi : {0.0, 0.3, 0.665, 0.9}) {
      double omega = swcrt::omega_hh_hhant(Q, phi);
      CHECK(omega < 0.0);
      // the dense projection of a pure anticipation signal recovers it
      Layout l = Layout::standard(Q, Q + 1, 4, 1);
      TrueModelParams t = anticipation_truth(Model::HH_ANT, Q + 1, 1.0, 0.0);
      Eigen::VectorXd theta =
          oracle::dense_expected_estimate(l, Model::HH, t, phi);
      CHECK(omega == doctest::Approx(theta[Q + 1]).epsilon(1e-10));
    }
  }
  CHECK(swcrt::omega_hh_hhant(8, 0.665) == doctest::Approx(-0.5756).epsilon(1e-3));
  CHECK_THROWS_AS(swcrt::omega_hh_hhant(1, 0.5), ConfigError);
  CHECK_THROWS_AS(swcrt::omega_hh_hhant(4, 1.0), ConfigError);
}

TEST_CASE("multi-period anticipation loading") {
  for (int Q : {3, 5, 8}) {
    for (double phi : {0.0, 0.4, 0.8}) {
      // one-period windows reduce to the basic loading
      CHECK(swcrt::omega_hh_hhant_order(Q, phi, 1) ==
            doctest::Approx(swcrt::omega_hh_hhant(Q, phi)).epsilon(1e-12));
      // a window covering the whole pre-period makes the estimator absorb
      // the anticipation effect completely
      CHECK(swcrt::omega_hh_hhant_order(Q, phi, Q) ==
            doctest::Approx(-1.0).epsilon(1e-12));
      for (int ell = 1; ell <= Q; ++ell) {
        Layout l = Layout::standard(Q, Q + 1, 4, ell);
        TrueModelParams t = anticipation_truth(Model::HH_ANT, Q + 1, 1.0, 0.0);
        Eigen::VectorXd theta =
            oracle::dense_expected_estimate(l, Model::HH, t, phi);
        CHECK(swcrt::omega_hh_hhant_order(Q, phi, ell) ==
              doctest::Approx(theta[Q + 1]).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("constant-effect estimator under exposure-time heterogeneity with anticipation") {
  for (int Q : {2, 3, 6, 9}) {
    for (double phi : {0.0, 0.25, 0.665}) {
      Eigen::VectorXd pi = swcrt::pi_hh_under_etiant(Q, phi);
      Eigen::VectorXd om = swcrt::omega_hh_under_etiant(Q, phi);
      REQUIRE(pi.size() == Q);
      REQUIRE(om.size() == Q);
      CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(om.sum() == doctest::Approx(swcrt::omega_hh_hhant(Q, phi)).epsilon(1e-12));

      // full linear prediction against the dense projection
      Layout l = Layout::standard(Q, Q + 1, 4, 1);
      TrueModelParams t = anticipation_truth(Model::ETI_ANT, Q + 1, 0.04, 0.1);
      double want = pi.dot(t.delta_s) + om.sum() * t.gamma;
      Eigen::VectorXd theta =
          oracle::dense_expected_estimate(l, Model::HH, t, phi);
      CHECK(theta[Q + 1] == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("anticipation-adjusted model under exposure-time heterogeneity") {
  for (int Q : {2, 4, 7, 10}) {
    for (double phi : {0.0, 0.35, 0.8}) {
      Eigen::VectorXd pi = swcrt::pi_hhant_under_eti(Q, phi);
      Eigen::VectorXd psi = swcrt::psi_hhant_under_eti(Q, phi);
      CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(psi.sum() == doctest::Approx(0.0).epsilon(1e-12));

      Layout l = Layout::standard(Q, Q + 1, 4, 1);
      // the same weights apply with and without a true anticipation term
      for (Model truth_kind : {Model::ETI, Model::ETI_ANT}) {
        TrueModelParams t = anticipation_truth(truth_kind, Q + 1, 0.04, 0.1);
        Eigen::VectorXd theta =
            oracle::dense_expected_estimate(l, Model::HH_ANT, t, phi);
        CHECK(theta[Q + 2] == doctest::Approx(pi.dot(t.delta_s)).epsilon(1e-10));
        CHECK(theta[Q + 1] ==
              doctest::Approx(t.gamma + psi.dot(t.delta_s)).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("three-period exposure-time estimators absorb anticipation") {
  for (double phi : {0.0, 0.3, 0.665, 0.9}) {
    Layout l = Layout::standard(2, 3, 4, 1);
    for (Model truth_kind : {Model::HH_ANT, Model::ETI_ANT}) {
      TrueModelParams t = anticipation_truth(truth_kind, 3, 0.05, 0.12);
      Eigen::VectorXd theta =
          oracle::dense_expected_estimate(l, Model::ETI, t, phi);
      for (int s : {1, 2}) {
        double want = t.effect_at(s) + swcrt::eti_j3_gamma_loading(phi, s) * t.gamma;
        CHECK(theta[2 + s] == doctest::Approx(want).epsilon(1e-10));
        CHECK(swcrt::eti_j3_gamma_loading(phi, s) ==
              doctest::Approx(-(1.0 + s * phi)).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(swcrt::eti_j3_gamma_loading(0.5, 3), ConfigError);
}

TEST_CASE("prediction dispatch labels closed forms and numeric fallbacks") {
  Layout l = Layout::standard(6, 7, 10, 1);
  TrueModelParams hh = anticipation_truth(Model::HH, 7, 0.0, 0.1);
  TrueModelParams etiant = anticipation_truth(Model::ETI_ANT, 7, 0.04, 0.1);

  // correctly specified: exact truth back
  swcrt::ExpectationReport same = swcrt::predict_expectation(l, Model::HH, hh, 0.5);
  CHECK(same.method == "closed_form");
  CHECK(same.effect == doctest::Approx(0.1));

  // over-specified: still unbiased
  swcrt::ExpectationReport over =
      swcrt::predict_expectation(l, Model::ETI_ANT, hh, 0.5);
  CHECK(over.method == "closed_form");
  CHECK(over.effect == doctest::Approx(0.1));
  CHECK(over.gamma == doctest::Approx(0.0));
  REQUIRE(over.exposure.size() == 6);
  CHECK(over.exposure.minCoeff() == doctest::Approx(0.1));
  CHECK(over.exposure.maxCoeff() == doctest::Approx(0.1));

  // exposure-time working model beyond three periods has no closed form
  swcrt::ExpectationReport numeric =
      swcrt::predict_expectation(l, Model::ETI, etiant, 0.5);
  CHECK(numeric.method == "numeric");

  // non-standard layouts always fall back to the projection
  Layout odd = Layout::custom({{2, 2}, {5, 4}}, 6, 5, 1);
  TrueModelParams hhant6 = anticipation_truth(Model::HH_ANT, 6, 0.04, 0.1);
  swcrt::ExpectationReport fallback =
      swcrt::predict_expectation(odd, Model::HH, hhant6, 0.5);
  CHECK(fallback.method == "numeric");
}

TEST_CASE("every dispatch path equals the dense projection") {
  for (int Q : {2, 4, 6}) {
    int J = Q + 1;
    for (double phi : {0.0, 0.3, 0.7}) {
      for (Model truth_kind : {Model::HH, Model::HH_ANT, Model::ETI, Model::ETI_ANT}) {
        TrueModelParams t = anticipation_truth(truth_kind, J, 0.04, 0.1);
        for (Model working : {Model::HH, Model::HH_ANT, Model::ETI, Model::ETI_ANT}) {
          Layout l = Layout::standard(Q, J, 4, 1);
          swcrt::ExpectationReport got =
              swcrt::predict_expectation(l, working, t, phi);
          Eigen::VectorXd theta =
              oracle::dense_expected_estimate(l, working, t, phi);
          int offset = J + (swcrt::has_anticipation(working) ? 1 : 0);
          if (swcrt::has_exposure_curve(working)) {
            Eigen::VectorXd dense_exp = theta.segment(offset, J - 1);
            REQUIRE(got.exposure.size() == J - 1);
            CHECK((got.exposure - dense_exp).cwiseAbs().maxCoeff() < 1e-10);
            CHECK(got.effect ==
                  doctest::Approx(dense_exp.mean()).epsilon(1e-10));
          } else {
            CHECK(got.effect == doctest::Approx(theta[offset]).epsilon(1e-10));
          }
          if (swcrt::has_anticipation(working))
            CHECK(got.gamma == doctest::Approx(theta[J]).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("multi-period windows use the closed form where one exists") {
  // constant-effect pair with a 3-period window
  Layout l = Layout::standard(5, 6, 4, 3);
  TrueModelParams t = anticipation_truth(Model::HH_ANT, 6, 0.05, 0.1);
  swcrt::ExpectationReport r = swcrt::predict_expectation(l, Model::HH, t, 0.4);
  CHECK(r.method == "closed_form");
  CHECK(r.effect ==
        doctest::Approx(0.1 + swcrt::omega_hh_hhant_order(5, 0.4, 3) * 0.05)
            .epsilon(1e-12));

  // the constant-effect model under pure exposure-time heterogeneity does not
  // involve the window at all
  TrueModelParams eti = anticipation_truth(Model::ETI, 6, 0.0, 0.1);
  swcrt::ExpectationReport re = swcrt::predict_expectation(l, Model::HH, eti, 0.4);
  CHECK(re.method == "closed_form");
  CHECK(re.effect ==
        doctest::Approx(swcrt::pi_hh_under_etiant(5, 0.4).dot(eti.delta_s))
            .epsilon(1e-12));
}

TEST_CASE("weight grid export") {
  std::string csv = swcrt::bias_grid_csv({3, 4}, {0.0, 0.5});
  CHECK(csv.rfind("Q,phi,j,weight_name,value\n", 0) == 0);
  // each (Q, phi) block: one omega row plus Q rows of four named weights
  size_t rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  CHECK(rows == size_t(2 * (1 + 3 * 4) + 2 * (1 + 4 * 4)));
  CHECK(csv.find("omega") != std::string::npos);
  CHECK(csv.find("pi_hh") != std::string::npos);
  CHECK(csv.find("psi_hhant") != std::string::npos);
}
