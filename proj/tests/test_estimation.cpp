#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "swcrt/correlation.hpp"
#include "swcrt/estimation.hpp"
#include "swcrt/montecarlo.hpp"

using swcrt::CellData;
using swcrt::ConfigError;
using swcrt::IoError;
using swcrt::Layout;
using swcrt::Model;
using swcrt::RankError;
using swcrt::TrueModelParams;

namespace {

const Model kAllModels[] = {Model::HH, Model::HH_ANT, Model::ETI,
                            Model::ETI_ANT};

double phi_of(double rho, int K) {
  return K * rho / (K * rho + 1.0 - rho);
}

// Noise-free cell data whose means follow the true model exactly.
CellData exact_means(const Layout& layout, const TrueModelParams& truth) {
  CellData d;
  d.means.resize(layout.clusters(), layout.periods());
  for (int i = 0; i < layout.clusters(); ++i)
    d.means.row(i) =
        truth.mean_row(layout, layout.sequence_of_cluster(i)).transpose();
  d.within_ss = 0.0;
  d.n_individuals = static_cast<long>(layout.clusters()) * layout.periods() *
                    layout.individuals();
  return d;
}

TrueModelParams flat_truth(Model kind, int J) {
  TrueModelParams t;
  t.kind = kind;
  t.mu = 0.4;
  t.beta = Eigen::VectorXd::LinSpaced(J, 0.0, 0.3 * (J - 1));
  if (swcrt::has_exposure_curve(kind))
    t.delta_s = Eigen::VectorXd::LinSpaced(J - 1, 0.2, 0.2 + 0.05 * (J - 2));
  else
    t.delta = 0.25;
  if (swcrt::has_anticipation(kind)) t.gamma = 0.07;
  t.tau_sq = 0.02;
  t.sigma_sq = 1.0;
  return t;
}

}  // namespace

TEST_CASE("design blocks match an independent construction") {
  std::vector<Layout> layouts = {Layout::standard(8, 5, 3, 1),
                                 Layout::standard(12, 4, 2, 2),
                                 Layout::custom({{2, 2}, {4, 3}}, 6, 5, 3)};
  for (const Layout& l : layouts) {
    for (Model m : kAllModels) {
      for (int q = 0; q < l.num_sequences(); ++q) {
        Eigen::MatrixXd got = swcrt::model_design_block(l, m, q);
        Eigen::MatrixXd want = oracle::design_block(l, m, q);
        REQUIRE(got.rows() == want.rows());
        REQUIRE(got.cols() == want.cols());
        CHECK((got - want).cwiseAbs().maxCoeff() == 0.0);
      }
    }
  }
}

TEST_CASE("coefficient labels fix the column order") {
  Layout l = Layout::standard(8, 5, 3, 1);
  auto hh = swcrt::coefficient_labels(l, Model::HH);
  REQUIRE(hh.size() == 6);
  CHECK(hh.front() == "mu");
  CHECK(hh[1] == "beta2");
  CHECK(hh.back() == "delta");
  auto hhant = swcrt::coefficient_labels(l, Model::HH_ANT);
  REQUIRE(hhant.size() == 7);
  CHECK(hhant[5] == "gamma");
  CHECK(hhant[6] == "delta");
  auto eti = swcrt::coefficient_labels(l, Model::ETI);
  REQUIRE(eti.size() == 9);
  CHECK(eti[5] == "delta1");
  CHECK(eti[8] == "delta4");
  auto etiant = swcrt::coefficient_labels(l, Model::ETI_ANT);
  REQUIRE(etiant.size() == 10);
  CHECK(etiant[5] == "gamma");
  CHECK(etiant[6] == "delta1");
}

TEST_CASE("constant-effect weight grid reproduces the GLS hat row") {
  for (int Q : {2, 3, 4, 6, 8, 10}) {
    for (double phi : {0.0, 0.1, 0.35, 0.665, 0.9}) {
      Layout l = Layout::standard(Q, Q + 1, 4, 1);
      Eigen::MatrixXd closed = swcrt::hh_weights(Q, phi);
      Eigen::MatrixXd dense =
          oracle::dense_weight_grid(l, Model::HH, phi, Q + 1);
      REQUIRE(closed.rows() == Q);
      REQUIRE(closed.cols() == Q + 1);
      CHECK((closed - dense).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("weight grids do not depend on the per-sequence cluster count") {
  Eigen::MatrixXd one =
      oracle::dense_weight_grid(Layout::standard(5, 6, 4, 1), Model::HH, 0.4, 6);
  Eigen::MatrixXd three =
      oracle::dense_weight_grid(Layout::standard(15, 6, 4, 1), Model::HH, 0.4, 6);
  CHECK((one - three).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("anticipation-adjusted weight grids reproduce the GLS hat rows") {
  for (int Q : {2, 3, 5, 8, 10}) {
    for (double phi : {0.0, 0.2, 0.5, 0.665, 0.85}) {
      Layout l = Layout::standard(Q, Q + 1, 4, 1);
      int J = Q + 1;
      Eigen::MatrixXd delta_closed = swcrt::hhant_delta_weights(Q, phi);
      Eigen::MatrixXd delta_dense =
          oracle::dense_weight_grid(l, Model::HH_ANT, phi, J + 1);
      CHECK((delta_closed - delta_dense).cwiseAbs().maxCoeff() < 1e-10);

      Eigen::MatrixXd gamma_closed = swcrt::hhant_gamma_weights(Q, phi);
      Eigen::MatrixXd gamma_dense =
          oracle::dense_weight_grid(l, Model::HH_ANT, phi, J);
      CHECK((gamma_closed - gamma_dense).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("three-period exposure-time weights reproduce the GLS hat rows") {
  for (double phi : {0.0, 0.3, 0.665, 0.9}) {
    Layout l = Layout::standard(2, 3, 4, 1);
    for (int s : {1, 2}) {
      Eigen::MatrixXd closed = swcrt::eti_weights_J3(phi, s);
      Eigen::MatrixXd dense =
          oracle::dense_weight_grid(l, Model::ETI, phi, 2 + s);
      CHECK((closed - dense).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("weight grids annihilate nuisance structure") {
  for (int Q : {3, 7}) {
    for (double phi : {0.15, 0.665}) {
      Layout l = Layout::standard(Q, Q + 1, 4, 1);
      Eigen::MatrixXd w = swcrt::hh_weights(Q, phi);
      // every period column sums to zero, so period effects drop out
      for (int j = 0; j < Q + 1; ++j)
        CHECK(w.col(j).sum() == doctest::Approx(0.0).epsilon(1e-12));
      // the treated cells carry unit total weight
      double treated = 0.0;
      for (int q = 0; q < Q; ++q)
        treated += w.row(q).dot(l.treatment_row(q));
      CHECK(treated == doctest::Approx(1.0).epsilon(1e-12));

      // the anticipation-adjusted effect weights also kill the window cells
      Eigen::MatrixXd wd = swcrt::hhant_delta_weights(Q, phi);
      Eigen::MatrixXd wg = swcrt::hhant_gamma_weights(Q, phi);
      double d_on_a = 0.0, g_on_a = 0.0, g_on_z = 0.0;
      for (int q = 0; q < Q; ++q) {
        d_on_a += wd.row(q).dot(l.anticipation_row(q));
        g_on_a += wg.row(q).dot(l.anticipation_row(q));
        g_on_z += wg.row(q).dot(l.treatment_row(q));
      }
      CHECK(d_on_a == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(g_on_a == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(g_on_z == doctest::Approx(0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("expected estimates are the dense GLS projection of the truth") {
  std::vector<Layout> layouts = {Layout::standard(6, 4, 5, 1),
                                 Layout::standard(10, 6, 3, 2),
                                 Layout::custom({{2, 2}, {4, 1}, {6, 3}}, 6, 4, 1)};
  for (const Layout& l : layouts) {
    for (Model truth_kind : kAllModels) {
      TrueModelParams truth = flat_truth(truth_kind, l.periods());
      for (Model working : kAllModels) {
        for (double phi : {0.0, 0.4, 0.8}) {
          Eigen::VectorXd got =
              swcrt::expected_estimate(l, working, truth, phi);
          Eigen::VectorXd want =
              oracle::dense_expected_estimate(l, working, truth, phi);
          REQUIRE(got.size() == want.size());
          CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("GLS on noise-free means recovers the projection at any rho") {
  Layout l = Layout::standard(8, 5, 6, 1);
  TrueModelParams truth = flat_truth(Model::ETI_ANT, 5);
  CellData data = exact_means(l, truth);
  for (Model working : kAllModels) {
    for (double rho : {0.0, 0.05, 0.3}) {
      swcrt::FitResult fit = swcrt::gls_fit(l, data, working, rho);
      Eigen::VectorXd want = swcrt::expected_estimate(
          l, working, truth, phi_of(rho, l.individuals()));
      CHECK((fit.coef - want).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
  // a correctly specified working model reproduces the truth exactly
  swcrt::FitResult fit = swcrt::gls_fit(l, data, Model::ETI_ANT, 0.1);
  CHECK(fit.effect() ==
        doctest::Approx(truth.target_effect(5)).epsilon(1e-10));
  CHECK(fit.gamma_hat() == doctest::Approx(truth.gamma).epsilon(1e-10));
  CHECK((fit.exposure_effects() - truth.delta_s).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fitted coefficient covariance matches the dense inverse") {
  Layout l = Layout::custom({{2, 3}, {3, 2}, {5, 4}}, 6, 7, 2);
  TrueModelParams truth = flat_truth(Model::HH_ANT, 6);
  CellData data = swcrt::generate_replicate(l, truth, 99, 0);
  for (Model working : kAllModels) {
    swcrt::FitResult fit = swcrt::gls_fit(l, data, working, 0.12);
    Eigen::MatrixXd want =
        oracle::dense_gls_covariance(l, working, 0.12, fit.sigma_t_sq);
    double scale = want.cwiseAbs().maxCoeff();
    CHECK((fit.cov - want).cwiseAbs().maxCoeff() < 1e-8 * scale);
  }
}

TEST_CASE("profiled likelihoods match a dense evaluation on raw outcomes") {
  Layout l = Layout::standard(6, 4, 3, 1);
  TrueModelParams truth = flat_truth(Model::HH_ANT, 4);
  Eigen::MatrixXd outcomes(l.clusters(), l.periods() * l.individuals());
  std::function<void(int, int, int, double)> sink =
      [&](int i, int j, int k, double y) {
        outcomes(i, j * l.individuals() + k) = y;
      };
  CellData data = swcrt::generate_replicate(l, truth, 2024, 5, &sink);

  for (Model working : {Model::HH, Model::HH_ANT, Model::ETI_ANT}) {
    // restricted likelihood at a fixed correlation
    for (double rho : {0.0, 0.08, 0.4}) {
      swcrt::FitResult at = swcrt::gls_fit(l, data, working, rho);
      double dense = oracle::dense_loglik(l, outcomes, working, rho, true);
      CHECK(at.loglik == doctest::Approx(dense).epsilon(1e-8));
    }

    // the restricted fit maximizes the dense restricted likelihood
    swcrt::FitResult reml = swcrt::fit_model(l, data, working, true);
    double at_opt = oracle::dense_loglik(l, outcomes, working, reml.rho, true);
    CHECK(reml.loglik == doctest::Approx(at_opt).epsilon(1e-7));
    for (double eps : {-0.02, 0.02}) {
      double r = reml.rho + eps;
      if (r < 0 || r > swcrt::kMaxRho) continue;
      CHECK(oracle::dense_loglik(l, outcomes, working, r, true) <=
            at_opt + 1e-9);
    }

    // same for the full likelihood
    swcrt::FitResult ml = swcrt::fit_model(l, data, working, false);
    double ml_opt = oracle::dense_loglik(l, outcomes, working, ml.rho, false);
    CHECK(ml.ml_loglik == doctest::Approx(ml_opt).epsilon(1e-7));
    for (double eps : {-0.02, 0.02}) {
      double r = ml.rho + eps;
      if (r < 0 || r > swcrt::kMaxRho) continue;
      CHECK(oracle::dense_loglik(l, outcomes, working, r, false) <=
            ml_opt + 1e-9);
    }
  }
}

TEST_CASE("restricted fit recovers variance components on a larger trial") {
  Layout l = Layout::standard(32, 9, 20, 1);
  TrueModelParams truth = flat_truth(Model::HH, 9);
  CellData data = swcrt::generate_replicate(l, truth, 7, 3);
  swcrt::FitResult fit = swcrt::fit_model(l, data, Model::HH, true);
  CHECK(fit.reml);
  CHECK(fit.rho > 0.0);
  CHECK(fit.tau_sq > 0.001);
  CHECK(fit.tau_sq < 0.08);
  CHECK(fit.sigma_sq == doctest::Approx(truth.sigma_sq).epsilon(0.1));
  CHECK(fit.sigma_t_sq == doctest::Approx(fit.tau_sq + fit.sigma_sq));
  CHECK(fit.rho == doctest::Approx(fit.tau_sq / fit.sigma_t_sq));
  CHECK(std::isfinite(fit.loglik));
  CHECK(fit.criterion_evals > 10);
}

TEST_CASE("unobserved exposure times are reported by name") {
  // adoption no earlier than period 4 never produces exposure time 3 or 4
  Layout l = Layout::custom({{4, 3}, {5, 3}}, 5, 6, 1);
  TrueModelParams truth = flat_truth(Model::HH, 5);
  CellData data = swcrt::generate_replicate(l, truth, 11, 0);
  bool threw = false;
  try {
    swcrt::gls_fit(l, data, Model::ETI, 0.1);
  } catch (const RankError& e) {
    threw = true;
    CHECK(std::string(e.what()).find("delta") != std::string::npos);
  }
  CHECK(threw);
  CHECK_NOTHROW(swcrt::gls_fit(l, data, Model::HH, 0.1));
}

TEST_CASE("a single adoption time confounds anticipation with period effects") {
  Layout l = Layout::custom({{3, 8}}, 5, 6, 1);
  TrueModelParams truth = flat_truth(Model::HH, 5);
  CellData data = swcrt::generate_replicate(l, truth, 12, 0);
  CHECK_THROWS_AS(swcrt::gls_fit(l, data, Model::HH_ANT, 0.1), RankError);
}

TEST_CASE("exposure-heterogeneity test has J-2 degrees of freedom") {
  Layout l = Layout::standard(10, 6, 8, 1);
  TrueModelParams truth = flat_truth(Model::HH, 6);
  CellData data = swcrt::generate_replicate(l, truth, 21, 0);
  swcrt::LrtResult r = swcrt::lrt_exposure_heterogeneity(l, data, false);
  CHECK(r.df == 4);
  CHECK(r.statistic >= 0.0);
  CHECK(r.p_value >= 0.0);
  CHECK(r.p_value <= 1.0);
  swcrt::LrtResult ra = swcrt::lrt_exposure_heterogeneity(l, data, true);
  CHECK(ra.df == 4);

  Layout tiny = Layout::custom({{2, 4}, {3, 4}}, 3, 8, 1);
  TrueModelParams t3 = flat_truth(Model::HH, 3);
  CellData d3 = swcrt::generate_replicate(tiny, t3, 22, 0);
  CHECK(swcrt::lrt_exposure_heterogeneity(tiny, d3, false).df == 1);
}

TEST_CASE("dataset CSV round trip preserves layout and statistics") {
  Layout l = Layout::custom({{2, 2}, {4, 3}}, 5, 4, 2);
  TrueModelParams truth = flat_truth(Model::ETI_ANT, 5);
  std::string csv = swcrt::simulate_dataset_csv(l, truth, 313, 2);

  Layout parsed = Layout::standard(2, 3, 1, 1);
  CellData got = CellData::from_dataset_csv(csv, &parsed);
  CHECK(parsed.periods() == 5);
  CHECK(parsed.individuals() == 4);
  CHECK(parsed.ell() == 2);
  CHECK(parsed.clusters() == 5);
  REQUIRE(parsed.num_sequences() == 2);
  CHECK(parsed.adopt(0) == 2);
  CHECK(parsed.seq_count(0) == 2);
  CHECK(parsed.adopt(1) == 4);
  CHECK(parsed.seq_count(1) == 3);

  CellData want = swcrt::generate_replicate(l, truth, 313, 2);
  CHECK((got.means - want.means).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(got.within_ss == doctest::Approx(want.within_ss).epsilon(1e-12));
  CHECK(got.n_individuals == want.n_individuals);
}

TEST_CASE("dataset parsing rejects malformed input") {
  CHECK_THROWS_AS(CellData::from_dataset_csv("", nullptr), IoError);
  CHECK_THROWS_AS(CellData::from_dataset_csv("a,b,c\n", nullptr), IoError);
  const std::string header = "cluster,period,individual,Z,A,y\n";
  CHECK_THROWS_AS(CellData::from_dataset_csv(header, nullptr), IoError);
  CHECK_THROWS_AS(
      CellData::from_dataset_csv(header + "1,1,1,0,0,oops\n", nullptr),
      IoError);
  // treated at the first period
  CHECK_THROWS_AS(
      CellData::from_dataset_csv(header + "1,1,1,1,0,0.5\n1,2,1,1,0,0.5\n",
                                 nullptr),
      ConfigError);
  // treatment switching off again
  CHECK_THROWS_AS(
      CellData::from_dataset_csv(
          header + "1,1,1,0,1,0.1\n1,2,1,1,0,0.2\n1,3,1,0,0,0.3\n", nullptr),
      ConfigError);
  // inconsistent Z within one cell
  CHECK_THROWS_AS(
      CellData::from_dataset_csv(
          header + "1,1,1,0,1,0.1\n1,1,2,1,1,0.2\n1,2,1,1,0,0.3\n1,2,2,1,0,0.4\n",
          nullptr),
      ConfigError);
  // unequal cell sizes across clusters
  std::string uneven = header;
  uneven += "1,1,1,0,1,0.1\n1,2,1,1,0,0.2\n";
  uneven += "2,1,1,0,0,0.1\n2,1,2,0,0,0.15\n2,2,1,0,1,0.2\n2,2,2,0,1,0.25\n";
  CHECK_THROWS_AS(CellData::from_dataset_csv(uneven, nullptr), ConfigError);
}
