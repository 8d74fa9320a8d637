#include "swcrt/power.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "swcrt/bias.hpp"
#include "swcrt/formats.hpp"
#include "swcrt/numeric.hpp"
#include "swcrt/truth.hpp"

namespace swcrt {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must be in (0, 1)");
}

void check_params_match(const Layout& layout, const CorrelationParams& params) {
  if (params.J != layout.periods() || params.K != layout.individuals())
    throw ConfigError("correlation parameters disagree with the layout");
}

VarianceResult make_result(Model model, double var, const Layout& layout,
                           const CorrelationParams& params) {
  if (!(var > 0)) throw RankError("effect variance is not positive");
  VarianceResult r;
  r.model = model;
  r.variance = var;
  r.se = std::sqrt(var);
  r.I = layout.clusters();
  r.J = layout.periods();
  r.K = layout.individuals();
  r.ell = layout.ell();
  r.rho = params.rho();
  r.sigma_t_sq = params.sigma_t_sq();
  return r;
}

}  // namespace

std::string VarianceResult::to_json() const {
  std::ostringstream out;
  out << "{\"model\":\"" << model_name(model) << "\"";
  out << ",\"variance\":" << json_double(variance);
  out << ",\"se\":" << json_double(se);
  out << ",\"I\":" << I << ",\"J\":" << J << ",\"K\":" << K
      << ",\"ell\":" << ell;
  out << ",\"rho\":" << json_double(rho);
  out << ",\"sigma_t_sq\":" << json_double(sigma_t_sq);
  out << "}";
  return out.str();
}

VarianceResult variance(const Layout& layout, Model model,
                        const CorrelationParams& params) {
  check_params_match(layout, params);
  const int I = layout.clusters();
  const int J = layout.periods();
  const int K = layout.individuals();
  const double l1 = params.lambda1();
  const double l2 = params.lambda2();
  const int m = has_exposure_curve(model) ? J - 1 : 1;
  const bool ant = has_anticipation(model);

  // Indicator-block sums over clusters; b is the effect block (treatment
  // column or exposure block) and a the anticipation column.
  Eigen::MatrixXd b_sum = Eigen::MatrixXd::Zero(J, m);
  Eigen::VectorXd u1 = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd u2 = Eigen::MatrixXd::Zero(m, m);
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd a_sum = Eigen::VectorXd::Zero(J);
  Eigen::VectorXd u5 = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd w6 = Eigen::VectorXd::Zero(m);
  double u3 = 0, u4 = 0, w4 = 0;
  for (int q = 0; q < layout.num_sequences(); ++q) {
    const double n = layout.seq_count(q);
    Eigen::MatrixXd b(J, m);
    if (has_exposure_curve(model))
      b = layout.exposure_block(q);
    else
      b.col(0) = layout.treatment_row(q);
    Eigen::VectorXd bt1 = b.colwise().sum().transpose();
    b_sum += n * b;
    u1 += n * bt1;
    u2 += n * (b.transpose() * b);
    w2 += n * (bt1 * bt1.transpose());
    if (ant) {
      Eigen::VectorXd a = layout.anticipation_row(q);
      const double at1 = a.sum();
      a_sum += n * a;
      u3 += n * at1;
      u4 += n * a.dot(a);
      w4 += n * at1 * at1;
      u5 += n * (b.transpose() * a);
      w6 += n * at1 * bt1;
    }
  }
  const double dI = I, dJ = J;
  Eigen::MatrixXd w1 = b_sum.transpose() * b_sum;
  Eigen::MatrixXd u11 = u1 * u1.transpose();
  Eigen::MatrixXd g22 = l2 * (u11 + dI * dJ * u2 - dJ * w1 - dI * w2) +
                        l1 * (dI * w2 - u11);
  const int p = ant ? m + 1 : m;
  Eigen::MatrixXd g(p, p);
  if (ant) {
    const double w3 = a_sum.dot(a_sum);
    const double g11 = l2 * (u3 * u3 + dI * dJ * u4 - dJ * w3 - dI * w4) +
                       l1 * (dI * w4 - u3 * u3);
    Eigen::VectorXd w5v = b_sum.transpose() * a_sum;
    Eigen::VectorXd g12 = l2 * (u3 * u1 + dI * dJ * u5 - dJ * w5v - dI * w6) +
                          l1 * (dI * w6 - u3 * u1);
    g(0, 0) = g11;
    g.block(0, 1, 1, m) = g12.transpose();
    g.block(1, 0, m, 1) = g12;
    g.block(1, 1, m, m) = g22;
  } else {
    g = g22;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible())
    throw RankError(
        "effect information is singular; an effect column is unobserved or "
        "collinear on this layout");
  Eigen::MatrixXd g_inv = lu.inverse();
  const double scale = params.sigma_t_sq() * dI * dJ * l1 * l2 / K;
  const int off = ant ? 1 : 0;
  double var;
  if (has_exposure_curve(model)) {
    // Variance of the exposure-time average.
    var = scale * g_inv.block(off, off, m, m).sum() / (double(m) * m);
  } else {
    var = scale * g_inv(off, off);
  }
  return make_result(model, var, layout, params);
}

VarianceResult variance_standard(Model model, int I, int Q, int K,
                                 const CorrelationParams& params) {
  if (has_exposure_curve(model))
    throw ConfigError("the simplified form covers the constant-effect models only");
  if (Q < 2) throw ConfigError("need at least two sequences (J >= 3)");
  if (I <= 0 || I % Q != 0)
    throw ConfigError("the standard design needs I divisible by J-1");
  if (params.J != Q + 1 || params.K != K)
    throw ConfigError("correlation parameters disagree with the design");
  const double l1 = params.lambda1();
  const double l2 = params.lambda2();
  const double c = has_anticipation(model) ? Q - 1.0 : Q + 2.0;
  const double var = 12.0 * Q * params.sigma_t_sq() * l1 * l2 /
                     (double(I) * K * (Q - 1) * (Q * l1 + c * l2));
  Layout layout = Layout::standard(I, Q + 1, K, 1);
  return make_result(model, var, layout, params);
}

double power(double effect, double variance, double alpha) {
  if (!(variance > 0)) throw ConfigError("variance must be positive");
  check_alpha(alpha);
  const double z = normal_quantile(1 - alpha / 2);
  return normal_cdf(std::abs(effect) / std::sqrt(variance) - z);
}

double detectable_effect(const Layout& layout, Model model,
                         const CorrelationParams& params, double target_power,
                         double alpha) {
  if (!(target_power > 0 && target_power < 1))
    throw ConfigError("target power must be in (0, 1)");
  check_alpha(alpha);
  const double se = variance(layout, model, params).se;
  return (normal_quantile(1 - alpha / 2) + normal_quantile(target_power)) * se;
}

SampleSizeResult sample_size_search(const Layout& tmpl, Model model,
                                    const CorrelationParams& params,
                                    double effect, double target_power,
                                    double alpha, char vary, int cap) {
  if (effect == 0) throw ConfigError("effect must be nonzero");
  if (!(target_power > 0 && target_power < 1))
    throw ConfigError("target power must be in (0, 1)");
  check_alpha(alpha);
  check_params_match(tmpl, params);
  if (cap < 1) throw ConfigError("cap must be positive");
  const int J = tmpl.periods();
  if (vary == 'I') {
    if (!tmpl.is_standard())
      throw ConfigError("cluster-count search requires a standard design");
    const int Q = tmpl.num_sequences();
    for (int I = Q; I <= cap; I += Q) {
      Layout layout = Layout::standard(I, J, tmpl.individuals(), tmpl.ell());
      const double p = power(effect, variance(layout, model, params).variance, alpha);
      if (p >= target_power) return {I, p};
    }
  } else if (vary == 'K') {
    for (int K = 1; K <= cap; ++K) {
      Layout layout = Layout::custom(tmpl.sequences(), J, K, tmpl.ell());
      CorrelationParams scaled =
          CorrelationParams::derive(params.tau_sq, params.sigma_sq, J, K);
      const double p = power(effect, variance(layout, model, scaled).variance, alpha);
      if (p >= target_power) return {K, p};
    }
  } else {
    throw ConfigError("vary must be 'I' or 'K'");
  }
  throw ConvergenceError("target power is not reachable below the cap");
}

std::string power_ratio_grid(const Layout& layout, const GridRequest& req) {
  check_alpha(req.alpha);
  if (req.effect == 0) throw ConfigError("effect must be nonzero");
  if (!(req.sigma_sq > 0)) throw ConfigError("sigma_sq must be positive");
  if (req.rhos.empty() || req.ratios.empty())
    throw ConfigError("both grid axes must be nonempty");
  if (!has_anticipation(req.truth_family))
    throw ConfigError("the truth family must carry an anticipation term");
  const int J = layout.periods();
  const int K = layout.individuals();
  std::ostringstream out;
  out << "param1,param2,power_A,power_B,ratio,valid\n";
  for (double rho : req.rhos) {
    CorrelationParams params =
        CorrelationParams::from_icc(rho, req.sigma_sq, J, K);
    const double phi = params.phi();
    const double var_a = variance(layout, req.model_a, params).variance;
    const double var_b = variance(layout, req.model_b, params).variance;
    for (double ratio : req.ratios) {
      TrueModelParams truth;
      truth.kind = req.truth_family;
      truth.tau_sq = params.tau_sq;
      truth.sigma_sq = params.sigma_sq;
      if (has_exposure_curve(truth.kind))
        truth.delta_s = Eigen::VectorXd::Constant(J - 1, req.effect);
      else
        truth.delta = req.effect;
      truth.gamma = ratio * req.effect;
      const double alt_a =
          predict_expectation(layout, req.model_a, truth, phi).effect;
      const double alt_b =
          predict_expectation(layout, req.model_b, truth, phi).effect;
      const double p_a = power(alt_a, var_a, req.alpha);
      const double p_b = power(alt_b, var_b, req.alpha);
      const bool contaminated =
          truth.gamma != 0 && (!has_anticipation(req.model_a) ||
                               !has_anticipation(req.model_b));
      out << format_double(rho) << ',' << format_double(ratio) << ','
          << format_double(p_a) << ',' << format_double(p_b) << ','
          << format_double(p_a / p_b) << ',' << (contaminated ? 0 : 1) << '\n';
    }
  }
  return out.str();
}

}  // namespace swcrt
