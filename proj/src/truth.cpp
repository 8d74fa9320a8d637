#include "swcrt/truth.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "swcrt/formats.hpp"

namespace swcrt {

double TrueModelParams::target_effect(int J) const {
  if (!has_exposure_curve(kind)) return delta;
  if (delta_s.size() != J - 1)
    throw ConfigError("exposure-time effects must have length J-1");
  return delta_s.sum() / (J - 1);
}

double TrueModelParams::effect_at(int s) const {
  if (!has_exposure_curve(kind)) return delta;
  if (s < 1 || s > delta_s.size())
    throw ConfigError("exposure time outside 1..J-1");
  return delta_s(s - 1);
}

Eigen::VectorXd TrueModelParams::mean_row(const Layout& layout, int q) const {
  const int J = layout.periods();
  Eigen::VectorXd mean = Eigen::VectorXd::Constant(J, mu);
  if (beta.size() > 0) mean += beta;
  Eigen::VectorXd z = layout.treatment_row(q);
  Eigen::VectorXd a = layout.anticipation_row(q);
  for (int j = 1; j <= J; ++j) {
    if (has_anticipation(kind)) mean(j - 1) += gamma * a(j - 1);
    if (z(j - 1) > 0) mean(j - 1) += effect_at(layout.exposure_time(q, j));
  }
  return mean;
}

void TrueModelParams::validate(const Layout& layout) const {
  const int J = layout.periods();
  if (beta.size() > 0 && beta.size() != J)
    throw ConfigError("period effects must have length J when given");
  if (has_exposure_curve(kind)) {
    if (delta_s.size() != J - 1)
      throw ConfigError("exposure-time effects must have length J-1");
  } else if (delta_s.size() > 0) {
    throw ConfigError("constant-effect models take no exposure-time curve");
  }
  if (!has_anticipation(kind) && gamma != 0)
    throw ConfigError("anticipation effect requires an anticipation model");
  if (tau_sq < 0 || sigma_sq < 0)
    throw ConfigError("variance components must be nonnegative");
}

std::string TrueModelParams::to_json() const {
  std::ostringstream out;
  out << "{\"model\":\"" << model_name(kind) << "\"";
  out << ",\"mu\":" << json_double(mu);
  if (beta.size() > 0) out << ",\"beta\":" << json_vector(beta);
  if (has_exposure_curve(kind))
    out << ",\"delta_s\":" << json_vector(delta_s);
  else
    out << ",\"delta\":" << json_double(delta);
  if (has_anticipation(kind)) out << ",\"gamma\":" << json_double(gamma);
  out << ",\"tau_sq\":" << json_double(tau_sq);
  out << ",\"sigma_sq\":" << json_double(sigma_sq);
  out << "}";
  return out.str();
}

TrueModelParams TrueModelParams::from_json(const std::string& text,
                                           const Layout& layout) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad truth json: ") + e.what());
  }
  TrueModelParams p;
  try {
    p.kind = model_from_string(doc.at("model").get<std::string>());
    p.mu = doc.value("mu", 0.0);
    if (doc.contains("beta")) {
      auto v = doc["beta"].get<std::vector<double>>();
      p.beta = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
    }
    if (has_exposure_curve(p.kind)) {
      auto v = doc.at("delta_s").get<std::vector<double>>();
      p.delta_s = Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
    } else {
      p.delta = doc.value("delta", 0.0);
    }
    if (has_anticipation(p.kind)) p.gamma = doc.value("gamma", 0.0);
    p.tau_sq = doc.at("tau_sq").get<double>();
    p.sigma_sq = doc.at("sigma_sq").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad truth json: ") + e.what());
  }
  p.validate(layout);
  return p;
}

}  // namespace swcrt
