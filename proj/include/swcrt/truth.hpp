// True data-generating model for simulation and for exact expectation
// calculations under misspecified working models.
#pragma once

#include <Eigen/Dense>

#include "swcrt/common.hpp"
#include "swcrt/design.hpp"

namespace swcrt {

struct TrueModelParams {
  Model kind = Model::HH;
  double mu = 0;
  Eigen::VectorXd beta;     // length J period effects; empty means all zero
  double delta = 0;         // constant treatment effect (HH kinds)
  Eigen::VectorXd delta_s;  // exposure-time effects, length J-1 (ETI kinds)
  double gamma = 0;         // anticipation effect (zero for non-ANT kinds)
  double tau_sq = 0;
  double sigma_sq = 0;

  // Time-averaged treatment effect: delta for HH kinds, mean of delta_s
  // otherwise.
  double target_effect(int J) const;
  // Effect at exposure time s (1-based); the constant delta for HH kinds.
  double effect_at(int s) const;

  // Mean of the cluster-period means of a cluster in sequence q (0-based),
  // including mu and beta.
  Eigen::VectorXd mean_row(const Layout& layout, int q) const;

  // Throws ConfigError unless sizes and the kind-specific fields are
  // consistent with the layout.
  void validate(const Layout& layout) const;

  std::string to_json() const;
  static TrueModelParams from_json(const std::string& text, const Layout& layout);
};

}  // namespace swcrt
