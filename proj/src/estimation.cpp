#include "swcrt/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "swcrt/formats.hpp"
#include "swcrt/numeric.hpp"

namespace swcrt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int effect_columns(const Layout& layout, Model model) {
  return has_exposure_curve(model) ? layout.periods() - 1 : 1;
}

}  // namespace

CellData CellData::from_dataset_csv(const std::string& text, Layout* layout_out) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty dataset");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "cluster,period,individual,Z,A,y")
    throw IoError("dataset header must be cluster,period,individual,Z,A,y");

  struct Cell {
    long n = 0;
    double sum = 0, sumsq = 0;
    int z = -1, a = -1;
  };
  std::map<std::pair<int, int>, Cell> cells;
  int max_period = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    int cluster, period, individual, z, a;
    double y;
    char c1, c2, c3, c4, c5;
    if (!(row >> cluster >> c1 >> period >> c2 >> individual >> c3 >> z >>
          c4 >> a >> c5 >> y) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',')
      throw IoError("dataset line " + std::to_string(line_no) + " is malformed");
    if (!std::isfinite(y))
      throw IoError("dataset line " + std::to_string(line_no) +
                    " has a non-finite outcome");
    if ((z != 0 && z != 1) || (a != 0 && a != 1))
      throw ConfigError("dataset line " + std::to_string(line_no) +
                        ": Z and A must be 0 or 1");
    auto& cell = cells[{cluster, period}];
    if (cell.n == 0) {
      cell.z = z;
      cell.a = a;
    } else if (cell.z != z || cell.a != a) {
      throw ConfigError("inconsistent Z or A within cluster " +
                        std::to_string(cluster) + ", period " +
                        std::to_string(period));
    }
    ++cell.n;
    cell.sum += y;
    cell.sumsq += y * y;
    max_period = std::max(max_period, period);
  }
  if (cells.empty()) throw IoError("dataset has no data rows");

  int J = max_period;
  std::map<int, std::vector<const Cell*>> by_cluster;
  for (auto& [key, cell] : cells) {
    auto& rows = by_cluster[key.first];
    rows.resize(J, nullptr);
    if (key.second < 1 || key.second > J)
      throw ConfigError("period index outside 1.." + std::to_string(J));
    rows[key.second - 1] = &cell;
  }

  long K = -1;
  struct ClusterInfo {
    int id;
    int adopt;
    int a_start;  // first anticipation period, 1-based
  };
  std::vector<ClusterInfo> infos;
  for (auto& [id, rows] : by_cluster) {
    int adopt = 0, a_start = 0, a_end = 0;
    for (int j = 1; j <= J; ++j) {
      const Cell* cell = rows[j - 1];
      if (!cell)
        throw ConfigError("cluster " + std::to_string(id) +
                          " is missing period " + std::to_string(j));
      if (K < 0) K = cell->n;
      if (cell->n != K)
        throw ConfigError("unequal cell sizes: cluster " + std::to_string(id) +
                          ", period " + std::to_string(j));
      if (cell->z) {
        if (adopt == 0) adopt = j;
      } else if (adopt != 0) {
        throw ConfigError("treatment indicator of cluster " +
                          std::to_string(id) + " is not monotone");
      }
      if (cell->a) {
        if (a_start == 0) a_start = j;
        if (a_end != 0 && a_end != j - 1)
          throw ConfigError("anticipation window of cluster " +
                            std::to_string(id) + " is not contiguous");
        a_end = j;
      }
    }
    if (adopt < 2 || rows[0]->z)
      throw ConfigError("cluster " + std::to_string(id) +
                        " must be untreated at period 1 and treated by the last period");
    if (a_start == 0 || a_end != adopt - 1)
      throw ConfigError("anticipation window of cluster " + std::to_string(id) +
                        " does not end right before adoption");
    infos.push_back({id, adopt, a_start});
  }

  // Smallest window length consistent with every cluster; windows starting at
  // period 1 may be clipped and only bound it from below.
  int ell = 1;
  for (const auto& ci : infos)
    ell = std::max(ell, ci.adopt - ci.a_start);
  std::map<int, int> seq_counts;
  for (const auto& ci : infos) {
    int expected_start = std::max(1, ci.adopt - ell);
    if (ci.a_start != expected_start)
      throw ConfigError("anticipation windows are inconsistent across clusters");
    ++seq_counts[ci.adopt];
  }
  std::vector<SequenceSpec> seqs;
  for (auto& [adopt, count] : seq_counts) seqs.push_back({adopt, count});
  Layout layout = Layout::custom(seqs, J, static_cast<int>(K), ell);

  std::stable_sort(infos.begin(), infos.end(),
                   [](const ClusterInfo& a, const ClusterInfo& b) {
                     return a.adopt < b.adopt;
                   });
  CellData data;
  data.means = Eigen::MatrixXd(static_cast<int>(infos.size()), J);
  data.within_ss = 0;
  for (size_t r = 0; r < infos.size(); ++r) {
    const auto& rows = by_cluster[infos[r].id];
    for (int j = 0; j < J; ++j) {
      const Cell& cell = *rows[j];
      double mean = cell.sum / cell.n;
      data.means(static_cast<int>(r), j) = mean;
      data.within_ss += cell.sumsq - cell.sum * cell.sum / cell.n;
    }
  }
  data.n_individuals = static_cast<long>(infos.size()) * J * K;
  if (layout_out) *layout_out = layout;
  return data;
}

Eigen::MatrixXd model_design_block(const Layout& layout, Model model, int q) {
  int J = layout.periods();
  int p = 1 + (J - 1) + (has_anticipation(model) ? 1 : 0) +
          effect_columns(layout, model);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(J, p);
  m.col(0).setOnes();
  for (int j = 2; j <= J; ++j) m(j - 1, j - 1) = 1.0;  // period effects, first fixed at zero
  int col = J;
  if (has_anticipation(model)) m.col(col++) = layout.anticipation_row(q);
  if (has_exposure_curve(model))
    m.block(0, col, J, J - 1) = layout.exposure_block(q);
  else
    m.col(col) = layout.treatment_row(q);
  return m;
}

std::vector<std::string> coefficient_labels(const Layout& layout, Model model) {
  int J = layout.periods();
  std::vector<std::string> labels{"mu"};
  for (int j = 2; j <= J; ++j) labels.push_back("beta" + std::to_string(j));
  if (has_anticipation(model)) labels.push_back("gamma");
  if (has_exposure_curve(model))
    for (int s = 1; s < J; ++s) labels.push_back("delta" + std::to_string(s));
  else
    labels.push_back("delta");
  return labels;
}

double FitResult::tau() const { return std::sqrt(std::max(0.0, tau_sq)); }

int FitResult::effect_offset() const {
  // coef layout: mu, beta_2..beta_J, [gamma], effect column(s)
  return J + (has_anticipation(model) ? 1 : 0);
}

double FitResult::effect() const {
  if (has_exposure_curve(model)) return exposure_effects().mean();
  return coef[effect_offset()];
}

double FitResult::effect_se() const {
  int off = effect_offset();
  if (has_exposure_curve(model)) {
    int S = J - 1;
    double v = cov.block(off, off, S, S).sum() / (static_cast<double>(S) * S);
    return std::sqrt(v);
  }
  return std::sqrt(cov(off, off));
}

double FitResult::gamma_hat() const {
  return has_anticipation(model) ? coef[J] : kNaN;
}

double FitResult::gamma_se() const {
  return has_anticipation(model) ? std::sqrt(cov(J, J)) : kNaN;
}

Eigen::VectorXd FitResult::exposure_effects() const {
  if (!has_exposure_curve(model)) return Eigen::VectorXd();
  return coef.tail(J - 1);
}

std::string FitResult::to_json() const {
  std::ostringstream out;
  out << "{\"model\":\"" << model_name(model) << "\",\"coefficients\":{";
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) out << ',';
    out << '"' << labels[i] << "\":{\"estimate\":" << json_double(coef[i])
        << ",\"se\":" << json_double(std::sqrt(cov(i, i))) << '}';
  }
  out << "},\"effect\":" << json_double(effect())
      << ",\"effect_se\":" << json_double(effect_se());
  if (has_anticipation(model))
    out << ",\"gamma\":" << json_double(gamma_hat())
        << ",\"gamma_se\":" << json_double(gamma_se());
  out << ",\"tau_sq\":" << json_double(tau_sq)
      << ",\"sigma_sq\":" << json_double(sigma_sq)
      << ",\"rho\":" << json_double(rho)
      << ",\"tau\":" << json_double(tau())
      << ",\"reml\":" << (reml ? "true" : "false")
      << ",\"loglik\":" << json_double(loglik)
      << ",\"ml_loglik\":" << json_double(ml_loglik)
      << ",\"boundary\":" << (boundary ? "true" : "false") << '}';
  return out.str();
}

namespace {

// Per-sequence sufficient statistics for the profiled likelihood: with
// C^{-1} = xc I - yc 11', both the information and the score contraction are
// linear in (xc, yc) through these blocks.
struct ProfiledFit {
  const Layout* layout;
  Model model;
  int J, K, I, p;
  long N;
  double ssw;
  double s2;  // sum_i |ybar_i|^2
  double t2;  // sum_i (1'ybar_i)^2
  std::vector<double> n_q;
  std::vector<Eigen::MatrixXd> mtm;   // M_q'M_q
  std::vector<Eigen::VectorXd> mt1;   // M_q'1
  std::vector<Eigen::VectorXd> mtt;   // M_q'T_q, T_q = sum of ybar over the sequence
  std::vector<double> t1;             // 1'T_q

  struct Eval {
    double criterion;
    double sigma_t_sq;
    double rss_plus_ssw;
    Eigen::VectorXd theta;
    Eigen::MatrixXd info;
    double logdet_info;
    bool ok;
  };

  ProfiledFit(const Layout& lay, const CellData& data, Model mod)
      : layout(&lay), model(mod) {
    J = lay.periods();
    K = lay.individuals();
    I = lay.clusters();
    N = data.n_individuals;
    ssw = data.within_ss;
    int Q = lay.num_sequences();
    p = 1 + (J - 1) + (has_anticipation(mod) ? 1 : 0) + effect_columns(lay, mod);
    if (data.means.rows() != I || data.means.cols() != J)
      throw ConfigError("cell mean matrix does not match the layout");
    s2 = data.means.squaredNorm();
    t2 = data.means.rowwise().sum().squaredNorm();
    int row = 0;
    for (int q = 0; q < Q; ++q) {
      Eigen::MatrixXd m = model_design_block(lay, mod, q);
      Eigen::VectorXd tq = Eigen::VectorXd::Zero(J);
      for (int c = 0; c < lay.seq_count(q); ++c)
        tq += data.means.row(row++).transpose();
      n_q.push_back(lay.seq_count(q));
      mtm.push_back(m.transpose() * m);
      mt1.push_back(m.transpose() * Eigen::VectorXd::Ones(J));
      mtt.push_back(m.transpose() * tq);
      t1.push_back(tq.sum());
    }
  }

  void check_rank() const {
    Eigen::MatrixXd base = Eigen::MatrixXd::Zero(p, p);
    for (size_t q = 0; q < mtm.size(); ++q) base += n_q[q] * mtm[q];
    Eigen::FullPivLU<Eigen::MatrixXd> lu(base);
    lu.setThreshold(1e-10);
    if (lu.rank() < p) {
      auto labels = coefficient_labels(*layout, model);
      int bad = lu.permutationQ().indices()[lu.rank()];
      throw RankError("design is rank deficient: column '" + labels[bad] +
                      "' of the " + model_name(model) +
                      " model is not estimable on this layout");
    }
  }

  Eval evaluate(double rho, bool reml) const {
    MeanCorrelation corr{rho, J, K};
    double xc = corr.xc(), yc = corr.yc();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
    for (size_t q = 0; q < mtm.size(); ++q) {
      info.noalias() += n_q[q] * (xc * mtm[q] - yc * mt1[q] * mt1[q].transpose());
      rhs.noalias() += xc * mtt[q] - yc * t1[q] * mt1[q];
    }
    Eval ev;
    ev.info = info;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    Eigen::VectorXd d = ldlt.vectorD();
    if (ldlt.info() != Eigen::Success || (d.array() <= 0).any()) {
      ev.ok = false;
      ev.criterion = std::numeric_limits<double>::infinity();
      return ev;
    }
    ev.logdet_info = d.array().log().sum();
    ev.theta = ldlt.solve(rhs);
    double quad = xc * s2 - yc * t2;
    double rss = quad - ev.theta.dot(rhs);
    double lam1 = corr.lambda1();
    ev.rss_plus_ssw = ssw / lam1 + rss;
    if (ev.rss_plus_ssw <= 0) ev.rss_plus_ssw = 1e-300;
    long div = reml ? N - p : N;
    ev.sigma_t_sq = ev.rss_plus_ssw / div;
    double ij_terms = (static_cast<double>(N) - I * static_cast<double>(J)) *
                          std::log(lam1) +
                      I * corr.logdet();
    ev.criterion = ij_terms + div * std::log(ev.sigma_t_sq);
    if (reml) ev.criterion += ev.logdet_info;
    ev.ok = std::isfinite(ev.criterion);
    return ev;
  }
};

FitResult finish_fit(const ProfiledFit& pf, double rho, bool reml,
                     const ProfiledFit::Eval& ev, bool boundary, int evals) {
  FitResult r;
  r.model = pf.model;
  r.J = pf.J;
  r.labels = coefficient_labels(*pf.layout, pf.model);
  r.coef = ev.theta;
  r.rho = rho;
  r.sigma_t_sq = ev.sigma_t_sq;
  r.tau_sq = rho * ev.sigma_t_sq;
  r.sigma_sq = (1.0 - rho) * ev.sigma_t_sq;
  r.reml = reml;
  r.boundary = boundary;
  r.criterion_evals = evals;
  // coef covariance: sigma_t^2 (sum_q M'C^{-1}M)^{-1}
  Eigen::MatrixXd info_inv =
      ev.info.ldlt().solve(Eigen::MatrixXd::Identity(pf.p, pf.p));
  r.cov = ev.sigma_t_sq * info_inv;

  MeanCorrelation corr{rho, pf.J, pf.K};
  double lam1 = corr.lambda1();
  double N = static_cast<double>(pf.N);
  double IJ = static_cast<double>(pf.I) * pf.J;
  double logK = std::log(static_cast<double>(pf.K));
  double log2pi = std::log(2.0 * std::numbers::pi);
  double common = (N - IJ) * std::log(lam1) + pf.I * corr.logdet() + IJ * logK;
  if (reml) {
    double np = N - pf.p;
    r.loglik = -0.5 * (np * log2pi + common + np * std::log(ev.sigma_t_sq) +
                       ev.logdet_info + ev.rss_plus_ssw / ev.sigma_t_sq);
    r.ml_loglik = kNaN;
  } else {
    r.ml_loglik = -0.5 * (N * log2pi + common + N * std::log(ev.sigma_t_sq) +
                          ev.rss_plus_ssw / ev.sigma_t_sq);
    r.loglik = r.ml_loglik;
  }
  return r;
}

}  // namespace

FitResult gls_fit(const Layout& layout, const CellData& data, Model model,
                  double rho) {
  if (rho < 0 || rho > kMaxRho)
    throw ConfigError("rho outside [0, " + std::to_string(kMaxRho) + "]");
  ProfiledFit pf(layout, data, model);
  if (pf.N <= pf.p) throw ConfigError("fewer observations than coefficients");
  pf.check_rank();
  auto ev = pf.evaluate(rho, true);
  if (!ev.ok) throw RankError("singular information at the given correlation");
  return finish_fit(pf, rho, true, ev, false, 1);
}

FitResult fit_model(const Layout& layout, const CellData& data, Model model,
                    bool reml) {
  ProfiledFit pf(layout, data, model);
  if (pf.N <= pf.p) throw ConfigError("fewer observations than coefficients");
  pf.check_rank();

  int evals = 0;
  auto crit = [&](double rho) {
    ++evals;
    auto ev = pf.evaluate(rho, reml);
    return ev.ok ? ev.criterion : std::numeric_limits<double>::infinity();
  };

  // Coarse grid to bracket the minimum, then golden-section refinement.
  const int grid_n = 64;
  double best = 0, best_val = std::numeric_limits<double>::infinity();
  int best_idx = 0;
  for (int g = 0; g <= grid_n; ++g) {
    double rho = kMaxRho * g / grid_n;
    double v = crit(rho);
    if (v < best_val) {
      best_val = v;
      best = rho;
      best_idx = g;
    }
  }
  if (!std::isfinite(best_val))
    throw ConvergenceError(
        "variance-component criterion is not finite anywhere on [0, " +
        std::to_string(kMaxRho) + "]");
  double lo = kMaxRho * std::max(0, best_idx - 1) / grid_n;
  double hi = kMaxRho * std::min(grid_n, best_idx + 1) / grid_n;
  double rho_hat = golden_section_minimize(crit, lo, hi, 1e-9);
  if (crit(best) < crit(rho_hat)) rho_hat = best;

  bool boundary = rho_hat <= 1e-9 || rho_hat >= kMaxRho - 1e-9;
  if (rho_hat <= 1e-9) rho_hat = 0.0;
  auto ev = pf.evaluate(rho_hat, reml);
  if (!ev.ok)
    throw ConvergenceError("criterion not finite at the optimum, bracket [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return finish_fit(pf, rho_hat, reml, ev, boundary, evals);
}

LrtResult lrt_exposure_heterogeneity(const Layout& layout, const CellData& data,
                                     bool with_anticipation) {
  int df = layout.periods() - 2;
  if (df < 1)
    throw ConfigError("exposure-heterogeneity test needs at least 3 periods");
  Model null_m = with_anticipation ? Model::HH_ANT : Model::HH;
  Model alt_m = with_anticipation ? Model::ETI_ANT : Model::ETI;
  FitResult f0 = fit_model(layout, data, null_m, false);
  FitResult f1 = fit_model(layout, data, alt_m, false);
  LrtResult r;
  r.statistic = std::max(0.0, 2.0 * (f1.ml_loglik - f0.ml_loglik));
  r.df = df;
  r.p_value = chisq_upper_tail(r.statistic, df);
  return r;
}

// ---- closed-form estimator weights (standard design, one-period window) ----

Eigen::MatrixXd hh_weights(int Q, double phi) {
  if (Q < 2) throw ConfigError("need at least 2 sequences");
  if (phi < 0 || phi >= 1) throw ConfigError("phi outside [0, 1)");
  int J = Q + 1;
  double t1 = 12.0 * (1.0 + phi * Q) /
              (static_cast<double>(Q) * (Q + 1.0) * (Q - 1.0) * (phi * Q + 2.0));
  Eigen::MatrixXd w(Q, J);
  for (int q = 1; q <= Q; ++q)
    for (int j = 1; j <= J; ++j)
      w(q - 1, j - 1) =
          t1 * ((j > q ? Q : 0.0) - j + 1.0 +
                phi * Q * (2.0 * q - Q - 1.0) / (2.0 * (1.0 + phi * Q)));
  return w;
}

Eigen::MatrixXd hhant_delta_weights(int Q, double phi) {
  if (Q < 2) throw ConfigError("need at least 2 sequences");
  if (phi < 0 || phi >= 1) throw ConfigError("phi outside [0, 1)");
  int J = Q + 1;
  double t2 = 6.0 / ((Q - 1.0) * (phi * Q * Q - 2.0 * phi * Q + 2.0 * Q - 1.0));
  Eigen::MatrixXd w(Q, J);
  for (int q = 1; q <= Q; ++q)
    for (int j = 1; j <= J; ++j) {
      double inner = (j == q ? Q : 0.0) + (j > q ? 2.0 * Q : 0.0) +
                     (j == J ? 1.0 : 0.0) - 2.0 * j + 1.0;
      w(q - 1, j - 1) =
          t2 * (-phi * (Q - 2.0 * q + 1.0) + (phi * Q + 1.0) / Q * inner);
    }
  return w;
}

Eigen::MatrixXd hhant_gamma_weights(int Q, double phi) {
  if (Q < 2) throw ConfigError("need at least 2 sequences");
  if (phi < 0 || phi >= 1) throw ConfigError("phi outside [0, 1)");
  int J = Q + 1;
  double t3 = 1.0 / ((Q - 1.0) * (phi * Q * Q - 2.0 * phi * Q + 2.0 * Q - 1.0));
  Eigen::MatrixXd w(Q, J);
  for (int q = 1; q <= Q; ++q)
    for (int j = 1; j <= J; ++j) {
      double v = (j == q ? (Q + 1.0) * (phi * Q + 2.0) : 0.0) +
                 (j > q ? 6.0 * (phi * Q + 1.0) : 0.0) +
                 (j == J ? (Q + 1.0) * (phi * Q + 2.0) / Q : 0.0) -
                 4.0 * phi * Q - 6.0 * phi * j + 6.0 * phi * q + 2.0 * phi -
                 2.0 - 6.0 * j / Q + 4.0 / Q;
      w(q - 1, j - 1) = t3 * v;
    }
  return w;
}

Eigen::MatrixXd eti_weights_J3(double phi, int s) {
  if (s != 1 && s != 2) throw ConfigError("exposure time must be 1 or 2");
  if (phi < 0 || phi >= 1) throw ConfigError("phi outside [0, 1)");
  Eigen::MatrixXd w(2, 3);
  for (int q = 1; q <= 2; ++q)
    for (int j = 1; j <= 3; ++j) {
      double v;
      if (s == 1) {
        v = -(j - 1.0) * (1.0 + 2.0 * phi) + (j > 1 ? phi : 0.0) +
            (j == q + 1 ? 2.0 * (1.0 + phi) : 0.0) +
            (j == q + 2 ? 2.0 * (1.0 + 2.0 * phi) : 0.0) +
            phi * (2.0 * q - 3.0);
      } else {
        v = -(j - 1.0) * (1.0 + 2.0 * phi) -
            (j == 3 ? 1.0 + 2.0 * phi : 0.0) +
            (j == q + 1 ? 2.0 * (1.0 + 2.0 * phi) : 0.0) +
            (j == q + 2 ? 4.0 * (1.0 + 2.0 * phi) : 0.0) +
            2.0 * phi * (2.0 * q - 3.0);
      }
      w(q - 1, j - 1) = v;
    }
  return w;
}

Eigen::VectorXd expected_estimate(const Layout& layout, Model working,
                                  const TrueModelParams& truth, double phi) {
  truth.validate(layout);
  int J = layout.periods();
  int Q = layout.num_sequences();
  int p = 1 + (J - 1) + (has_anticipation(working) ? 1 : 0) +
          effect_columns(layout, working);
  Eigen::MatrixXd prec = phi_precision(phi, J);
  Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p, p);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(p);
  for (int q = 0; q < Q; ++q) {
    Eigen::MatrixXd m = model_design_block(layout, working, q);
    double n = layout.seq_count(q);
    info.noalias() += n * m.transpose() * prec * m;
    rhs.noalias() += n * m.transpose() * prec * truth.mean_row(layout, q);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
  lu.setThreshold(1e-10);
  if (lu.rank() < p) {
    auto labels = coefficient_labels(layout, working);
    int bad = lu.permutationQ().indices()[lu.rank()];
    throw RankError("design is rank deficient: column '" + labels[bad] +
                    "' of the " + model_name(working) +
                    " model is not estimable on this layout");
  }
  return lu.solve(rhs);
}

}  // namespace swcrt
