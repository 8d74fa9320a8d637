#include "swcrt/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "swcrt/formats.hpp"
#include "swcrt/numeric.hpp"

namespace swcrt {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint32_t lo32(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
std::uint32_t hi32(std::uint64_t v) {
  return static_cast<std::uint32_t>(v >> 32);
}

}  // namespace

ReplicateStream::ReplicateStream(std::uint64_t seed, std::uint64_t rep) {
  std::seed_seq sseq{lo32(seed), hi32(seed), lo32(rep), hi32(rep)};
  engine_.seed(sseq);
}

double ReplicateStream::uniform() {
  double u;
  do {
    u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  } while (u == 0.0);
  return u;
}

double ReplicateStream::normal() { return normal_quantile(uniform()); }

CellData generate_replicate(
    const Layout& layout, const TrueModelParams& truth, std::uint64_t seed,
    std::uint64_t rep, const std::function<void(int, int, int, double)>* sink) {
  truth.validate(layout);
  const int I = layout.clusters();
  const int J = layout.periods();
  const int K = layout.individuals();
  const double tau = std::sqrt(truth.tau_sq);
  const double sig = std::sqrt(truth.sigma_sq);
  std::vector<Eigen::VectorXd> seq_means;
  for (int q = 0; q < layout.num_sequences(); ++q)
    seq_means.push_back(truth.mean_row(layout, q));

  ReplicateStream rs(seed, rep);
  CellData data;
  data.means = Eigen::MatrixXd(I, J);
  data.within_ss = 0;
  data.n_individuals = static_cast<long>(I) * J * K;
  for (int i = 0; i < I; ++i) {
    const Eigen::VectorXd& mean = seq_means[layout.sequence_of_cluster(i)];
    const double alpha_i = tau * rs.normal();
    for (int j = 0; j < J; ++j) {
      double sum = 0, sumsq = 0;
      for (int k = 0; k < K; ++k) {
        const double y = mean(j) + alpha_i + sig * rs.normal();
        sum += y;
        sumsq += y * y;
        if (sink) (*sink)(i, j, k, y);
      }
      data.means(i, j) = sum / K;
      data.within_ss += sumsq - sum * sum / K;
    }
  }
  return data;
}

std::string simulate_dataset_csv(const Layout& layout,
                                 const TrueModelParams& truth,
                                 std::uint64_t seed, std::uint64_t rep) {
  std::ostringstream out;
  out << "cluster,period,individual,Z,A,y\n";
  std::vector<Eigen::VectorXd> z_rows, a_rows;
  for (int q = 0; q < layout.num_sequences(); ++q) {
    z_rows.push_back(layout.treatment_row(q));
    a_rows.push_back(layout.anticipation_row(q));
  }
  std::function<void(int, int, int, double)> sink = [&](int i, int j, int k,
                                                        double y) {
    const int q = layout.sequence_of_cluster(i);
    out << (i + 1) << ',' << (j + 1) << ',' << (k + 1) << ','
        << static_cast<int>(z_rows[q](j)) << ','
        << static_cast<int>(a_rows[q](j)) << ','
        << format_double(y, kFullPrecision) << '\n';
  };
  generate_replicate(layout, truth, seed, rep, &sink);
  return out.str();
}

namespace {

struct Tally {
  std::vector<double> est, se, gam, gam_se, tau;
  long cover = 0, reject = 0, cover_g = 0, reject_g = 0;
  int failures = 0;
};

double sample_sd(const std::vector<double>& v) {
  const size_t n = v.size();
  if (n < 2) return kNaN;
  double mean = 0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1));
}

double sample_mean(const std::vector<double>& v) {
  if (v.empty()) return kNaN;
  double mean = 0;
  for (double x : v) mean += x;
  return mean / v.size();
}

}  // namespace

StudyReport run_study(const Layout& layout, const TrueModelParams& truth,
                      const std::vector<Model>& working, int reps,
                      std::uint64_t seed, double alpha) {
  truth.validate(layout);
  if (reps < 2) throw ConfigError("need at least two replications");
  if (working.empty()) throw ConfigError("no working models requested");
  if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must be in (0, 1)");
  const int J = layout.periods();
  const double z = normal_quantile(1 - alpha / 2);
  const double effect_true = truth.target_effect(J);
  const double gamma_true = has_anticipation(truth.kind) ? truth.gamma : 0.0;

  std::vector<Tally> tallies(working.size());
  for (int r = 0; r < reps; ++r) {
    CellData data = generate_replicate(layout, truth, seed, r);
    for (size_t w = 0; w < working.size(); ++w) {
      Tally& t = tallies[w];
      FitResult fit;
      try {
        fit = fit_model(layout, data, working[w]);
      } catch (const std::runtime_error&) {
        ++t.failures;
        continue;
      }
      const double est = fit.effect();
      const double se = fit.effect_se();
      t.est.push_back(est);
      t.se.push_back(se);
      t.tau.push_back(fit.tau());
      if (std::abs(est - effect_true) <= z * se) ++t.cover;
      if (std::abs(est) > z * se) ++t.reject;
      if (has_anticipation(working[w])) {
        const double g = fit.gamma_hat();
        const double gse = fit.gamma_se();
        t.gam.push_back(g);
        t.gam_se.push_back(gse);
        if (std::abs(g - gamma_true) <= z * gse) ++t.cover_g;
        if (std::abs(g) > z * gse) ++t.reject_g;
      }
    }
  }

  StudyReport report;
  report.truth = truth.kind;
  report.reps = reps;
  report.seed = seed;
  report.alpha = alpha;
  for (size_t w = 0; w < working.size(); ++w) {
    const Tally& t = tallies[w];
    if (t.failures * 100L > reps)
      throw ConvergenceError("more than 1% of the fits failed for model " +
                             model_name(working[w]));
    const double n = static_cast<double>(t.est.size());
    StudyRow row;
    row.working = working[w];
    row.effect_true = effect_true;
    row.mean_est = sample_mean(t.est);
    row.mean_tau = sample_mean(t.tau);
    row.sd_est = sample_sd(t.est);
    row.mean_se = sample_mean(t.se);
    row.coverage_pct = 100.0 * t.cover / n;
    row.power_pct = 100.0 * t.reject / n;
    if (has_anticipation(working[w])) {
      row.mean_gamma = sample_mean(t.gam);
      row.sd_gamma = sample_sd(t.gam);
      row.se_gamma = sample_mean(t.gam_se);
      row.coverage_gamma_pct = 100.0 * t.cover_g / n;
      row.power_gamma_pct = 100.0 * t.reject_g / n;
    } else {
      row.mean_gamma = kNaN;
      row.sd_gamma = kNaN;
      row.se_gamma = kNaN;
      row.coverage_gamma_pct = kNaN;
      row.power_gamma_pct = kNaN;
    }
    row.fit_failures = t.failures;
    report.rows.push_back(row);
  }
  return report;
}

std::string StudyReport::to_csv(int precision) const {
  std::ostringstream out;
  out << "true_model,working_model,effect_true,mean_est,mean_gamma,mean_tau,"
         "sd_est,mean_se,coverage_pct,power_pct,sd_gamma,se_gamma,"
         "coverage_gamma_pct,power_gamma_pct\n";
  for (const StudyRow& row : rows) {
    out << model_name(truth) << ',' << model_name(row.working);
    const double cols[] = {row.effect_true,
                           row.mean_est,
                           row.mean_gamma,
                           row.mean_tau,
                           row.sd_est,
                           row.mean_se,
                           row.coverage_pct,
                           row.power_pct,
                           row.sd_gamma,
                           row.se_gamma,
                           row.coverage_gamma_pct,
                           row.power_gamma_pct};
    for (double v : cols) out << ',' << format_double(v, precision);
    out << '\n';
  }
  return out.str();
}

std::string StudyReport::to_json() const {
  std::ostringstream out;
  out << "{\"truth\":\"" << model_name(truth) << "\"";
  out << ",\"reps\":" << reps << ",\"seed\":" << seed;
  out << ",\"alpha\":" << json_double(alpha);
  out << ",\"rows\":[";
  for (size_t i = 0; i < rows.size(); ++i) {
    const StudyRow& r = rows[i];
    if (i) out << ',';
    out << "{\"working\":\"" << model_name(r.working) << "\"";
    out << ",\"effect_true\":" << json_double(r.effect_true);
    out << ",\"mean_est\":" << json_double(r.mean_est);
    out << ",\"mean_gamma\":" << json_double(r.mean_gamma);
    out << ",\"mean_tau\":" << json_double(r.mean_tau);
    out << ",\"sd_est\":" << json_double(r.sd_est);
    out << ",\"mean_se\":" << json_double(r.mean_se);
    out << ",\"coverage_pct\":" << json_double(r.coverage_pct);
    out << ",\"power_pct\":" << json_double(r.power_pct);
    out << ",\"sd_gamma\":" << json_double(r.sd_gamma);
    out << ",\"se_gamma\":" << json_double(r.se_gamma);
    out << ",\"coverage_gamma_pct\":" << json_double(r.coverage_gamma_pct);
    out << ",\"power_gamma_pct\":" << json_double(r.power_gamma_pct);
    out << ",\"fit_failures\":" << r.fit_failures;
    out << "}";
  }
  out << "]}";
  return out.str();
}

std::vector<Scenario> preset_scenarios() {
  const int I = 32, J = 9, K = 100;
  Layout layout = Layout::standard(I, J, K, 1);
  const double tau_sq = 0.141 * 0.141;
  Eigen::VectorXd beta(J);
  for (int j = 1; j <= J; ++j) beta(j - 1) = j;
  Eigen::VectorXd curve(J - 1);
  for (int s = 1; s <= J - 1; ++s)
    curve(s - 1) =
        -1.41 * std::sin(2 * std::numbers::pi * (s - 1) / 7.0) + 0.12;

  auto base = [&](Model kind) {
    TrueModelParams t;
    t.kind = kind;
    t.mu = 0;
    t.beta = beta;
    t.tau_sq = tau_sq;
    t.sigma_sq = 1.0;
    return t;
  };
  const std::vector<Model> two = {Model::HH, Model::HH_ANT};
  const std::vector<Model> four = {Model::HH, Model::HH_ANT, Model::ETI,
                                   Model::ETI_ANT};

  std::vector<Scenario> out;
  {
    TrueModelParams t = base(Model::HH);
    t.delta = 0;
    out.push_back({"I-null", layout, t, two});
  }
  {
    TrueModelParams t = base(Model::HH);
    t.delta = 0.075;
    out.push_back({"I", layout, t, two});
  }
  {
    TrueModelParams t = base(Model::HH_ANT);
    t.delta = 0.075;
    t.gamma = 0.04;
    out.push_back({"II", layout, t, four});
  }
  {
    TrueModelParams t = base(Model::ETI);
    t.delta_s = curve;
    out.push_back({"III", layout, t, four});
  }
  {
    TrueModelParams t = base(Model::ETI_ANT);
    t.delta_s = curve;
    t.gamma = 0.04;
    out.push_back({"IV", layout, t, four});
  }
  return out;
}

Scenario preset_scenario(const std::string& name) {
  for (Scenario& s : preset_scenarios())
    if (s.name == name) return s;
  throw ConfigError("unknown preset '" + name +
                    "'; expected I-null, I, II, III or IV");
}

}  // namespace swcrt
