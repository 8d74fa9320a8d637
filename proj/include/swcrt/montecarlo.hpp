// Replicated simulation of stepped-wedge trials: data generation under any
// true model and study summaries across replications.
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "swcrt/common.hpp"
#include "swcrt/design.hpp"
#include "swcrt/estimation.hpp"
#include "swcrt/truth.hpp"

namespace swcrt {

// Deterministic per-replication random stream derived from (seed, rep).
// Uniforms come from the top 53 bits of a 64-bit Mersenne Twister draw;
// normals by the inverse CDF.
class ReplicateStream {
 public:
  ReplicateStream(std::uint64_t seed, std::uint64_t rep);
  double uniform();  // (0, 1)
  double normal();

 private:
  std::mt19937_64 engine_;
};

// One replication's sufficient statistics.  Individual outcomes can be
// streamed to `sink` (cluster, period, individual, y), all indices 0-based.
CellData generate_replicate(
    const Layout& layout, const TrueModelParams& truth, std::uint64_t seed,
    std::uint64_t rep,
    const std::function<void(int, int, int, double)>* sink = nullptr);

// Long-format dataset of one replication: cluster,period,individual,Z,A,y.
std::string simulate_dataset_csv(const Layout& layout,
                                 const TrueModelParams& truth,
                                 std::uint64_t seed, std::uint64_t rep = 0);

struct StudyRow {
  Model working = Model::HH;
  double effect_true = 0;   // true value of the reported effect
  double mean_est = 0;
  double mean_gamma = 0;    // NaN for models without an anticipation term
  double mean_tau = 0;
  double sd_est = 0;
  double mean_se = 0;
  double coverage_pct = 0;  // 95% Wald interval covering effect_true
  double power_pct = 0;     // two-sided rejection of zero effect
  double sd_gamma = 0;
  double se_gamma = 0;
  double coverage_gamma_pct = 0;
  double power_gamma_pct = 0;
  int fit_failures = 0;
};

struct StudyReport {
  Model truth = Model::HH;
  int reps = 0;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::vector<StudyRow> rows;

  // Header: true_model,working_model,effect_true,mean_est,mean_gamma,
  // mean_tau,sd_est,mean_se,coverage_pct,power_pct,sd_gamma,se_gamma,
  // coverage_gamma_pct,power_gamma_pct.
  std::string to_csv(int precision = 6) const;
  std::string to_json() const;
};

// Fits every working model to every replication by profiled REML and
// aggregates in replication order.  Replications where a fit fails are
// dropped from that model's summaries; more than 1% failures aborts the
// study with ConvergenceError.
StudyReport run_study(const Layout& layout, const TrueModelParams& truth,
                      const std::vector<Model>& working, int reps,
                      std::uint64_t seed, double alpha = 0.05);

// Named replication scenarios of the simulation studies: "I-null", "I",
// "II", "III", "IV".  Each carries its layout, truth, and working-model list.
struct Scenario {
  std::string name;
  Layout layout;
  TrueModelParams truth;
  std::vector<Model> working;
};
std::vector<Scenario> preset_scenarios();
Scenario preset_scenario(const std::string& name);

}  // namespace swcrt
