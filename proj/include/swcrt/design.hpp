// Stepped-wedge trial layouts and their treatment/anticipation indicators.
//
// A layout has J periods, K individuals per cluster-period, an anticipation
// window length ell, and a list of sequences; sequence q starts treatment at
// period adopt_q (2 <= adopt_q <= J) in count_q clusters.  Cluster indices are
// ordered by sequence, then by position within the sequence.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "swcrt/common.hpp"

namespace swcrt {

struct SequenceSpec {
  int adopt = 0;  // first treated period, 1-based
  int count = 0;  // clusters following this sequence
};

class Layout {
 public:
  // Standard complete design: Q = J-1 sequences, I/Q clusters each, sequence
  // q adopts at period q+1.  Requires J >= 3, I divisible by J-1,
  // K >= 1 and 1 <= ell <= J-1.
  static Layout standard(int clusters, int periods, int individuals, int ell);

  // General design from an explicit sequence list.  Adoption periods must be
  // distinct and lie in {2..J}; counts must be positive.
  static Layout custom(std::vector<SequenceSpec> sequences, int periods,
                       int individuals, int ell);

  // JSON object {"I":..,"J":..,"K":..,"ell":..,"sequences":[{"adopt":..,"count":..},..]}.
  static Layout from_json(const std::string& text);
  std::string to_json() const;

  int periods() const { return periods_; }              // J
  int individuals() const { return individuals_; }      // K
  int ell() const { return ell_; }
  int clusters() const { return clusters_; }            // I
  int num_sequences() const { return static_cast<int>(sequences_.size()); }  // Q
  const std::vector<SequenceSpec>& sequences() const { return sequences_; }
  bool is_standard() const;

  int adopt(int q) const { return sequences_[q].adopt; }     // q is 0-based
  int seq_count(int q) const { return sequences_[q].count; }
  int sequence_of_cluster(int cluster) const;                // 0-based both ways

  // Indicator rows for sequence q (0-based), each of length J (1-based period
  // j lives at index j-1).
  Eigen::VectorXd treatment_row(int q) const;    // Z: 1 from the adoption period on
  Eigen::VectorXd anticipation_row(int q) const; // A: 1 in the ell periods before adoption, clipped at period 1
  Eigen::MatrixXd exposure_block(int q) const;   // X: J x (J-1), column s marks exposure time s
  // Exposure time s = j - adopt + 1 for treated cells, 0 otherwise (1-based j).
  int exposure_time(int q, int j) const;

  // Long-format indicator table, one row per (cluster, period):
  // header cluster,period,Z,A,s.
  std::string indicators_csv() const;

 private:
  Layout() = default;
  void validate() const;

  int periods_ = 0;
  int individuals_ = 0;
  int ell_ = 0;
  int clusters_ = 0;
  std::vector<SequenceSpec> sequences_;
};

// Sums of the indicator blocks over clusters.  These are the only summaries
// of the design that the closed-form variances need.  Z_i, A_i are J-vectors,
// X_i is the J x (J-1) exposure block of cluster i; 1 is the J-vector of ones.
struct DesignConstants {
  // treatment indicator
  double U = 0;   // sum_ij Z_ij
  double W1 = 0;  // sum_j (sum_i Z_ij)^2
  double W2 = 0;  // sum_i (sum_j Z_ij)^2
  // anticipation indicator
  double U3 = 0;  // sum_i A_i'1
  double U4 = 0;  // sum_i A_i'A_i
  double W3 = 0;  // (sum_i A_i)'(sum_i A_i)
  double W4 = 0;  // sum_i (A_i'1)^2
  // treatment-anticipation cross term
  double W5 = 0;  // (sum_i Z_i)'(sum_i A_i)
  // exposure blocks, each (J-1)-dimensional
  Eigen::VectorXd U1;      // sum_i X_i'1
  Eigen::MatrixXd U2;      // sum_i X_i'X_i
  Eigen::MatrixXd W1_mat;  // (sum_i X_i)'(sum_i X_i)
  Eigen::MatrixXd W2_mat;  // sum_i X_i'11'X_i
  Eigen::VectorXd W5_vec;  // (sum_i X_i)'(sum_i A_i)
  Eigen::RowVectorXd U5;   // sum_i A_i'X_i
  Eigen::RowVectorXd W6;   // sum_i (A_i'1)(1'X_i)
  // per-period and per-sequence treated-cell tallies
  Eigen::VectorXd kappa1;  // treated clusters per period, length J
  double kappa2 = 0;       // total treated cells, equals U
  Eigen::VectorXd kappa3;  // treated periods per sequence, length Q

  std::string to_json() const;
};

DesignConstants design_constants(const Layout& layout);

}  // namespace swcrt
