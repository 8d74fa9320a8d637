#include "swcrt/design.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include <json.hpp>

#include "swcrt/formats.hpp"

namespace swcrt {

std::string model_name(Model m) {
  switch (m) {
    case Model::HH: return "HH";
    case Model::HH_ANT: return "HH-ANT";
    case Model::ETI: return "ETI";
    case Model::ETI_ANT: return "ETI-ANT";
  }
  return "?";
}

Model model_from_string(const std::string& text) {
  std::string t;
  for (char c : text) {
    if (c == '_') c = '-';
    t += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (t == "hh") return Model::HH;
  if (t == "hh-ant" || t == "hhant") return Model::HH_ANT;
  if (t == "eti") return Model::ETI;
  if (t == "eti-ant" || t == "etiant") return Model::ETI_ANT;
  throw ConfigError("unknown model '" + text +
                    "' (expected hh, hh-ant, eti, or eti-ant)");
}

Layout Layout::standard(int clusters, int periods, int individuals, int ell) {
  if (periods < 3) throw ConfigError("standard design needs at least 3 periods");
  int Q = periods - 1;
  if (clusters <= 0 || clusters % Q != 0)
    throw ConfigError("cluster count " + std::to_string(clusters) +
                      " is not a positive multiple of the sequence count " +
                      std::to_string(Q));
  std::vector<SequenceSpec> seqs(Q);
  for (int q = 0; q < Q; ++q) seqs[q] = {q + 2, clusters / Q};
  return custom(std::move(seqs), periods, individuals, ell);
}

Layout Layout::custom(std::vector<SequenceSpec> sequences, int periods,
                      int individuals, int ell) {
  Layout l;
  l.periods_ = periods;
  l.individuals_ = individuals;
  l.ell_ = ell;
  l.sequences_ = std::move(sequences);
  std::sort(l.sequences_.begin(), l.sequences_.end(),
            [](const SequenceSpec& a, const SequenceSpec& b) {
              return a.adopt < b.adopt;
            });
  l.clusters_ = 0;
  for (const auto& s : l.sequences_) l.clusters_ += s.count;
  l.validate();
  return l;
}

void Layout::validate() const {
  if (periods_ < 2) throw ConfigError("need at least 2 periods");
  if (individuals_ < 1) throw ConfigError("need at least 1 individual per cell");
  if (sequences_.empty()) throw ConfigError("no sequences given");
  if (clusters_ <= 0) throw ConfigError("zero total clusters");
  if (ell_ < 1 || ell_ > periods_ - 1)
    throw ConfigError("anticipation window " + std::to_string(ell_) +
                      " outside 1.." + std::to_string(periods_ - 1));
  std::set<int> seen;
  for (const auto& s : sequences_) {
    if (s.count <= 0)
      throw ConfigError("non-positive cluster count in sequence adopting at period " +
                        std::to_string(s.adopt));
    if (s.adopt < 2 || s.adopt > periods_)
      throw ConfigError("adoption period " + std::to_string(s.adopt) +
                        " outside 2.." + std::to_string(periods_) +
                        " (every cluster is untreated at period 1)");
    if (!seen.insert(s.adopt).second)
      throw ConfigError("duplicate adoption period " + std::to_string(s.adopt));
  }
}

bool Layout::is_standard() const {
  int Q = periods_ - 1;
  if (num_sequences() != Q) return false;
  int per = sequences_[0].count;
  for (int q = 0; q < Q; ++q)
    if (sequences_[q].adopt != q + 2 || sequences_[q].count != per) return false;
  return true;
}

int Layout::sequence_of_cluster(int cluster) const {
  int c = cluster;
  for (int q = 0; q < num_sequences(); ++q) {
    if (c < sequences_[q].count) return q;
    c -= sequences_[q].count;
  }
  throw ConfigError("cluster index " + std::to_string(cluster) +
                    " outside 0.." + std::to_string(clusters_ - 1));
}

Eigen::VectorXd Layout::treatment_row(int q) const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(periods_);
  for (int j = sequences_[q].adopt; j <= periods_; ++j) z[j - 1] = 1.0;
  return z;
}

Eigen::VectorXd Layout::anticipation_row(int q) const {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(periods_);
  int start = std::max(1, sequences_[q].adopt - ell_);
  for (int j = start; j < sequences_[q].adopt; ++j) a[j - 1] = 1.0;
  return a;
}

int Layout::exposure_time(int q, int j) const {
  int s = j - sequences_[q].adopt + 1;
  return s > 0 ? s : 0;
}

Eigen::MatrixXd Layout::exposure_block(int q) const {
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(periods_, periods_ - 1);
  for (int j = 1; j <= periods_; ++j) {
    int s = exposure_time(q, j);
    if (s > 0) x(j - 1, s - 1) = 1.0;
  }
  return x;
}

std::string Layout::indicators_csv() const {
  std::ostringstream out;
  out << "cluster,period,Z,A,s\n";
  for (int i = 0; i < clusters_; ++i) {
    int q = sequence_of_cluster(i);
    Eigen::VectorXd z = treatment_row(q);
    Eigen::VectorXd a = anticipation_row(q);
    for (int j = 1; j <= periods_; ++j) {
      out << (i + 1) << ',' << j << ',' << static_cast<int>(z[j - 1]) << ','
          << static_cast<int>(a[j - 1]) << ',' << exposure_time(q, j) << '\n';
    }
  }
  return out.str();
}

Layout Layout::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("layout JSON parse error: ") + e.what());
  }
  try {
    int J = j.at("J").get<int>();
    int K = j.at("K").get<int>();
    int ell = j.value("ell", 1);
    std::vector<SequenceSpec> seqs;
    if (j.contains("sequences")) {
      for (const auto& s : j.at("sequences"))
        seqs.push_back({s.at("adopt").get<int>(), s.at("count").get<int>()});
      Layout l = custom(std::move(seqs), J, K, ell);
      if (j.contains("I") && j.at("I").get<int>() != l.clusters())
        throw ConfigError("layout JSON: I does not match the sequence counts");
      return l;
    }
    return standard(j.at("I").get<int>(), J, K, ell);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("layout JSON: ") + e.what());
  }
}

std::string Layout::to_json() const {
  nlohmann::json seqs = nlohmann::json::array();
  for (const auto& s : sequences_)
    seqs.push_back({{"adopt", s.adopt}, {"count", s.count}});
  nlohmann::json j{{"I", clusters_},
                   {"J", periods_},
                   {"K", individuals_},
                   {"ell", ell_},
                   {"sequences", seqs}};
  return j.dump();
}

DesignConstants design_constants(const Layout& layout) {
  int J = layout.periods();
  int Q = layout.num_sequences();
  int S = J - 1;
  DesignConstants c;
  c.U1 = Eigen::VectorXd::Zero(S);
  c.U2 = Eigen::MatrixXd::Zero(S, S);
  c.W1_mat = Eigen::MatrixXd::Zero(S, S);
  c.W2_mat = Eigen::MatrixXd::Zero(S, S);
  c.W5_vec = Eigen::VectorXd::Zero(S);
  c.U5 = Eigen::RowVectorXd::Zero(S);
  c.W6 = Eigen::RowVectorXd::Zero(S);
  c.kappa1 = Eigen::VectorXd::Zero(J);
  c.kappa3 = Eigen::VectorXd::Zero(Q);

  Eigen::VectorXd z_sum = Eigen::VectorXd::Zero(J);
  Eigen::VectorXd a_sum = Eigen::VectorXd::Zero(J);
  Eigen::MatrixXd x_sum = Eigen::MatrixXd::Zero(J, S);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(J);

  for (int q = 0; q < Q; ++q) {
    double n = layout.seq_count(q);
    Eigen::VectorXd z = layout.treatment_row(q);
    Eigen::VectorXd a = layout.anticipation_row(q);
    Eigen::MatrixXd x = layout.exposure_block(q);
    Eigen::RowVectorXd col_sums = ones.transpose() * x;
    double zt = z.sum(), at = a.sum();

    z_sum += n * z;
    a_sum += n * a;
    x_sum += n * x;

    c.U += n * zt;
    c.W2 += n * zt * zt;
    c.U3 += n * at;
    c.U4 += n * a.squaredNorm();
    c.W4 += n * at * at;
    c.U1 += n * col_sums.transpose();
    c.U2 += n * x.transpose() * x;
    c.W2_mat += n * col_sums.transpose() * col_sums;
    c.U5 += n * a.transpose() * x;
    c.W6 += n * at * col_sums;
    c.kappa3[q] = zt;
  }

  c.W1 = z_sum.squaredNorm();
  c.W3 = a_sum.squaredNorm();
  c.W5 = z_sum.dot(a_sum);
  c.W1_mat = x_sum.transpose() * x_sum;
  c.W5_vec = x_sum.transpose() * a_sum;
  c.kappa1 = z_sum;
  c.kappa2 = c.U;
  return c;
}

std::string DesignConstants::to_json() const {
  std::ostringstream out;
  out << "{\"U\":" << json_double(U) << ",\"W1\":" << json_double(W1)
      << ",\"W2\":" << json_double(W2) << ",\"U3\":" << json_double(U3)
      << ",\"U4\":" << json_double(U4) << ",\"W3\":" << json_double(W3)
      << ",\"W4\":" << json_double(W4) << ",\"W5\":" << json_double(W5)
      << ",\"U1\":" << json_vector(U1) << ",\"W5_vec\":" << json_vector(W5_vec)
      << ",\"U5\":" << json_vector(U5.transpose())
      << ",\"W6\":" << json_vector(W6.transpose())
      << ",\"kappa1\":" << json_vector(kappa1)
      << ",\"kappa2\":" << json_double(kappa2)
      << ",\"kappa3\":" << json_vector(kappa3);
  auto mat = [&out](const char* name, const Eigen::MatrixXd& m) {
    out << ",\"" << name << "\":[";
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      if (r) out << ',';
      out << json_vector(m.row(r).transpose());
    }
    out << ']';
  };
  mat("U2", U2);
  mat("W1_mat", W1_mat);
  mat("W2_mat", W2_mat);
  out << '}';
  return out.str();
}

}  // namespace swcrt
