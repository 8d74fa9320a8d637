#include "swcrt.h"

#include <cstdlib>
#include <cstring>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "swcrt/bias.hpp"
#include "swcrt/correlation.hpp"
#include "swcrt/design.hpp"
#include "swcrt/estimation.hpp"
#include "swcrt/formats.hpp"
#include "swcrt/montecarlo.hpp"
#include "swcrt/power.hpp"
#include "swcrt/truth.hpp"

struct swcrt_layout {
  swcrt::Layout impl;
};

namespace {

thread_local std::string g_last_error = "no error";

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return SWCRT_OK;
  } catch (const swcrt::ConfigError& e) {
    g_last_error = e.what();
    return SWCRT_E_CONFIG;
  } catch (const swcrt::RankError& e) {
    g_last_error = e.what();
    return SWCRT_E_RANK;
  } catch (const swcrt::ConvergenceError& e) {
    g_last_error = e.what();
    return SWCRT_E_CONVERGENCE;
  } catch (const swcrt::IoError& e) {
    g_last_error = e.what();
    return SWCRT_E_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SWCRT_E_CONFIG;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw swcrt::ConfigError(what);
}

swcrt::CorrelationParams icc_params(const swcrt::Layout& layout, double rho,
                                    double sigma_sq) {
  return swcrt::CorrelationParams::from_icc(rho, sigma_sq, layout.periods(),
                                            layout.individuals());
}

swcrt::TrueModelParams parse_truth(const swcrt::Layout& layout,
                                   const char* truth_json) {
  require(truth_json != nullptr, "truth json is required");
  return swcrt::TrueModelParams::from_json(truth_json, layout);
}

std::vector<swcrt::Model> parse_model_list(const char* text) {
  require(text != nullptr && *text != '\0', "working model list is required");
  std::vector<swcrt::Model> models;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    models.push_back(swcrt::model_from_string(item));
  require(!models.empty(), "working model list is empty");
  return models;
}

}  // namespace

extern "C" {

const char* swcrt_last_error(void) { return g_last_error.c_str(); }

void swcrt_string_free(char* text) { std::free(text); }

int swcrt_layout_standard(int clusters, int periods, int individuals, int ell,
                          swcrt_layout** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = new swcrt_layout{
        swcrt::Layout::standard(clusters, periods, individuals, ell)};
  });
}

int swcrt_layout_custom(const int* adopt, const int* count, int n_sequences,
                        int periods, int individuals, int ell,
                        swcrt_layout** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    require(adopt != nullptr && count != nullptr && n_sequences > 0,
            "sequence arrays are required");
    std::vector<swcrt::SequenceSpec> seqs;
    for (int i = 0; i < n_sequences; ++i)
      seqs.push_back({adopt[i], count[i]});
    *out = new swcrt_layout{
        swcrt::Layout::custom(seqs, periods, individuals, ell)};
  });
}

int swcrt_layout_from_json(const char* json, swcrt_layout** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    require(json != nullptr, "layout json is required");
    *out = new swcrt_layout{swcrt::Layout::from_json(json)};
  });
}

void swcrt_layout_free(swcrt_layout* layout) { delete layout; }

int swcrt_layout_json(const swcrt_layout* layout, char** out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "null argument");
    *out = dup_string(layout->impl.to_json());
  });
}

int swcrt_indicators_csv(const swcrt_layout* layout, char** out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "null argument");
    *out = dup_string(layout->impl.indicators_csv());
  });
}

int swcrt_design_constants_json(const swcrt_layout* layout, char** out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "null argument");
    *out = dup_string(swcrt::design_constants(layout->impl).to_json());
  });
}

int swcrt_phi_from_icc(double rho, int individuals, double* out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = swcrt::CorrelationParams::from_icc(rho, 1.0, 2, individuals).phi();
  });
}

int swcrt_bias_json(const char* scenario, int Q, double phi, int ell,
                    char** out) {
  return guarded([&] {
    require(scenario != nullptr && out != nullptr, "null argument");
    const std::string name = scenario;
    std::ostringstream json;
    json << "{\"scenario\":\"" << name << "\",\"Q\":" << Q
         << ",\"phi\":" << swcrt::json_double(phi);
    if (name == "hh-under-hhant") {
      json << ",\"ell\":" << ell << ",\"omega\":"
           << swcrt::json_double(swcrt::omega_hh_hhant_order(Q, phi, ell));
    } else if (name == "hh-under-etiant") {
      require(ell == 1, "this scenario's closed form covers a one-period window");
      Eigen::VectorXd pi = swcrt::pi_hh_under_etiant(Q, phi);
      Eigen::VectorXd om = swcrt::omega_hh_under_etiant(Q, phi);
      json << ",\"pi\":" << swcrt::json_vector(pi)
           << ",\"omega\":" << swcrt::json_vector(om)
           << ",\"omega_total\":" << swcrt::json_double(om.sum());
    } else if (name == "hhant-under-eti") {
      require(ell == 1, "this scenario's closed form covers a one-period window");
      json << ",\"pi\":"
           << swcrt::json_vector(swcrt::pi_hhant_under_eti(Q, phi))
           << ",\"psi\":"
           << swcrt::json_vector(swcrt::psi_hhant_under_eti(Q, phi));
    } else if (name == "eti-j3") {
      require(Q == 2, "the exposure-time closed form needs J = 3 (Q = 2)");
      require(ell == 1, "this scenario's closed form covers a one-period window");
      Eigen::VectorXd load(2);
      for (int s = 1; s <= 2; ++s)
        load(s - 1) = swcrt::eti_j3_gamma_loading(phi, s);
      json << ",\"gamma_loading\":" << swcrt::json_vector(load);
    } else {
      throw swcrt::ConfigError(
          "unknown scenario '" + name +
          "'; expected hh-under-hhant, hh-under-etiant, hhant-under-eti or "
          "eti-j3");
    }
    json << "}";
    *out = dup_string(json.str());
  });
}

int swcrt_bias_grid_csv(const int* Qs, int n_q, const double* phis, int n_phi,
                        char** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    require(Qs != nullptr && n_q > 0 && phis != nullptr && n_phi > 0,
            "both grid axes must be nonempty");
    *out = dup_string(swcrt::bias_grid_csv(
        std::vector<int>(Qs, Qs + n_q), std::vector<double>(phis, phis + n_phi)));
  });
}

int swcrt_expectation_json(const swcrt_layout* layout,
                           const char* working_model, const char* truth_json,
                           double phi, char** out) {
  return guarded([&] {
    require(layout != nullptr && working_model != nullptr && out != nullptr,
            "null argument");
    swcrt::Model working = swcrt::model_from_string(working_model);
    swcrt::TrueModelParams truth = parse_truth(layout->impl, truth_json);
    *out = dup_string(
        swcrt::predict_expectation(layout->impl, working, truth, phi).to_json());
  });
}

int swcrt_variance_json(const swcrt_layout* layout, const char* model,
                        double rho, double sigma_sq, char** out) {
  return guarded([&] {
    require(layout != nullptr && model != nullptr && out != nullptr,
            "null argument");
    swcrt::Model m = swcrt::model_from_string(model);
    *out = dup_string(
        swcrt::variance(layout->impl, m, icc_params(layout->impl, rho, sigma_sq))
            .to_json());
  });
}

int swcrt_power(const swcrt_layout* layout, const char* model, double rho,
                double sigma_sq, double effect, double alpha, double* out) {
  return guarded([&] {
    require(layout != nullptr && model != nullptr && out != nullptr,
            "null argument");
    swcrt::Model m = swcrt::model_from_string(model);
    double var =
        swcrt::variance(layout->impl, m, icc_params(layout->impl, rho, sigma_sq))
            .variance;
    *out = swcrt::power(effect, var, alpha);
  });
}

int swcrt_detectable_effect(const swcrt_layout* layout, const char* model,
                            double rho, double sigma_sq, double target_power,
                            double alpha, double* out) {
  return guarded([&] {
    require(layout != nullptr && model != nullptr && out != nullptr,
            "null argument");
    swcrt::Model m = swcrt::model_from_string(model);
    *out = swcrt::detectable_effect(layout->impl, m,
                                    icc_params(layout->impl, rho, sigma_sq),
                                    target_power, alpha);
  });
}

int swcrt_sample_size(const swcrt_layout* layout, const char* model,
                      double rho, double sigma_sq, double effect,
                      double target_power, double alpha, char vary, int cap,
                      int* value_out, double* power_out) {
  return guarded([&] {
    require(layout != nullptr && model != nullptr && value_out != nullptr &&
                power_out != nullptr,
            "null argument");
    swcrt::Model m = swcrt::model_from_string(model);
    swcrt::SampleSizeResult r = swcrt::sample_size_search(
        layout->impl, m, icc_params(layout->impl, rho, sigma_sq), effect,
        target_power, alpha, vary, cap);
    *value_out = r.value;
    *power_out = r.achieved_power;
  });
}

int swcrt_power_grid_csv(const swcrt_layout* layout, const char* model_a,
                         const char* model_b, const char* truth_family,
                         const double* rhos, int n_rho, const double* ratios,
                         int n_ratio, double effect, double sigma_sq,
                         double alpha, char** out) {
  return guarded([&] {
    require(layout != nullptr && model_a != nullptr && model_b != nullptr &&
                truth_family != nullptr && out != nullptr,
            "null argument");
    require(rhos != nullptr && n_rho > 0 && ratios != nullptr && n_ratio > 0,
            "both grid axes must be nonempty");
    swcrt::GridRequest req;
    req.model_a = swcrt::model_from_string(model_a);
    req.model_b = swcrt::model_from_string(model_b);
    req.truth_family = swcrt::model_from_string(truth_family);
    req.rhos.assign(rhos, rhos + n_rho);
    req.ratios.assign(ratios, ratios + n_ratio);
    req.effect = effect;
    req.sigma_sq = sigma_sq;
    req.alpha = alpha;
    *out = dup_string(swcrt::power_ratio_grid(layout->impl, req));
  });
}

int swcrt_dataset_csv(const swcrt_layout* layout, const char* truth_json,
                      unsigned long long seed, unsigned long long rep,
                      char** out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "null argument");
    swcrt::TrueModelParams truth = parse_truth(layout->impl, truth_json);
    *out = dup_string(swcrt::simulate_dataset_csv(layout->impl, truth, seed, rep));
  });
}

int swcrt_study_report(const swcrt_layout* layout, const char* truth_json,
                       const char* working_models, int reps,
                       unsigned long long seed, double alpha, int precision,
                       int as_json, char** out) {
  return guarded([&] {
    require(layout != nullptr && out != nullptr, "null argument");
    swcrt::TrueModelParams truth = parse_truth(layout->impl, truth_json);
    std::vector<swcrt::Model> models = parse_model_list(working_models);
    swcrt::StudyReport report =
        swcrt::run_study(layout->impl, truth, models, reps, seed, alpha);
    *out = dup_string(as_json ? report.to_json() : report.to_csv(precision));
  });
}

int swcrt_preset_layout(const char* name, swcrt_layout** out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    *out = new swcrt_layout{swcrt::preset_scenario(name).layout};
  });
}

int swcrt_preset_truth_json(const char* name, char** out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    *out = dup_string(swcrt::preset_scenario(name).truth.to_json());
  });
}

int swcrt_preset_working_models(const char* name, char** out) {
  return guarded([&] {
    require(name != nullptr && out != nullptr, "null argument");
    std::string joined;
    for (swcrt::Model m : swcrt::preset_scenario(name).working) {
      if (!joined.empty()) joined += ',';
      joined += swcrt::model_name(m);
    }
    *out = dup_string(joined);
  });
}

int swcrt_fit_json(const char* dataset_csv, const char* model, int use_reml,
                   int with_lrt, char** out) {
  return guarded([&] {
    require(dataset_csv != nullptr && model != nullptr && out != nullptr,
            "null argument");
    swcrt::Model m = swcrt::model_from_string(model);
    // Placeholder overwritten by the parser; Layout has no empty state.
    swcrt::Layout layout = swcrt::Layout::standard(2, 3, 1, 1);
    swcrt::CellData data = swcrt::CellData::from_dataset_csv(dataset_csv, &layout);
    swcrt::FitResult fit =
        swcrt::fit_model(layout, data, m, use_reml != 0);
    std::ostringstream json;
    json << "{\"layout\":" << layout.to_json() << ",\"fit\":" << fit.to_json();
    if (with_lrt) {
      swcrt::LrtResult lrt = swcrt::lrt_exposure_heterogeneity(
          layout, data, swcrt::has_anticipation(m));
      json << ",\"lrt\":{\"statistic\":" << swcrt::json_double(lrt.statistic)
           << ",\"df\":" << lrt.df
           << ",\"p_value\":" << swcrt::json_double(lrt.p_value) << "}";
    }
    json << "}";
    *out = dup_string(json.str());
  });
}

}  // extern "C"
