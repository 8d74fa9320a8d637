// Command-line front end for the stepped-wedge trial engine.  All numeric
// work happens behind the C API in swcrt.h; this file only parses arguments,
// reads and writes files, and reshapes JSON payloads for CSV output.
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "swcrt.h"

namespace {

struct ApiError {
  int code;
  std::string message;
};

const char* code_name(int code) {
  switch (code) {
    case SWCRT_E_CONFIG:
      return "E_CONFIG";
    case SWCRT_E_RANK:
      return "E_RANK";
    case SWCRT_E_CONVERGENCE:
      return "E_CONVERGENCE";
    case SWCRT_E_IO:
      return "E_IO";
    default:
      return "E_CONFIG";
  }
}

void check(int status) {
  if (status != SWCRT_OK) throw ApiError{status, swcrt_last_error()};
}

struct LayoutDeleter {
  void operator()(swcrt_layout* l) const { swcrt_layout_free(l); }
};
using LayoutPtr = std::unique_ptr<swcrt_layout, LayoutDeleter>;

struct StringDeleter {
  void operator()(char* s) const { swcrt_string_free(s); }
};
using ApiString = std::unique_ptr<char, StringDeleter>;

std::string take_string(char* raw) {
  ApiString owned(raw);
  return std::string(owned.get());
}

using Echo = std::vector<std::pair<std::string, std::string>>;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ApiError{SWCRT_E_IO, "cannot read " + path};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ApiError{SWCRT_E_IO, "cannot write " + tmp};
    out << content;
    if (!out) throw ApiError{SWCRT_E_IO, "short write to " + tmp};
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ApiError{SWCRT_E_IO, "cannot move " + tmp + " into place"};
}

std::string fmt_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  try {
    while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  } catch (const std::exception&) {
    throw ApiError{SWCRT_E_CONFIG, "bad numeric list '" + text + "'"};
  }
  if (out.empty()) throw ApiError{SWCRT_E_CONFIG, "empty numeric list"};
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  try {
    while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
  } catch (const std::exception&) {
    throw ApiError{SWCRT_E_CONFIG, "bad integer list '" + text + "'"};
  }
  if (out.empty()) throw ApiError{SWCRT_E_CONFIG, "empty integer list"};
  return out;
}

struct CommonOpts {
  std::string output;
  std::string format = "csv";
  std::string precision = "default";

  void add_to(CLI::App* sub) {
    sub->add_option("-o,--output", output, "Write to this file instead of stdout");
    sub->add_option("--format", format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--precision", precision,
                    "Printed precision: default (6 significant digits) or full")
        ->check(CLI::IsMember({"default", "full"}));
  }
  bool json() const { return format == "json"; }
  int digits() const { return precision == "full" ? 17 : 6; }
};

// Flatten a JSON payload to field,value rows so every subcommand has a CSV
// form; arrays gain 1-based suffixes.
void flatten_json(const nlohmann::ordered_json& j, const std::string& prefix,
                  int digits, std::ostringstream& out) {
  if (j.is_object()) {
    for (const auto& [key, value] : j.items())
      flatten_json(value, prefix.empty() ? key : prefix + "." + key, digits, out);
  } else if (j.is_array()) {
    int i = 1;
    for (const auto& value : j)
      flatten_json(value, prefix + "." + std::to_string(i++), digits, out);
  } else if (j.is_number_float()) {
    out << prefix << ',' << fmt_double(j.get<double>(), digits) << '\n';
  } else if (j.is_string()) {
    out << prefix << ',' << j.get<std::string>() << '\n';
  } else if (j.is_null()) {
    out << prefix << ",nan\n";
  } else {
    out << prefix << ',' << j.dump() << '\n';
  }
}

std::string flatten_payload(const std::string& json_text, int digits) {
  std::ostringstream out;
  out << "field,value\n";
  flatten_json(nlohmann::ordered_json::parse(json_text), "", digits, out);
  return out.str();
}

void emit_csv(const CommonOpts& common, const Echo& echo,
              const std::string& payload) {
  std::ostringstream out;
  for (const auto& [key, value] : echo) out << "# " << key << '=' << value << '\n';
  out << payload;
  if (common.output.empty())
    std::cout << out.str();
  else
    write_file(common.output, out.str());
}

void emit_json(const CommonOpts& common, const Echo& echo,
               const std::string& result_json) {
  nlohmann::ordered_json doc;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  for (const auto& [key, value] : echo) {
    nlohmann::ordered_json parsed =
        nlohmann::ordered_json::parse(value, nullptr, false);
    config[key] = parsed.is_discarded() ? nlohmann::ordered_json(value) : parsed;
  }
  doc["config"] = config;
  doc["result"] = nlohmann::ordered_json::parse(result_json);
  const std::string text = doc.dump() + "\n";
  if (common.output.empty())
    std::cout << text;
  else
    write_file(common.output, text);
}

void emit(const CommonOpts& common, const Echo& echo,
          const std::string& result_json) {
  if (common.json())
    emit_json(common, echo, result_json);
  else
    emit_csv(common, echo, flatten_payload(result_json, common.digits()));
}

struct LayoutOpts {
  std::string file, standard_str;
  int I = 0, J = 0, K = 1, ell = 1;
  CLI::Option* o_file = nullptr;
  CLI::Option* o_std = nullptr;
  CLI::Option* o_I = nullptr;
  CLI::Option* o_J = nullptr;

  void add_to(CLI::App* sub) {
    o_file = sub->add_option("--layout,--design", file,
                             "Layout JSON file (general designs)");
    o_std = sub->add_option("--standard", standard_str,
                            "Standard design as I,J,K[,ell]");
    o_I = sub->add_option("--I", I, "Clusters (standard design)");
    o_J = sub->add_option("--J", J, "Periods (standard design)");
    sub->add_option("--K", K, "Individuals per cluster-period (default 1)");
    sub->add_option("--ell", ell, "Anticipation window length (default 1)");
  }

  bool any_inline() const {
    return o_std->count() || o_I->count() || o_J->count();
  }

  LayoutPtr resolve(Echo& echo) const {
    swcrt_layout* raw = nullptr;
    if (o_file->count()) {
      if (any_inline())
        throw ApiError{SWCRT_E_CONFIG,
                       "give either --layout or inline design flags, not both"};
      check(swcrt_layout_from_json(read_file(file).c_str(), &raw));
    } else if (o_std->count()) {
      if (o_I->count() || o_J->count())
        throw ApiError{SWCRT_E_CONFIG,
                       "give either --standard or --I/--J, not both"};
      std::vector<int> parts = parse_ints(standard_str);
      if (parts.size() != 3 && parts.size() != 4)
        throw ApiError{SWCRT_E_CONFIG, "--standard needs I,J,K or I,J,K,ell"};
      check(swcrt_layout_standard(parts[0], parts[1], parts[2],
                                  parts.size() == 4 ? parts[3] : 1, &raw));
    } else {
      if (!o_I->count() || !o_J->count())
        throw ApiError{SWCRT_E_CONFIG,
                       "a design is required: --layout, --standard, or --I/--J"};
      check(swcrt_layout_standard(I, J, K, ell, &raw));
    }
    LayoutPtr layout(raw);
    char* js = nullptr;
    check(swcrt_layout_json(layout.get(), &js));
    echo.emplace_back("layout", take_string(js));
    return layout;
  }
};

int layout_individuals(const Echo& echo) {
  for (const auto& [key, value] : echo)
    if (key == "layout") return nlohmann::ordered_json::parse(value).at("K");
  throw ApiError{SWCRT_E_CONFIG, "layout missing"};
}

// Truth specs are JSON either inline (starts with '{') or in a file.
std::string resolve_truth(const std::string& spec) {
  if (!spec.empty() && spec.front() == '{') return spec;
  return read_file(spec);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Stepped-wedge cluster randomized trials with anticipation and "
      "exposure-time treatment-effect heterogeneity: design, bias, power, "
      "simulation, and model fitting"};
  app.require_subcommand(1);

  // design
  auto* cmd_design = app.add_subcommand(
      "design", "Validate a layout and print its indicator table");
  CommonOpts design_common;
  LayoutOpts design_layout;
  design_common.add_to(cmd_design);
  design_layout.add_to(cmd_design);
  cmd_design->callback([&] {
    Echo echo;
    LayoutPtr layout = design_layout.resolve(echo);
    if (design_common.json()) {
      emit_json(design_common, Echo{}, echo.front().second);
    } else {
      char* csv = nullptr;
      check(swcrt_indicators_csv(layout.get(), &csv));
      emit_csv(design_common, echo, take_string(csv));
    }
  });

  // constants
  auto* cmd_constants = app.add_subcommand(
      "constants", "Indicator-sum design constants of a layout");
  CommonOpts constants_common;
  LayoutOpts constants_layout;
  constants_common.add_to(cmd_constants);
  constants_layout.add_to(cmd_constants);
  cmd_constants->callback([&] {
    Echo echo;
    LayoutPtr layout = constants_layout.resolve(echo);
    char* js = nullptr;
    check(swcrt_design_constants_json(layout.get(), &js));
    emit(constants_common, echo, take_string(js));
  });

  // bias
  auto* cmd_bias = app.add_subcommand(
      "bias", "Closed-form misspecification weights on the standard design");
  CommonOpts bias_common;
  std::string bias_scenario, bias_q_list, bias_phi_list;
  int bias_Q = 0, bias_ell = 1;
  double bias_phi = 0;
  bias_common.add_to(cmd_bias);
  auto* o_scenario = cmd_bias->add_option(
      "--scenario", bias_scenario,
      "hh-under-hhant, hh-under-etiant, hhant-under-eti, or eti-j3");
  auto* o_bias_Q = cmd_bias->add_option("--Q", bias_Q, "Sequence count J-1");
  auto* o_bias_phi =
      cmd_bias->add_option("--phi", bias_phi, "Cluster-period mean correlation");
  cmd_bias->add_option("--ell", bias_ell,
                       "Anticipation window length (hh-under-hhant only)");
  auto* o_q_list =
      cmd_bias->add_option("--Q-list", bias_q_list, "Grid export: Q values");
  auto* o_phi_list =
      cmd_bias->add_option("--phi-list", bias_phi_list, "Grid export: phi values");
  cmd_bias->callback([&] {
    const bool grid = o_q_list->count() || o_phi_list->count();
    if (grid == (o_scenario->count() > 0))
      throw ApiError{SWCRT_E_CONFIG,
                     "give --scenario, or --Q-list with --phi-list"};
    if (grid) {
      if (!o_q_list->count() || !o_phi_list->count())
        throw ApiError{SWCRT_E_CONFIG, "grid export needs --Q-list and --phi-list"};
      if (bias_common.json())
        throw ApiError{SWCRT_E_CONFIG, "the weight grid is CSV only"};
      std::vector<int> qs = parse_ints(bias_q_list);
      std::vector<double> phis = parse_doubles(bias_phi_list);
      char* csv = nullptr;
      check(swcrt_bias_grid_csv(qs.data(), static_cast<int>(qs.size()),
                                phis.data(), static_cast<int>(phis.size()),
                                &csv));
      Echo echo{{"Q_list", bias_q_list}, {"phi_list", bias_phi_list}};
      emit_csv(bias_common, echo, take_string(csv));
      return;
    }
    if (!o_bias_Q->count() || !o_bias_phi->count())
      throw ApiError{SWCRT_E_CONFIG, "--scenario needs --Q and --phi"};
    char* js = nullptr;
    check(swcrt_bias_json(bias_scenario.c_str(), bias_Q, bias_phi, bias_ell, &js));
    Echo echo{{"scenario", bias_scenario},
              {"Q", std::to_string(bias_Q)},
              {"phi", fmt_double(bias_phi, 17)},
              {"ell", std::to_string(bias_ell)}};
    emit(bias_common, echo, take_string(js));
  });

  // expect
  auto* cmd_expect = app.add_subcommand(
      "expect",
      "Expected estimates of a working model under a true data-generating model");
  CommonOpts expect_common;
  LayoutOpts expect_layout;
  std::string expect_model, expect_truth;
  double expect_phi = 0, expect_rho = 0;
  expect_common.add_to(cmd_expect);
  expect_layout.add_to(cmd_expect);
  cmd_expect->add_option("--model", expect_model, "Working model")->required();
  cmd_expect->add_option("--truth", expect_truth,
                         "True model JSON (inline or a file path)")
      ->required();
  auto* o_expect_phi = cmd_expect->add_option(
      "--phi", expect_phi, "Cluster-period mean correlation");
  auto* o_expect_rho = cmd_expect->add_option(
      "--rho", expect_rho, "Intraclass correlation (converted using the layout's K)");
  cmd_expect->callback([&] {
    if ((o_expect_phi->count() > 0) == (o_expect_rho->count() > 0))
      throw ApiError{SWCRT_E_CONFIG, "give exactly one of --phi and --rho"};
    Echo echo;
    LayoutPtr layout = expect_layout.resolve(echo);
    double phi = expect_phi;
    if (o_expect_rho->count())
      check(swcrt_phi_from_icc(expect_rho, layout_individuals(echo), &phi));
    const std::string truth = resolve_truth(expect_truth);
    echo.emplace_back("model", expect_model);
    echo.emplace_back("truth", truth);
    echo.emplace_back("phi", fmt_double(phi, 17));
    char* js = nullptr;
    check(swcrt_expectation_json(layout.get(), expect_model.c_str(),
                                 truth.c_str(), phi, &js));
    emit(expect_common, echo, take_string(js));
  });

  // variance
  auto* cmd_variance = app.add_subcommand(
      "variance", "Analytic variance of the treatment-effect estimator");
  CommonOpts variance_common;
  LayoutOpts variance_layout;
  std::string variance_model;
  double variance_rho = 0, variance_sigma_sq = 1;
  variance_common.add_to(cmd_variance);
  variance_layout.add_to(cmd_variance);
  cmd_variance->add_option("--model", variance_model, "Working model")->required();
  cmd_variance->add_option("--rho", variance_rho, "Intraclass correlation")
      ->required();
  cmd_variance->add_option("--sigma-sq,--sigma_sq", variance_sigma_sq,
                           "Residual variance (default 1)");
  cmd_variance->callback([&] {
    Echo echo;
    LayoutPtr layout = variance_layout.resolve(echo);
    echo.emplace_back("model", variance_model);
    echo.emplace_back("rho", fmt_double(variance_rho, 17));
    echo.emplace_back("sigma_sq", fmt_double(variance_sigma_sq, 17));
    char* js = nullptr;
    check(swcrt_variance_json(layout.get(), variance_model.c_str(),
                              variance_rho, variance_sigma_sq, &js));
    emit(variance_common, echo, take_string(js));
  });

  // power
  auto* cmd_power =
      app.add_subcommand("power", "Two-tailed Wald power at an alternative");
  CommonOpts power_common;
  LayoutOpts power_layout;
  std::string power_model;
  double power_rho = 0, power_sigma_sq = 1, power_alpha = 0.05, power_effect = 0;
  power_common.add_to(cmd_power);
  power_layout.add_to(cmd_power);
  cmd_power->add_option("--model", power_model, "Working model")->required();
  cmd_power->add_option("--rho", power_rho, "Intraclass correlation")->required();
  cmd_power->add_option("--sigma-sq,--sigma_sq", power_sigma_sq,
                        "Residual variance (default 1)");
  cmd_power->add_option("--alpha", power_alpha, "Significance level (default 0.05)");
  cmd_power->add_option("--effect,--trt", power_effect, "Alternative effect size")
      ->required();
  cmd_power->callback([&] {
    Echo echo;
    LayoutPtr layout = power_layout.resolve(echo);
    echo.emplace_back("model", power_model);
    echo.emplace_back("rho", fmt_double(power_rho, 17));
    echo.emplace_back("sigma_sq", fmt_double(power_sigma_sq, 17));
    echo.emplace_back("alpha", fmt_double(power_alpha, 17));
    echo.emplace_back("effect", fmt_double(power_effect, 17));
    double value = 0;
    check(swcrt_power(layout.get(), power_model.c_str(), power_rho,
                      power_sigma_sq, power_effect, power_alpha, &value));
    emit(power_common, echo,
         "{\"power\":" + fmt_double(value, 17) + "}");
  });

  // mde
  auto* cmd_mde = app.add_subcommand(
      "mde", "Minimum detectable effect at a target power");
  CommonOpts mde_common;
  LayoutOpts mde_layout;
  std::string mde_model;
  double mde_rho = 0, mde_sigma_sq = 1, mde_alpha = 0.05, mde_power = 0.8;
  mde_common.add_to(cmd_mde);
  mde_layout.add_to(cmd_mde);
  cmd_mde->add_option("--model", mde_model, "Working model")->required();
  cmd_mde->add_option("--rho", mde_rho, "Intraclass correlation")->required();
  cmd_mde->add_option("--sigma-sq,--sigma_sq", mde_sigma_sq,
                      "Residual variance (default 1)");
  cmd_mde->add_option("--alpha", mde_alpha, "Significance level (default 0.05)");
  cmd_mde->add_option("--power", mde_power, "Target power (default 0.8)");
  cmd_mde->callback([&] {
    Echo echo;
    LayoutPtr layout = mde_layout.resolve(echo);
    echo.emplace_back("model", mde_model);
    echo.emplace_back("rho", fmt_double(mde_rho, 17));
    echo.emplace_back("sigma_sq", fmt_double(mde_sigma_sq, 17));
    echo.emplace_back("alpha", fmt_double(mde_alpha, 17));
    echo.emplace_back("power", fmt_double(mde_power, 17));
    double value = 0;
    check(swcrt_detectable_effect(layout.get(), mde_model.c_str(), mde_rho,
                                  mde_sigma_sq, mde_power, mde_alpha, &value));
    emit(mde_common, echo,
         "{\"detectable_effect\":" + fmt_double(value, 17) + "}");
  });

  // grid
  auto* cmd_grid = app.add_subcommand(
      "grid", "Power comparison of two working models over (rho, gamma/effect)");
  CommonOpts grid_common;
  LayoutOpts grid_layout;
  std::string grid_model_a = "hh", grid_model_b = "hh-ant";
  std::string grid_truth_family = "hh-ant";
  std::string grid_rho_list, grid_ratio_list;
  double grid_effect = 0.1, grid_sigma_sq = 1, grid_alpha = 0.05;
  grid_common.add_to(cmd_grid);
  grid_layout.add_to(cmd_grid);
  cmd_grid->add_option("--model-a", grid_model_a, "First working model");
  cmd_grid->add_option("--model-b", grid_model_b, "Second working model");
  cmd_grid->add_option("--truth-family", grid_truth_family,
                       "True model family carrying the anticipation term");
  cmd_grid->add_option("--rho-list", grid_rho_list, "Intraclass correlations")
      ->required();
  cmd_grid->add_option("--ratio-list", grid_ratio_list,
                       "gamma/effect ratios")
      ->required();
  cmd_grid->add_option("--effect,--trt", grid_effect,
                       "True effect size (default 0.1)");
  cmd_grid->add_option("--sigma-sq,--sigma_sq", grid_sigma_sq,
                       "Residual variance (default 1)");
  cmd_grid->add_option("--alpha", grid_alpha, "Significance level (default 0.05)");
  cmd_grid->callback([&] {
    if (grid_common.json())
      throw ApiError{SWCRT_E_CONFIG, "the power grid is CSV only"};
    Echo echo;
    LayoutPtr layout = grid_layout.resolve(echo);
    echo.emplace_back("model_a", grid_model_a);
    echo.emplace_back("model_b", grid_model_b);
    echo.emplace_back("truth_family", grid_truth_family);
    echo.emplace_back("rho_list", grid_rho_list);
    echo.emplace_back("ratio_list", grid_ratio_list);
    echo.emplace_back("effect", fmt_double(grid_effect, 17));
    echo.emplace_back("sigma_sq", fmt_double(grid_sigma_sq, 17));
    echo.emplace_back("alpha", fmt_double(grid_alpha, 17));
    std::vector<double> rhos = parse_doubles(grid_rho_list);
    std::vector<double> ratios = parse_doubles(grid_ratio_list);
    char* csv = nullptr;
    check(swcrt_power_grid_csv(
        layout.get(), grid_model_a.c_str(), grid_model_b.c_str(),
        grid_truth_family.c_str(), rhos.data(), static_cast<int>(rhos.size()),
        ratios.data(), static_cast<int>(ratios.size()), grid_effect,
        grid_sigma_sq, grid_alpha, &csv));
    emit_csv(grid_common, echo, take_string(csv));
  });

  // simulate
  auto* cmd_simulate = app.add_subcommand(
      "simulate", "Replicated study: fit working models to simulated trials");
  CommonOpts simulate_common;
  LayoutOpts simulate_layout;
  std::string simulate_preset, simulate_truth, simulate_working;
  std::string simulate_dataset_out;
  int simulate_reps = 2000;
  std::uint64_t simulate_seed = 0, simulate_rep = 0;
  double simulate_alpha = 0.05;
  simulate_common.add_to(cmd_simulate);
  simulate_layout.add_to(cmd_simulate);
  auto* o_preset = cmd_simulate->add_option(
      "--preset", simulate_preset, "Named scenario: I-null, I, II, III, IV");
  auto* o_sim_truth = cmd_simulate->add_option(
      "--truth", simulate_truth, "True model JSON (inline or a file path)");
  auto* o_working = cmd_simulate->add_option(
      "--working", simulate_working,
      "Comma-separated working models (default: all four)");
  cmd_simulate->add_option("--reps", simulate_reps,
                           "Replications (default 2000)");
  cmd_simulate->add_option("--seed", simulate_seed, "Random seed")->required();
  cmd_simulate->add_option("--alpha", simulate_alpha,
                           "Significance level (default 0.05)");
  cmd_simulate->add_option("--dataset-out", simulate_dataset_out,
                           "Also write one replication's dataset CSV here");
  cmd_simulate->add_option("--rep", simulate_rep,
                           "Replication index for --dataset-out (default 0)");
  cmd_simulate->callback([&] {
    Echo echo;
    LayoutPtr layout;
    std::string truth, working;
    if (o_preset->count()) {
      if (simulate_layout.o_file->count() || simulate_layout.any_inline())
        throw ApiError{SWCRT_E_CONFIG, "--preset already fixes the layout"};
      if (o_sim_truth->count())
        throw ApiError{SWCRT_E_CONFIG, "--preset already fixes the truth"};
      swcrt_layout* raw = nullptr;
      check(swcrt_preset_layout(simulate_preset.c_str(), &raw));
      layout.reset(raw);
      char* js = nullptr;
      check(swcrt_layout_json(layout.get(), &js));
      echo.emplace_back("preset", simulate_preset);
      echo.emplace_back("layout", take_string(js));
      char* tj = nullptr;
      check(swcrt_preset_truth_json(simulate_preset.c_str(), &tj));
      truth = take_string(tj);
      if (o_working->count()) {
        working = simulate_working;
      } else {
        char* wj = nullptr;
        check(swcrt_preset_working_models(simulate_preset.c_str(), &wj));
        working = take_string(wj);
      }
    } else {
      layout = simulate_layout.resolve(echo);
      if (!o_sim_truth->count())
        throw ApiError{SWCRT_E_CONFIG, "--truth is required without --preset"};
      truth = resolve_truth(simulate_truth);
      working = o_working->count() ? simulate_working : "hh,hh-ant,eti,eti-ant";
    }
    echo.emplace_back("truth", truth);
    echo.emplace_back("working", working);
    echo.emplace_back("reps", std::to_string(simulate_reps));
    echo.emplace_back("seed", std::to_string(simulate_seed));
    echo.emplace_back("alpha", fmt_double(simulate_alpha, 17));
    if (!simulate_dataset_out.empty()) {
      char* csv = nullptr;
      check(swcrt_dataset_csv(layout.get(), truth.c_str(), simulate_seed,
                              simulate_rep, &csv));
      write_file(simulate_dataset_out, take_string(csv));
    }
    char* report = nullptr;
    check(swcrt_study_report(layout.get(), truth.c_str(), working.c_str(),
                             simulate_reps, simulate_seed, simulate_alpha,
                             simulate_common.digits(),
                             simulate_common.json() ? 1 : 0, &report));
    if (simulate_common.json())
      emit_json(simulate_common, echo, take_string(report));
    else
      emit_csv(simulate_common, echo, take_string(report));
  });

  // fit
  auto* cmd_fit = app.add_subcommand(
      "fit", "Fit a working model to a long-format dataset CSV");
  CommonOpts fit_common;
  std::string fit_data, fit_model;
  bool fit_ml = false, fit_lrt = false;
  fit_common.add_to(cmd_fit);
  cmd_fit->add_option("--data", fit_data, "Dataset CSV file")->required();
  cmd_fit->add_option("--model", fit_model, "Working model")->required();
  cmd_fit->add_flag("--ml", fit_ml, "Maximum likelihood instead of REML");
  cmd_fit->add_flag("--lrt", fit_lrt,
                    "Add the likelihood-ratio test for exposure-time "
                    "heterogeneity");
  cmd_fit->callback([&] {
    const std::string data = read_file(fit_data);
    Echo echo{{"data", fit_data},
              {"model", fit_model},
              {"method", fit_ml ? "ml" : "reml"},
              {"lrt", fit_lrt ? "1" : "0"}};
    char* js = nullptr;
    check(swcrt_fit_json(data.c_str(), fit_model.c_str(), fit_ml ? 0 : 1,
                         fit_lrt ? 1 : 0, &js));
    emit(fit_common, echo, take_string(js));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "E_CONFIG: " << e.what() << '\n';
    return SWCRT_E_CONFIG;
  } catch (const ApiError& e) {
    std::cerr << code_name(e.code) << ": " << e.message << '\n';
    return e.code;
  }
  return 0;
}
