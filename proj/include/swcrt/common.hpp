// Shared enums and error types for the stepped-wedge design/analysis core.
#pragma once

#include <stdexcept>
#include <string>

namespace swcrt {

// Working/true model families for a stepped-wedge trial with a possible
// anticipation effect:
//   HH       constant treatment effect
//   HH_ANT   constant treatment effect plus anticipation effect
//   ETI      exposure-time-indexed treatment effects delta(s)
//   ETI_ANT  exposure-time-indexed effects plus anticipation effect
enum class Model { HH, HH_ANT, ETI, ETI_ANT };

inline bool has_anticipation(Model m) {
  return m == Model::HH_ANT || m == Model::ETI_ANT;
}
inline bool has_exposure_curve(Model m) {
  return m == Model::ETI || m == Model::ETI_ANT;
}

std::string model_name(Model m);             // "HH", "HH-ANT", "ETI", "ETI-ANT"
Model model_from_string(const std::string& text);  // case-insensitive, also "hh_ant" style

// Error taxonomy; the C API and the CLI map these to distinct status codes.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RankError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace swcrt
