// Number formatting shared by the CSV and JSON emitters.
#pragma once

#include <string>

#include <Eigen/Dense>

namespace swcrt {

// `precision` is significant digits; 17 round-trips a double exactly.
inline constexpr int kFullPrecision = 17;

std::string format_double(double v, int precision = 6);
std::string json_double(double v);  // full precision, NaN as null
std::string json_vector(const Eigen::VectorXd& v);

}  // namespace swcrt
