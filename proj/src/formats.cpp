#include "swcrt/formats.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace swcrt {

std::string format_double(double v, int precision) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::string json_double(double v) {
  if (std::isnan(v) || std::isinf(v)) return "null";
  return format_double(v, kFullPrecision);
}

std::string json_vector(const Eigen::VectorXd& v) {
  std::ostringstream out;
  out << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    out << json_double(v[i]);
  }
  out << ']';
  return out.str();
}

}  // namespace swcrt
