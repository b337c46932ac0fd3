#pragma once

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

namespace hppl::test {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string model_path(const std::string& name) { return std::string(HPPL_MODELS_DIR) + "/" + name; }

inline std::string model_text(const std::string& name) { return read_file(model_path(name)); }

inline double normal_logpdf(double x, double mean, double var) {
  const double z = x - mean;
  return -0.5 * std::log(2.0 * std::numbers::pi * var) - z * z / (2.0 * var);
}

}  // namespace hppl::test
