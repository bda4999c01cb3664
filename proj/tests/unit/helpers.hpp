#pragma once

#include "beamlearn/linalg.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

namespace testing {

inline double max_abs_diff(const beamlearn::CMatrix& a, const beamlearn::CMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Per-test scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("beamlearn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace testing
