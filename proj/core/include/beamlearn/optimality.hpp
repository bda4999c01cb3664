#pragma once

#include "beamlearn/linalg.hpp"
#include "beamlearn/objective.hpp"

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace beamlearn {

struct StationarityReport {
  double residual_left = 0.0;   // ||offdiag(grad A^H)||_F
  double residual_right = 0.0;  // ||offdiag(A^H grad)||_F
  /// Taken from the factorization with the smaller residual.
  double diag_realness = 0.0;   // max |Im diag|
  double diag_min = 0.0;        // min Re diag
  RVector diagonal;             // Re diag
  bool right_factor = false;    // grad = A D rather than D A
  bool is_stationary = false;
};

/// The gradient factors as D A or A D with D real, positive and diagonal.
StationarityReport stationarity_check(const ObjectiveEvaluator& ev, const UnitaryTransform& a,
                                      double tol);

/// D_k = #{(l, m, n) in [0, B-1]^3 : l - m + n = k}, by enumeration.
RVector delta_count_diagonal(std::size_t b);

/// B^2 + (B - 1) B (2B - 1) / 3, the sum of delta_count_diagonal(B).
double triple_count_total(std::size_t b);

/// Diagonal D with grad(F_B) = F_B D for the unitary DFT under the uniform
/// single-path model: (2 / B) * delta_count_diagonal(B). The factor 2 comes from
/// the Wirtinger gradient and 1/B from the 1/sqrt(B) entries of F_B.
RVector dft_gradient_diagonal(std::size_t b);

struct PairCurvature {
  std::size_t i = 0;
  std::size_t k = 0;
  /// h'(0), h''(0) of h(alpha) = E|cos a x_i + sin a x_k|^4 + E|-sin a x_i + cos a x_k|^4.
  double first_derivative = 0.0;
  double second_derivative = 0.0;
  /// Same along the imaginary rotation x_i + j a x_k, x_k + j a x_i (reported only).
  double imag_first_derivative = 0.0;
  double imag_second_derivative = 0.0;
};

struct CurvatureReport {
  std::vector<PairCurvature> pairs;  // (i, k) with k < i, k outer
  double max_abs_first = 0.0;
  double max_second = 0.0;
  double max_abs_imag_first = 0.0;
  double max_imag_second = 0.0;
  bool is_local_max = false;  // max |h'(0)| <= 1e-8 and every h''(0) < -1e-12
};

/// With lifted rows x = lift(A):
///   h'(0)  = 4 Re E[|x_i|^2 x_i* x_k] - 4 Re E[|x_k|^2 x_k* x_i]
///   h''(0) = 4 (2 Re E[x_k^2 x_i*^2] + 4 E|x_i|^2 |x_k|^2 - E|x_k|^4 - E|x_i|^4)
CurvatureReport ca_curvature_check(const ObjectiveEvaluator& ev, const UnitaryTransform& a,
                                   unsigned threads = 1);

struct SuiteEntry {
  std::size_t b = 0;
  StationarityReport stationarity;
  double diagonal_error = 0.0;  // max |D - dft_gradient_diagonal(B)|
  CurvatureReport curvature;
  double msp_step_change = 0.0;  // ||msp_step(A) - A||_F
  bool pass = false;
};

inline constexpr double kSuiteTol = 1e-9;

/// Checks one transform against the DFT optimality conditions for its size.
SuiteEntry verify_transform(const UnitaryTransform& a, unsigned threads = 1);
/// verify_transform(F_B) for each B.
std::vector<SuiteEntry> verify_dft_suite(const std::vector<std::size_t>& dims,
                                         unsigned threads = 1);

/// CSV: B,stationary,residual,diag_error,max_abs_first,max_second,msp_change,pass
void write_suite_csv(std::ostream& os, const std::vector<SuiteEntry>& entries);

}  // namespace beamlearn
