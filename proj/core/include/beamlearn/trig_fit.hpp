#pragma once

#include <array>
#include <cstddef>
#include <functional>

namespace beamlearn {

/// h(t) = c0 + a1 cos(m t) + b1 sin(m t) + a2 cos(2 m t) + b2 sin(2 m t).
///
/// The Givens-restricted l4 objective is of this form in the rotation angle
/// with m = 2 (quartic in cos/sin), and in the relative phase with m = 1.
struct TrigPolynomial {
  double base = 1.0;  // m
  double c0 = 0.0;
  double a1 = 0.0, b1 = 0.0;
  double a2 = 0.0, b2 = 0.0;

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;
  /// Sum of coefficient magnitudes; the scale used for tie tolerances.
  double scale() const;
};

/// Fits the five coefficients from 8 equispaced samples over one period
/// 2 pi / m. Exact (to roundoff) for functions in the family.
TrigPolynomial fit_trig_polynomial(const std::function<double(double)>& h, double base);

inline constexpr std::size_t kTrigFitSamples = 8;
/// Sample angles t_j = (2 pi j / 8) / m used by the fit.
std::array<double, kTrigFitSamples> trig_fit_angles(double base);
/// Fit from values already evaluated at trig_fit_angles(base).
TrigPolynomial fit_trig_polynomial(const std::array<double, kTrigFitSamples>& values, double base);

struct MaximizeOptions {
  std::size_t grid_points = 64;
  std::size_t newton_steps = 4;
};

/// Global maximizer of p over [0, upper). Every local maximum of a dense grid
/// is refined with Newton steps on p'. Values within a relative 1e-13 of the
/// best are ties and resolve to the smallest angle; 0 is always a candidate, and
/// a (numerically) constant p returns 0.
double maximize_trig(const TrigPolynomial& p, double upper, const MaximizeOptions& opts);

}  // namespace beamlearn
