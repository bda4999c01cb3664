#include "beamlearn/trig_fit.hpp"

#include "beamlearn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace beamlearn {

double TrigPolynomial::operator()(double t) const {
  const double u = base * t;
  return c0 + a1 * std::cos(u) + b1 * std::sin(u) + a2 * std::cos(2 * u) + b2 * std::sin(2 * u);
}

double TrigPolynomial::derivative(double t) const {
  const double u = base * t;
  return base * (-a1 * std::sin(u) + b1 * std::cos(u) - 2 * a2 * std::sin(2 * u) +
                 2 * b2 * std::cos(2 * u));
}

double TrigPolynomial::second_derivative(double t) const {
  const double u = base * t;
  return base * base *
         (-a1 * std::cos(u) - b1 * std::sin(u) - 4 * a2 * std::cos(2 * u) - 4 * b2 * std::sin(2 * u));
}

double TrigPolynomial::scale() const {
  return std::abs(c0) + std::abs(a1) + std::abs(b1) + std::abs(a2) + std::abs(b2);
}

std::array<double, kTrigFitSamples> trig_fit_angles(double base) {
  std::array<double, kTrigFitSamples> t{};
  for (std::size_t j = 0; j < kTrigFitSamples; ++j)
    t[j] = kTwoPi * static_cast<double>(j) / static_cast<double>(kTrigFitSamples) / base;
  return t;
}

TrigPolynomial fit_trig_polynomial(const std::array<double, kTrigFitSamples>& values, double base) {
  constexpr double n = kTrigFitSamples;
  TrigPolynomial p;
  p.base = base;
  for (std::size_t j = 0; j < kTrigFitSamples; ++j) {
    const double u = kTwoPi * static_cast<double>(j) / n;
    const double v = values[j];
    p.c0 += v;
    p.a1 += v * std::cos(u);
    p.b1 += v * std::sin(u);
    p.a2 += v * std::cos(2 * u);
    p.b2 += v * std::sin(2 * u);
  }
  p.c0 /= n;
  p.a1 *= 2.0 / n;
  p.b1 *= 2.0 / n;
  p.a2 *= 2.0 / n;
  p.b2 *= 2.0 / n;
  return p;
}

TrigPolynomial fit_trig_polynomial(const std::function<double(double)>& h, double base) {
  std::array<double, kTrigFitSamples> values{};
  const auto angles = trig_fit_angles(base);
  for (std::size_t j = 0; j < kTrigFitSamples; ++j) values[j] = h(angles[j]);
  return fit_trig_polynomial(values, base);
}

namespace {

double wrap(double t, double upper) {
  t = std::fmod(t, upper);
  if (t < 0) t += upper;
  if (t >= upper) t = 0.0;
  return t;
}

}  // namespace

double maximize_trig(const TrigPolynomial& p, double upper, const MaximizeOptions& opts) {
  const double tie = 1e-13 * std::max(p.scale(), 1e-300);
  const double amplitude = std::abs(p.a1) + std::abs(p.b1) + std::abs(p.a2) + std::abs(p.b2);
  if (amplitude <= 1e-14 * std::max(std::abs(p.c0), 1e-300)) return 0.0;

  const std::size_t n = std::max<std::size_t>(opts.grid_points, 1);
  std::vector<double> grid(n);
  for (std::size_t g = 0; g < n; ++g) grid[g] = p(upper * static_cast<double>(g) / static_cast<double>(n));

  // the objective is periodic in `upper` for every use here, so the grid wraps
  std::vector<double> candidates{0.0};
  for (std::size_t g = 0; g < n; ++g) {
    const double prev = grid[(g + n - 1) % n];
    const double next = grid[(g + 1) % n];
    if (grid[g] < prev || grid[g] < next) continue;
    double t = upper * static_cast<double>(g) / static_cast<double>(n);
    for (std::size_t s = 0; s < opts.newton_steps; ++s) {
      const double d2 = p.second_derivative(t);
      if (!(d2 < 0.0)) break;
      const double step = p.derivative(t) / d2;
      const double next_t = t - step;
      if (!(p(next_t) >= p(t) - tie)) break;
      t = next_t;
    }
    candidates.push_back(wrap(t, upper));
  }

  double best_value = -INFINITY;
  for (const double t : candidates) best_value = std::max(best_value, p(t));
  double best = upper;
  for (const double t : candidates)
    if (p(t) >= best_value - tie) best = std::min(best, t);
  return best;
}

}  // namespace beamlearn
