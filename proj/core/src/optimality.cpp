#include "beamlearn/optimality.hpp"

#include "beamlearn/learn.hpp"
#include "beamlearn/parallel.hpp"
#include "beamlearn/trig_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

namespace beamlearn {

namespace {

double offdiag_norm(const CMatrix& p) {
  double sum = 0.0;
  for (Eigen::Index c = 0; c < p.cols(); ++c)
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      if (r != c) sum += std::norm(p(r, c));
  return std::sqrt(sum);
}

}  // namespace

StationarityReport stationarity_check(const ObjectiveEvaluator& ev, const UnitaryTransform& a,
                                      double tol) {
  const CMatrix g = ev.gradient(a.matrix());
  const CMatrix left = g * a.matrix().adjoint();
  const CMatrix right = a.matrix().adjoint() * g;
  StationarityReport r;
  r.residual_left = offdiag_norm(left);
  r.residual_right = offdiag_norm(right);
  r.right_factor = r.residual_right < r.residual_left;
  const CVector d = (r.right_factor ? right : left).diagonal();
  r.diagonal = d.real();
  r.diag_realness = d.imag().cwiseAbs().maxCoeff();
  r.diag_min = r.diagonal.minCoeff();
  r.is_stationary = std::min(r.residual_left, r.residual_right) <= tol &&
                    r.diag_realness <= tol && r.diag_min > 0.0;
  return r;
}

RVector delta_count_diagonal(std::size_t b) {
  const auto n = static_cast<long long>(b);
  RVector d = RVector::Zero(static_cast<Eigen::Index>(b));
  for (long long l = 0; l < n; ++l)
    for (long long m = 0; m < n; ++m)
      for (long long q = 0; q < n; ++q) {
        const long long k = l - m + q;
        if (k >= 0 && k < n) d(static_cast<Eigen::Index>(k)) += 1.0;
      }
  return d;
}

double triple_count_total(std::size_t b) {
  const double x = static_cast<double>(b);
  return x * x + (x - 1) * x * (2 * x - 1) / 3.0;
}

RVector dft_gradient_diagonal(std::size_t b) {
  return delta_count_diagonal(b) * (2.0 / static_cast<double>(b));
}

CurvatureReport ca_curvature_check(const ObjectiveEvaluator& ev, const UnitaryTransform& a,
                                   unsigned threads) {
  const CRowMatrix x = ev.lift(a.matrix());
  const std::size_t n = a.dim();
  CurvatureReport report;
  for (std::size_t k = 0; k + 1 < n; ++k)
    for (std::size_t i = k + 1; i < n; ++i) report.pairs.push_back({i, k});

  const auto imag_angles = trig_fit_angles(2.0);
  std::array<std::array<Complex, 4>, kTrigFitSamples> imag_mixes{};
  for (std::size_t j = 0; j < kTrigFitSamples; ++j) {
    const double c = std::cos(imag_angles[j]);
    const Complex js(0.0, std::sin(imag_angles[j]));
    imag_mixes[j] = {c, js, js, c};
  }

  parallel_for(report.pairs.size(), threads, [&](std::size_t p) {
    auto& pc = report.pairs[p];
    const auto xi = x.row(static_cast<Eigen::Index>(pc.i));
    const auto xk = x.row(static_cast<Eigen::Index>(pc.k));
    pc.first_derivative = 4.0 * ev.moment(xi, xk, xi, xi).real() -
                          4.0 * ev.moment(xk, xi, xk, xk).real();
    pc.second_derivative =
        4.0 * (2.0 * ev.moment(xk, xk, xi, xi).real() + 4.0 * ev.moment(xi, xk, xi, xk).real() -
               ev.moment(xk, xk, xk, xk).real() - ev.moment(xi, xi, xi, xi).real());
    std::array<double, kTrigFitSamples> values{};
    ev.pair_quartic(xi, xk, imag_mixes, values);
    const TrigPolynomial h = fit_trig_polynomial(values, 2.0);
    pc.imag_first_derivative = h.derivative(0.0);
    pc.imag_second_derivative = h.second_derivative(0.0);
  });

  report.max_second = -INFINITY;
  report.max_imag_second = -INFINITY;
  for (const auto& pc : report.pairs) {
    report.max_abs_first = std::max(report.max_abs_first, std::abs(pc.first_derivative));
    report.max_second = std::max(report.max_second, pc.second_derivative);
    report.max_abs_imag_first = std::max(report.max_abs_imag_first, std::abs(pc.imag_first_derivative));
    report.max_imag_second = std::max(report.max_imag_second, pc.imag_second_derivative);
  }
  if (report.pairs.empty()) report.max_second = report.max_imag_second = 0.0;
  report.is_local_max = report.max_abs_first <= 1e-8 &&
                        std::all_of(report.pairs.begin(), report.pairs.end(),
                                    [](const PairCurvature& pc) { return pc.second_derivative < -1e-12; });
  return report;
}

SuiteEntry verify_transform(const UnitaryTransform& a, unsigned threads) {
  const auto ev = ObjectiveEvaluator::exact_uniform(a.dim());
  SuiteEntry e;
  e.b = a.dim();
  e.stationarity = stationarity_check(ev, a, kSuiteTol);
  e.diagonal_error = (e.stationarity.diagonal - dft_gradient_diagonal(e.b)).cwiseAbs().maxCoeff();
  e.curvature = ca_curvature_check(ev, a, threads);
  e.msp_step_change = (msp_step(ev, a).matrix() - a.matrix()).norm();
  e.pass = e.stationarity.is_stationary && e.diagonal_error <= kSuiteTol &&
           e.curvature.is_local_max && e.msp_step_change <= kSuiteTol;
  return e;
}

std::vector<SuiteEntry> verify_dft_suite(const std::vector<std::size_t>& dims, unsigned threads) {
  std::vector<SuiteEntry> out;
  out.reserve(dims.size());
  for (const auto b : dims) out.push_back(verify_transform(dft_matrix(b), threads));
  return out;
}

void write_suite_csv(std::ostream& os, const std::vector<SuiteEntry>& entries) {
  const auto precision = os.precision(6);
  os << "B,stationary,residual,diag_error,max_abs_first,max_second,msp_change,pass\n";
  for (const auto& e : entries) {
    os << e.b << ',' << (e.stationarity.is_stationary ? 1 : 0) << ','
       << std::min(e.stationarity.residual_left, e.stationarity.residual_right) << ','
       << e.diagonal_error << ',' << e.curvature.max_abs_first << ',' << e.curvature.max_second
       << ',' << e.msp_step_change << ',' << (e.pass ? "pass" : "fail") << '\n';
  }
  os.precision(precision);
}

}  // namespace beamlearn
