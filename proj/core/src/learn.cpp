#include "beamlearn/learn.hpp"

#include "beamlearn/errors.hpp"
#include "beamlearn/matrix_io.hpp"
#include "beamlearn/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>

namespace beamlearn {

const char* to_string(Algorithm a) { return a == Algorithm::Msp ? "msp" : "ca"; }

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::Dft: return "dft";
    case InitKind::Identity: return "identity";
    case InitKind::RandomUnitary: return "random";
    case InitKind::FromFile: return "file";
  }
  return "?";
}

void validate(const LearnConfig& cfg) {
  if (cfg.max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
  if (!(cfg.convergence_tol > 0.0)) throw ConfigError("convergence_tol must be > 0");
  if (cfg.grid_points < 9) throw ConfigError("grid_points must be >= 9");
}

UnitaryTransform initial_transform(const LearnConfig& cfg, std::size_t dim) {
  switch (cfg.init) {
    case InitKind::Dft: return dft_matrix(dim);
    case InitKind::Identity: return UnitaryTransform::identity(dim);
    case InitKind::RandomUnitary: {
      auto rng = make_rng(cfg.seed, {0x1417});
      return random_unitary(dim, rng);
    }
    case InitKind::FromFile: {
      auto m = UnitaryTransform::reprojected(load_matrix(cfg.init_path));
      if (m.dim() != dim)
        throw DimensionError("initial transform is " + std::to_string(m.dim()) +
                             "-dimensional, expected " + std::to_string(dim));
      return m;
    }
  }
  throw ConfigError("unknown init kind");
}

// ---------------------------------------------------------------- MSP

UnitaryTransform msp_step(const ObjectiveEvaluator& ev, const UnitaryTransform& a,
                          std::size_t iteration) {
  const CMatrix g = ev.gradient(a.matrix());
  try {
    return project_unitary(g);
  } catch (const SingularInputError& e) {
    throw DegenerateGradientError(std::string("degenerate MSP gradient: ") + e.what(), iteration);
  }
}

double msp_fixed_point_residual(const ObjectiveEvaluator& ev, const UnitaryTransform& a) {
  const CMatrix p = ev.gradient(a.matrix()) * a.matrix().adjoint();
  const double mean_diag = p.diagonal().real().mean();
  const double skew = 0.5 * (p - p.adjoint()).norm();
  return mean_diag > 0.0 ? skew / mean_diag : skew;
}

LearnReport learn_msp(const ObjectiveEvaluator& ev, const LearnConfig& cfg) {
  validate(cfg);
  return learn_msp(ev, cfg, initial_transform(cfg, ev.dim()));
}

LearnReport learn_msp(const ObjectiveEvaluator& ev, const LearnConfig& cfg,
                      const UnitaryTransform& start) {
  validate(cfg);
  if (start.dim() != ev.dim()) throw DimensionError("initial transform dimension mismatch");
  auto rng = make_rng(cfg.seed, {0x9e27});
  LearnReport report;
  UnitaryTransform a = start;
  report.objective_trace.push_back(ev.objective(a.matrix()));
  for (std::size_t t = 0; t < cfg.max_iterations; ++t) {
    std::optional<UnitaryTransform> next;
    for (int attempt = 0;; ++attempt) {
      try {
        next = msp_step(ev, a, t);
        break;
      } catch (const DegenerateGradientError&) {
        if (attempt >= 3 || a.dim() < 2) throw;
        ++report.degenerate_retries;
        std::uniform_int_distribution<std::size_t> pick(0, a.dim() - 1);
        std::size_t i = pick(rng);
        std::size_t k = pick(rng);
        while (k == i) k = pick(rng);
        if (i < k) std::swap(i, k);
        CMatrix m = a.matrix();
        apply_givens_rows(m, {i, k, 1e-3});
        a = UnitaryTransform::reprojected(m);
      }
    }
    const double step = (next->matrix() - a.matrix()).norm();
    a = std::move(*next);
    report.objective_trace.push_back(ev.objective(a.matrix()));
    report.iterations_run = t + 1;
    if (step < cfg.convergence_tol) {
      report.converged = true;
      break;
    }
  }
  report.stationarity_residual = msp_fixed_point_residual(ev, a);
  report.final_transform = std::move(a);
  return report;
}

// ---------------------------------------------------------------- CA

TrigPolynomial givens_restricted_objective(const ObjectiveEvaluator& ev, const CRowRef& xi,
                                           const CRowRef& xk) {
  const auto angles = trig_fit_angles(2.0);
  std::array<std::array<Complex, 4>, kTrigFitSamples> mixes{};
  for (std::size_t j = 0; j < kTrigFitSamples; ++j) {
    const double c = std::cos(angles[j]);
    const double s = std::sin(angles[j]);
    mixes[j] = {c, s, -s, c};
  }
  std::array<double, kTrigFitSamples> values{};
  ev.pair_quartic(xi, xk, mixes, values);
  return fit_trig_polynomial(values, 2.0);
}

TrigPolynomial phase_restricted_objective(const ObjectiveEvaluator& ev, const CRowRef& xi,
                                          const CRowRef& xk, double alpha) {
  const double c = std::cos(alpha);
  const double s = std::sin(alpha);
  const auto angles = trig_fit_angles(1.0);
  std::array<std::array<Complex, 4>, kTrigFitSamples> mixes{};
  for (std::size_t j = 0; j < kTrigFitSamples; ++j) {
    const Complex rot = std::polar(1.0, angles[j]);
    mixes[j] = {c, s * rot, -s, c * rot};
  }
  std::array<double, kTrigFitSamples> values{};
  ev.pair_quartic(xi, xk, mixes, values);
  return fit_trig_polynomial(values, 1.0);
}

namespace {

void check_pair(std::size_t n, std::size_t i, std::size_t k) {
  if (k >= i || i >= n)
    throw IndexError("CA pair needs 0 <= k < i < N, got i=" + std::to_string(i) +
                     " k=" + std::to_string(k));
}

double fit_alpha_rows(const ObjectiveEvaluator& ev, const CRowRef& xi, const CRowRef& xk,
                      const MaximizeOptions& opts) {
  return maximize_trig(givens_restricted_objective(ev, xi, xk), kPi / 2, opts);
}

double fit_phase_rows(const ObjectiveEvaluator& ev, const CRowRef& xi, const CRowRef& xk,
                      double alpha, const MaximizeOptions& opts) {
  return maximize_trig(phase_restricted_objective(ev, xi, xk, alpha), kTwoPi, opts);
}

}  // namespace

double ca_fit_alpha(const ObjectiveEvaluator& ev, const UnitaryTransform& a, std::size_t i,
                    std::size_t k, const MaximizeOptions& opts) {
  check_pair(a.dim(), i, k);
  const CRowMatrix x = ev.lift(a.matrix());
  return fit_alpha_rows(ev, x.row(static_cast<Eigen::Index>(i)), x.row(static_cast<Eigen::Index>(k)),
                        opts);
}

std::pair<double, double> ca_fit_phases(const ObjectiveEvaluator& ev, const UnitaryTransform& a,
                                        std::size_t i, std::size_t k, double alpha,
                                        const MaximizeOptions& opts) {
  check_pair(a.dim(), i, k);
  const CRowMatrix x = ev.lift(a.matrix());
  return {0.0, fit_phase_rows(ev, x.row(static_cast<Eigen::Index>(i)),
                              x.row(static_cast<Eigen::Index>(k)), alpha, opts)};
}

LearnReport learn_ca(const ObjectiveEvaluator& ev, const LearnConfig& cfg) {
  validate(cfg);
  return learn_ca(ev, cfg, initial_transform(cfg, ev.dim()));
}

LearnReport learn_ca(const ObjectiveEvaluator& ev, const LearnConfig& cfg,
                     const UnitaryTransform& start) {
  validate(cfg);
  if (start.dim() != ev.dim()) throw DimensionError("initial transform dimension mismatch");
  const MaximizeOptions opts{cfg.grid_points, cfg.newton_steps};
  const std::size_t n = start.dim();
  LearnReport report;
  CMatrix a = start.matrix();
  double current = ev.objective(a);
  report.objective_trace.push_back(current);

  for (std::size_t sweep = 0; sweep < cfg.max_iterations; ++sweep) {
    CRowMatrix x = ev.lift(a);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      for (std::size_t i = k + 1; i < n; ++i) {
        const auto ri = static_cast<Eigen::Index>(i);
        const auto rk = static_cast<Eigen::Index>(k);
        const double alpha = fit_alpha_rows(ev, x.row(ri), x.row(rk), opts);
        if (alpha == 0.0) continue;  // identity is optimal; phases are then irrelevant
        const double phi = fit_phase_rows(ev, x.row(ri), x.row(rk), alpha, opts);
        const double before = ev.row_quartic(x.row(ri)) + ev.row_quartic(x.row(rk));
        if (phi != 0.0) {
          const Complex rot = std::polar(1.0, phi);
          a.row(rk) *= rot;
          x.row(rk) *= rot;
        }
        apply_givens_rows(a, {i, k, alpha});
        apply_givens_rows(x, {i, k, alpha});
        const double after = ev.row_quartic(x.row(ri)) + ev.row_quartic(x.row(rk));
        report.worst_pair_change = std::min(report.worst_pair_change, after - before);
      }
    }
    const double next = ev.objective(a);
    report.objective_trace.push_back(next);
    report.iterations_run = sweep + 1;
    const double gain = next - current;
    current = next;
    if (gain < cfg.convergence_tol) {
      report.converged = true;
      break;
    }
  }
  report.final_transform = UnitaryTransform(std::move(a));
  return report;
}

LearnReport learn(const ObjectiveEvaluator& ev, const LearnConfig& cfg) {
  return cfg.algorithm == Algorithm::Msp ? learn_msp(ev, cfg) : learn_ca(ev, cfg);
}

void write_report(std::ostream& os, const LearnReport& report, const LearnConfig& cfg) {
  const auto precision = os.precision(17);
  os << "algorithm=" << to_string(cfg.algorithm) << '\n'
     << "init=" << to_string(cfg.init) << '\n'
     << "seed=" << cfg.seed << '\n'
     << "max_iterations=" << cfg.max_iterations << '\n'
     << "convergence_tol=" << cfg.convergence_tol << '\n'
     << "dim=" << report.final_transform.dim() << '\n'
     << "iterations_run=" << report.iterations_run << '\n'
     << "converged=" << (report.converged ? "true" : "false") << '\n'
     << "initial_objective=" << report.objective_trace.front() << '\n'
     << "final_objective=" << report.objective_trace.back() << '\n';
  if (cfg.algorithm == Algorithm::Msp) {
    os << "stationarity_residual=" << report.stationarity_residual << '\n'
       << "degenerate_retries=" << report.degenerate_retries << '\n';
  } else {
    os << "grid_points=" << cfg.grid_points << '\n'
       << "newton_steps=" << cfg.newton_steps << '\n'
       << "worst_pair_change=" << report.worst_pair_change << '\n';
  }
  os.precision(precision);
}

void write_trace_csv(std::ostream& os, const LearnReport& report) {
  const auto precision = os.precision(17);
  os << "iteration,objective\n";
  for (std::size_t t = 0; t < report.objective_trace.size(); ++t)
    os << t << ',' << report.objective_trace[t] << '\n';
  os.precision(precision);
}

}  // namespace beamlearn
