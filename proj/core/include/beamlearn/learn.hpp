#pragma once

#include "beamlearn/linalg.hpp"
#include "beamlearn/objective.hpp"
#include "beamlearn/trig_fit.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace beamlearn {

enum class Algorithm { Msp, Ca };

enum class InitKind { Dft, Identity, RandomUnitary, FromFile };

struct LearnConfig {
  Algorithm algorithm = Algorithm::Msp;
  std::size_t max_iterations = 200;
  double convergence_tol = 1e-8;
  std::uint64_t seed = 0;
  InitKind init = InitKind::Dft;
  std::filesystem::path init_path;  // used by InitKind::FromFile
  std::size_t grid_points = 64;     // CA inner maximization
  std::size_t newton_steps = 4;
};

/// Throws ConfigError for max_iterations == 0, tol <= 0 or grid_points < 9.
void validate(const LearnConfig& cfg);

/// Starting transform for `cfg.init` (files go through UnitaryTransform::reprojected).
UnitaryTransform initial_transform(const LearnConfig& cfg, std::size_t dim);

struct LearnReport {
  UnitaryTransform final_transform = UnitaryTransform::identity(1);
  /// Objective at the start and after every MSP iteration / CA sweep.
  std::vector<double> objective_trace;
  std::size_t iterations_run = 0;
  bool converged = false;
  /// MSP: ||skew(grad * A^H)||_F relative to the mean diagonal of grad * A^H at
  /// the final iterate. Zero exactly at MSP fixed points.
  double stationarity_residual = 0.0;
  /// CA: most negative objective change of a single pair update (0 if none).
  double worst_pair_change = 0.0;
  std::size_t degenerate_retries = 0;
};

/// One MSP iteration: project the gradient onto the unitary group.
/// Throws DegenerateGradientError (carrying `iteration`) on a rank-deficient gradient.
UnitaryTransform msp_step(const ObjectiveEvaluator& ev, const UnitaryTransform& a,
                          std::size_t iteration = 0);

/// ||skew(grad A^H)||_F / mean(Re diag(grad A^H)).
double msp_fixed_point_residual(const ObjectiveEvaluator& ev, const UnitaryTransform& a);

/// Iterates msp_step until ||A_{t+1} - A_t||_F < tol or max_iterations. A
/// degenerate gradient is retried up to 3 times after perturbing A_t with a
/// random Givens rotation of angle 1e-3.
LearnReport learn_msp(const ObjectiveEvaluator& ev, const LearnConfig& cfg);
LearnReport learn_msp(const ObjectiveEvaluator& ev, const LearnConfig& cfg,
                      const UnitaryTransform& start);

/// Restricted objective h(alpha) = E(|cos a xi + sin a xk|^4 + |-sin a xi + cos a xk|^4)
/// of the lifted rows xi, xk (rows i and k of ev.lift(A)), fitted exactly.
TrigPolynomial givens_restricted_objective(const ObjectiveEvaluator& ev, const CRowRef& xi,
                                           const CRowRef& xk);
/// Same with a relative phase phi on row k: rows cos a xi + sin a e^{j phi} xk and
/// -sin a xi + cos a e^{j phi} xk, as a trig polynomial in phi.
TrigPolynomial phase_restricted_objective(const ObjectiveEvaluator& ev, const CRowRef& xi,
                                          const CRowRef& xk, double alpha);

/// argmax over [0, pi/2) of the Givens-restricted objective on rows (i, k), i > k.
double ca_fit_alpha(const ObjectiveEvaluator& ev, const UnitaryTransform& a, std::size_t i,
                    std::size_t k, const MaximizeOptions& opts = {});
/// Returns (beta_i, beta_k) = (0, phi*) maximizing over the relative phase.
std::pair<double, double> ca_fit_phases(const ObjectiveEvaluator& ev, const UnitaryTransform& a,
                                        std::size_t i, std::size_t k, double alpha,
                                        const MaximizeOptions& opts = {});

/// Coordinate ascent: sweeps over pairs (k ascending, then i > k ascending),
/// applying A <- G(i,k,alpha) R(i,beta_i) R(k,beta_k) A per pair, until a full
/// sweep improves the objective by less than tol or max_iterations sweeps.
LearnReport learn_ca(const ObjectiveEvaluator& ev, const LearnConfig& cfg);
LearnReport learn_ca(const ObjectiveEvaluator& ev, const LearnConfig& cfg,
                     const UnitaryTransform& start);

/// Dispatches on cfg.algorithm.
LearnReport learn(const ObjectiveEvaluator& ev, const LearnConfig& cfg);

/// Flat "key=value" report and a CSV objective trace ("iteration,objective").
void write_report(std::ostream& os, const LearnReport& report, const LearnConfig& cfg);
void write_trace_csv(std::ostream& os, const LearnReport& report);

const char* to_string(Algorithm a);
const char* to_string(InitKind k);

}  // namespace beamlearn
