#pragma once

#include "beamlearn/channel.hpp"
#include "beamlearn/linalg.hpp"

#include <array>
#include <optional>
#include <span>

namespace beamlearn {

using CRow = Eigen::RowVectorXcd;
using CRowRef = Eigen::Ref<const CRow>;

enum class EvaluatorMode { Empirical, ExactUniform };

/// Expected l4 objective g(A) = E ||A y||_4^4 and its conjugate Wirtinger
/// gradient dg/dA*.
///
/// Empirical mode integrates against a weighted SampleSet. ExactUniform mode
/// integrates the uniform single-path model in closed form: with
/// x_i(w) = sum_n A_in e^{jwn}, |x_i|^4 = |x_i^2|^2 and x_i^2 is the polynomial
/// whose coefficients are the self-convolution c_i of row i, so the average over
/// w is sum_s |c_i(s)|^2.
///
/// Learners work on a "lifted" row representation in which left-multiplying A
/// by a unitary mixes the lifted rows identically: A*Y for Empirical mode and A
/// itself for ExactUniform mode. row_quartic() and moment() evaluate
/// expectations directly on lifted rows.
class ObjectiveEvaluator {
 public:
  /// Throws ModeMismatchError unless the model is UniformSinglePath.
  static ObjectiveEvaluator exact(const ChannelModel& model);
  static ObjectiveEvaluator exact_uniform(std::size_t antennas);
  static ObjectiveEvaluator empirical(SampleSet set, unsigned threads = 1);
  /// Empirical models pass through; generative models are sampled with `count` draws.
  static ObjectiveEvaluator sampled(const ChannelModel& model, std::size_t count,
                                    std::uint64_t seed, unsigned threads = 1);

  EvaluatorMode mode() const noexcept { return mode_; }
  std::size_t dim() const noexcept { return dim_; }
  const ChannelModel& model() const noexcept { return model_; }
  /// Only valid in Empirical mode.
  const SampleSet& samples() const;

  /// A may be any M x N matrix (the finite-difference checks leave the unitary group).
  double objective(const CMatrix& a) const;
  CMatrix gradient(const CMatrix& a) const;

  CRowMatrix lift(const CMatrix& a) const;
  /// E |x|^4 for the lifted row x.
  double row_quartic(const CRowRef& row) const;
  /// E[ a b conj(c) conj(d) ] for lifted rows.
  Complex moment(const CRowRef& a, const CRowRef& b, const CRowRef& c, const CRowRef& d) const;
  /// For each mix m: out[m] = E|m[0] xi + m[1] xk|^4 + E|m[2] xi + m[3] xk|^4, i.e.
  /// the contribution of two lifted rows after a 2x2 mixing. Single pass over
  /// the samples in Empirical mode.
  void pair_quartic(const CRowRef& xi, const CRowRef& xk,
                    std::span<const std::array<Complex, 4>> mixes, std::span<double> out) const;
  /// sum_i row_quartic(lifted.row(i)); equals objective(A) when lifted = lift(A).
  double lifted_objective(const CRowMatrix& lifted) const;

 private:
  ObjectiveEvaluator(ChannelModel model, EvaluatorMode mode, std::size_t dim, unsigned threads);

  void check_dim(const CMatrix& a) const;

  ChannelModel model_;
  EvaluatorMode mode_;
  std::size_t dim_;
  unsigned threads_;
};

/// Full linear convolution (length a.size() + b.size() - 1).
CRow convolve(const CRowRef& a, const CRowRef& b);

}  // namespace beamlearn
