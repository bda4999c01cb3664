#include "beamlearn/objective.hpp"

#include "beamlearn/errors.hpp"
#include "beamlearn/parallel.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <string>
#include <vector>

namespace beamlearn {

namespace {

// Fixed reduction block: partial sums are formed per block and combined in
// block order, so results do not depend on the worker count.
constexpr Eigen::Index kBlock = 1024;

std::size_t fft_length(std::size_t min_len) {
  std::size_t n = 1;
  while (n < min_len) n <<= 1;
  return n;
}

}  // namespace

ObjectiveEvaluator::ObjectiveEvaluator(ChannelModel model, EvaluatorMode mode, std::size_t dim,
                                       unsigned threads)
    : model_(std::move(model)), mode_(mode), dim_(dim), threads_(threads) {}

ObjectiveEvaluator ObjectiveEvaluator::exact(const ChannelModel& model) {
  const auto* u = std::get_if<UniformSinglePath>(&model);
  if (!u) throw ModeMismatchError("exact integration is only available for the uniform single-path model");
  return exact_uniform(u->antennas);
}

ObjectiveEvaluator ObjectiveEvaluator::exact_uniform(std::size_t antennas) {
  if (antennas == 0) throw DimensionError("evaluator dimension must be >= 1");
  return ObjectiveEvaluator(UniformSinglePath{antennas}, EvaluatorMode::ExactUniform, antennas, 1);
}

ObjectiveEvaluator ObjectiveEvaluator::empirical(SampleSet set, unsigned threads) {
  const auto n = set.dim();
  return ObjectiveEvaluator(Empirical{std::move(set)}, EvaluatorMode::Empirical, n, threads);
}

ObjectiveEvaluator ObjectiveEvaluator::sampled(const ChannelModel& model, std::size_t count,
                                               std::uint64_t seed, unsigned threads) {
  return empirical(sample(model, count, seed, threads), threads);
}

const SampleSet& ObjectiveEvaluator::samples() const {
  const auto* e = std::get_if<Empirical>(&model_);
  if (mode_ != EvaluatorMode::Empirical || !e)
    throw ModeMismatchError("evaluator has no sample set in exact mode");
  return e->set;
}

void ObjectiveEvaluator::check_dim(const CMatrix& a) const {
  if (static_cast<std::size_t>(a.cols()) != dim_ || a.rows() == 0)
    throw DimensionError("transform has " + std::to_string(a.cols()) +
                         " columns, evaluator dimension is " + std::to_string(dim_));
}

CRow convolve(const CRowRef& a, const CRowRef& b) {
  CRow out = CRow::Zero(a.size() + b.size() - 1);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out(i + j) += a(i) * b(j);
  return out;
}

double ObjectiveEvaluator::objective(const CMatrix& a) const {
  check_dim(a);
  if (mode_ == EvaluatorMode::ExactUniform) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) total += convolve(a.row(i), a.row(i)).squaredNorm();
    return total;
  }
  const auto& set = samples();
  const auto s = static_cast<Eigen::Index>(set.size());
  const auto blocks = static_cast<std::size_t>((s + kBlock - 1) / kBlock);
  std::vector<double> partial(blocks, 0.0);
  parallel_for(blocks, threads_, [&](std::size_t b) {
    const Eigen::Index begin = static_cast<Eigen::Index>(b) * kBlock;
    const Eigen::Index len = std::min(kBlock, s - begin);
    const CMatrix x = a * set.samples().middleCols(begin, len);
    const Eigen::MatrixXd p2 = x.cwiseAbs2();
    const Eigen::RowVectorXd per_sample = p2.cwiseProduct(p2).colwise().sum();
    partial[b] = per_sample.dot(set.weights().segment(begin, len).transpose());
  });
  double total = 0.0;
  for (const double p : partial) total += p;
  return total;
}

CMatrix ObjectiveEvaluator::gradient(const CMatrix& a) const {
  check_dim(a);
  const auto n = static_cast<Eigen::Index>(dim_);
  if (mode_ == EvaluatorMode::ExactUniform) {
    // grad_ik = 2 sum_{l - m + n = k} A_il conj(A_im) A_in = 2 sum_m conj(A_im) c_i(k + m)
    const std::size_t len = fft_length(std::max<std::size_t>(2 * dim_ - 1, 2));
    Eigen::FFT<double> fft;
    std::vector<Complex> row(len), spec_a(len), spec_c(len), corr(len);
    CMatrix g(a.rows(), n);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      std::fill(row.begin(), row.end(), Complex{});
      for (Eigen::Index k = 0; k < n; ++k) row[static_cast<std::size_t>(k)] = a(i, k);
      fft.fwd(spec_a, row);
      for (std::size_t f = 0; f < len; ++f) spec_c[f] = spec_a[f] * spec_a[f];
      // cross-correlation of c_i with row i: multiply by the conjugate spectrum
      for (std::size_t f = 0; f < len; ++f) spec_c[f] *= std::conj(spec_a[f]);
      fft.inv(corr, spec_c);
      for (Eigen::Index k = 0; k < n; ++k) g(i, k) = 2.0 * corr[static_cast<std::size_t>(k)];
    }
    return g;
  }
  const auto& set = samples();
  const auto s = static_cast<Eigen::Index>(set.size());
  const auto blocks = static_cast<std::size_t>((s + kBlock - 1) / kBlock);
  std::vector<CMatrix> partial(blocks);
  parallel_for(blocks, threads_, [&](std::size_t b) {
    const Eigen::Index begin = static_cast<Eigen::Index>(b) * kBlock;
    const Eigen::Index len = std::min(kBlock, s - begin);
    const auto y = set.samples().middleCols(begin, len);
    CMatrix z = a * y;
    for (Eigen::Index c = 0; c < len; ++c) {
      const double w = 2.0 * set.weights()(begin + c);
      for (Eigen::Index r = 0; r < z.rows(); ++r) z(r, c) *= w * std::norm(z(r, c));
    }
    partial[b] = z * y.adjoint();
  });
  CMatrix g = CMatrix::Zero(a.rows(), n);
  for (const auto& p : partial) g += p;
  return g;
}

CRowMatrix ObjectiveEvaluator::lift(const CMatrix& a) const {
  check_dim(a);
  if (mode_ == EvaluatorMode::ExactUniform) return a;
  return a * samples().samples();
}

double ObjectiveEvaluator::row_quartic(const CRowRef& row) const {
  if (mode_ == EvaluatorMode::ExactUniform) return convolve(row, row).squaredNorm();
  const auto& w = samples().weights();
  if (row.size() != w.size()) throw DimensionError("lifted row length does not match sample count");
  double total = 0.0;
  for (Eigen::Index s = 0; s < row.size(); ++s) {
    const double p = std::norm(row(s));
    total += w(s) * p * p;
  }
  return total;
}

Complex ObjectiveEvaluator::moment(const CRowRef& a, const CRowRef& b, const CRowRef& c,
                                   const CRowRef& d) const {
  if (mode_ == EvaluatorMode::ExactUniform) {
    const CRow ab = convolve(a, b);
    const CRow cd = convolve(c, d);
    Complex total{};
    for (Eigen::Index s = 0; s < ab.size(); ++s) total += ab(s) * std::conj(cd(s));
    return total;
  }
  const auto& w = samples().weights();
  Complex total{};
  for (Eigen::Index s = 0; s < a.size(); ++s)
    total += w(s) * a(s) * b(s) * std::conj(c(s)) * std::conj(d(s));
  return total;
}

void ObjectiveEvaluator::pair_quartic(const CRowRef& xi, const CRowRef& xk,
                                      std::span<const std::array<Complex, 4>> mixes,
                                      std::span<double> out) const {
  if (out.size() != mixes.size()) throw DimensionError("pair_quartic output size mismatch");
  if (xi.size() != xk.size()) throw DimensionError("pair_quartic rows differ in length");
  if (mode_ == EvaluatorMode::ExactUniform) {
    for (std::size_t m = 0; m < mixes.size(); ++m) {
      const auto& c = mixes[m];
      out[m] = row_quartic(c[0] * xi + c[1] * xk) + row_quartic(c[2] * xi + c[3] * xk);
    }
    return;
  }
  const auto& w = samples().weights();
  if (xi.size() != w.size()) throw DimensionError("lifted row length does not match sample count");
  // |p a + q b|^2 = g . f with f = (|a|^2, |b|^2, Re z, Im z), z = conj(a) b and
  // g = (|p|^2, |q|^2, 2 Re u, -2 Im u), u = conj(p) q. Hence E|p a + q b|^4 = g^T M g
  // with the 4x4 second-moment matrix M = E[f f^T].
  const auto len = xi.size();
  Eigen::MatrixXd f(len, 4);
  f.col(0) = xi.transpose().cwiseAbs2();
  f.col(1) = xk.transpose().cwiseAbs2();
  const Eigen::ArrayXcd z = xi.transpose().array().conjugate() * xk.transpose().array();
  f.col(2) = z.real().matrix();
  f.col(3) = z.imag().matrix();
  const Eigen::Matrix4d moments = f.transpose() * (w.asDiagonal() * f);
  const auto form = [&](Complex p, Complex q) {
    const Complex u = std::conj(p) * q;
    const Eigen::Vector4d g(std::norm(p), std::norm(q), 2.0 * u.real(), -2.0 * u.imag());
    return g.dot(moments * g);
  };
  for (std::size_t m = 0; m < mixes.size(); ++m) {
    const auto& c = mixes[m];
    out[m] = form(c[0], c[1]) + form(c[2], c[3]);
  }
}

double ObjectiveEvaluator::lifted_objective(const CRowMatrix& lifted) const {
  double total = 0.0;
  for (Eigen::Index i = 0; i < lifted.rows(); ++i) total += row_quartic(lifted.row(i));
  return total;
}

}  // namespace beamlearn
