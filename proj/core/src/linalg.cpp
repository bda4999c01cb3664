#include "beamlearn/linalg.hpp"

#include "beamlearn/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace beamlearn {

bool all_finite(const CMatrix& m) {
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (!std::isfinite(m(r, c).real()) || !std::isfinite(m(r, c).imag())) return false;
  return true;
}

double unitarity_defect(const CMatrix& m) {
  const auto n = m.cols();
  return (m.adjoint() * m - CMatrix::Identity(n, n)).norm();
}

UnitaryTransform::UnitaryTransform(CMatrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols())
    throw DimensionError("unitary transform must be a non-empty square matrix, got " +
                         std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
  if (!all_finite(m_)) throw NotUnitaryError("unitary transform has non-finite entries");
  const double defect = unitarity_defect(m_);
  if (!(defect <= kUnitarityTol))
    throw NotUnitaryError("matrix is not unitary: ||A^H A - I||_F = " + std::to_string(defect));
}

UnitaryTransform UnitaryTransform::reprojected(const CMatrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw DimensionError("reprojection needs a non-empty square matrix");
  if (!all_finite(m)) throw NotUnitaryError("matrix has non-finite entries");
  const double defect = unitarity_defect(m);
  if (defect <= kUnitarityTol) return UnitaryTransform(m, Unchecked{});
  if (!(defect <= kReprojectTol))
    throw NotUnitaryError("unitarity drift " + std::to_string(defect) + " exceeds repair limit");
  return project_unitary(m);
}

UnitaryTransform UnitaryTransform::identity(std::size_t n) {
  if (n == 0) throw DimensionError("identity of dimension 0");
  const auto en = static_cast<Eigen::Index>(n);
  return UnitaryTransform(CMatrix::Identity(en, en), Unchecked{});
}

UnitaryTransform UnitaryTransform::operator*(const UnitaryTransform& rhs) const {
  if (dim() != rhs.dim()) throw DimensionError("unitary product dimension mismatch");
  return reprojected(m_ * rhs.m_);
}

UnitaryTransform UnitaryTransform::adjoint() const {
  return UnitaryTransform(m_.adjoint(), Unchecked{});
}

UnitaryTransform dft_matrix(std::size_t n) {
  if (n == 0) throw DimensionError("DFT dimension must be >= 1");
  const auto en = static_cast<Eigen::Index>(n);
  CMatrix f(en, en);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      // reduce i*k mod n first so the angle stays small and exact for large n
      const double angle = -kTwoPi * static_cast<double>((i * k) % n) / static_cast<double>(n);
      f(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = std::polar(scale, angle);
    }
  return UnitaryTransform(std::move(f));
}

double l4_norm(const CMatrix& m) {
  double sum = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double p = std::norm(m(r, c));
      sum += p * p;
    }
  return sum;
}

namespace {

void check_givens(const GivensRotation& g, std::size_t n) {
  if (g.i <= g.k || g.i >= n)
    throw IndexError("givens rotation needs 0 <= k < i < N, got i=" + std::to_string(g.i) +
                     " k=" + std::to_string(g.k) + " N=" + std::to_string(n));
}

}  // namespace

UnitaryTransform givens_matrix(const GivensRotation& g, std::size_t n) {
  check_givens(g, n);
  auto m = UnitaryTransform::identity(n).matrix();
  apply_givens_rows(m, g);
  return UnitaryTransform(std::move(m));
}

namespace {

template <typename M>
void rotate_rows(M& m, const GivensRotation& g) {
  check_givens(g, static_cast<std::size_t>(m.rows()));
  const double c = std::cos(g.alpha);
  const double s = std::sin(g.alpha);
  const auto i = static_cast<Eigen::Index>(g.i);
  const auto k = static_cast<Eigen::Index>(g.k);
  for (Eigen::Index col = 0; col < m.cols(); ++col) {
    const Complex xi = m(i, col);
    const Complex xk = m(k, col);
    m(i, col) = c * xi + s * xk;
    m(k, col) = -s * xi + c * xk;
  }
}

}  // namespace

void apply_givens_rows(CMatrix& m, const GivensRotation& g) { rotate_rows(m, g); }

void apply_givens_rows(CRowMatrix& m, const GivensRotation& g) { rotate_rows(m, g); }

UnitaryTransform phase_matrix(const PhaseRotation& r, std::size_t n) {
  if (r.k >= n)
    throw IndexError("phase rotation row " + std::to_string(r.k) + " out of range for N=" +
                     std::to_string(n));
  auto m = UnitaryTransform::identity(n).matrix();
  const auto k = static_cast<Eigen::Index>(r.k);
  m(k, k) = std::polar(1.0, r.beta);
  return UnitaryTransform(std::move(m));
}

UnitaryTransform project_unitary(const CMatrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols())
    throw DimensionError("unitary projection needs a non-empty square matrix");
  if (!all_finite(m)) throw SingularInputError("projection input has non-finite entries");
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smax > 0.0) || smin <= 1e-12 * smax)
    throw SingularInputError("projection input is rank deficient (sigma_min/sigma_max = " +
                             std::to_string(smax > 0.0 ? smin / smax : 0.0) + ")");
  return UnitaryTransform(svd.matrixU() * svd.matrixV().adjoint());
}

double permutation_alignment_score(const UnitaryTransform& a, const UnitaryTransform& b) {
  if (a.dim() != b.dim()) throw DimensionError("alignment score dimension mismatch");
  const Eigen::MatrixXd mag = (a.matrix() * b.matrix().adjoint()).cwiseAbs();
  const auto n = mag.rows();
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    Eigen::Index best = -1;
    for (Eigen::Index c = 0; c < n; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      if (best < 0 || mag(r, c) > mag(r, best)) best = c;
    }
    used[static_cast<std::size_t>(best)] = true;
    total += mag(r, best);
  }
  return total / static_cast<double>(n);
}

CMatrix complex_gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                         double variance) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  CMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      m(r, c) = Complex(re, im);
    }
  return m;
}

UnitaryTransform random_unitary(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw DimensionError("random unitary of dimension 0");
  const CMatrix z = complex_gaussian(n, n, rng);
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix the phase ambiguity of QR so the distribution is Haar
  for (Eigen::Index k = 0; k < q.cols(); ++k) {
    const Complex d = r(k, k);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(k) *= d / mag;
  }
  return UnitaryTransform::reprojected(q);
}

UnitaryTransform random_complex_permutation(std::size_t n, std::mt19937_64& rng) {
  if (n == 0) throw DimensionError("permutation of dimension 0");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::uniform_real_distribution<double> phase(0.0, kTwoPi);
  const auto en = static_cast<Eigen::Index>(n);
  CMatrix c = CMatrix::Zero(en, en);
  for (std::size_t r = 0; r < n; ++r)
    c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(perm[r])) =
        std::polar(1.0, phase(rng));
  return UnitaryTransform(std::move(c));
}

}  // namespace beamlearn
