#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <random>

namespace beamlearn {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
/// Row-major storage for matrices that are processed row by row.
using CRowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Tolerance on ||A^H A - I||_F accepted when a UnitaryTransform is constructed.
inline constexpr double kUnitarityTol = 1e-9;
/// Largest drift that UnitaryTransform::reprojected() repairs instead of rejecting.
inline constexpr double kReprojectTol = 1e-6;

bool all_finite(const CMatrix& m);

/// ||M^H M - I||_F for a square matrix.
double unitarity_defect(const CMatrix& m);

/// Square complex matrix that satisfies the unitarity invariant.
///
/// The invariant is checked once at construction; afterwards the object is
/// immutable, so sharing across threads is safe.
class UnitaryTransform {
 public:
  /// Throws DimensionError if M is empty or not square, NotUnitaryError if it
  /// has non-finite entries or ||M^H M - I||_F > kUnitarityTol.
  explicit UnitaryTransform(CMatrix m);

  /// Accepts drift up to kReprojectTol and snaps it back onto the unitary group.
  static UnitaryTransform reprojected(const CMatrix& m);

  static UnitaryTransform identity(std::size_t n);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const noexcept { return m_; }
  operator const CMatrix&() const noexcept { return m_; }

  UnitaryTransform operator*(const UnitaryTransform& rhs) const;
  UnitaryTransform adjoint() const;

 private:
  struct Unchecked {};
  UnitaryTransform(CMatrix m, Unchecked) : m_(std::move(m)) {}

  CMatrix m_;
};

/// Real Givens rotation on the (i, k) coordinate plane, i > k.
struct GivensRotation {
  std::size_t i = 1;
  std::size_t k = 0;
  double alpha = 0.0;
};

/// Diagonal phase shift exp(j*beta) on row k.
struct PhaseRotation {
  std::size_t k = 0;
  double beta = 0.0;
};

/// Unitary DFT matrix, entry (i,k) = exp(-j 2 pi i k / n) / sqrt(n).
UnitaryTransform dft_matrix(std::size_t n);

/// Sum of |M_ik|^4 (no fourth root).
double l4_norm(const CMatrix& m);

/// G_ii = G_kk = cos(alpha), G_ik = -G_ki = sin(alpha).
UnitaryTransform givens_matrix(const GivensRotation& g, std::size_t n);
UnitaryTransform phase_matrix(const PhaseRotation& r, std::size_t n);

/// In-place G(i,k,alpha) * M, touching rows i and k only.
void apply_givens_rows(CMatrix& m, const GivensRotation& g);
void apply_givens_rows(CRowMatrix& m, const GivensRotation& g);

/// Nearest unitary matrix in Frobenius norm (the polar factor U V^H).
/// Throws SingularInputError when sigma_min <= 1e-12 * sigma_max.
UnitaryTransform project_unitary(const CMatrix& m);

/// Greedy row-to-column matching score of |A B^H|; 1 iff A = C B for a
/// complex permutation C.
double permutation_alignment_score(const UnitaryTransform& a, const UnitaryTransform& b);

/// Haar-distributed random unitary matrix.
UnitaryTransform random_unitary(std::size_t n, std::mt19937_64& rng);

/// Random row permutation with random unit-modulus phases.
UnitaryTransform random_complex_permutation(std::size_t n, std::mt19937_64& rng);

/// Matrix of i.i.d. CN(0, variance) entries.
CMatrix complex_gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                         double variance = 1.0);

}  // namespace beamlearn
