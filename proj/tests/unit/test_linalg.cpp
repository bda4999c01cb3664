#include "helpers.hpp"

#include "beamlearn/errors.hpp"
#include "beamlearn/linalg.hpp"

using namespace beamlearn;
using testing::max_abs_diff;

TEST_SUITE("linalg") {

TEST_CASE("dft matrix is unitary with the expected entries") {
  for (std::size_t n : {1u, 2u, 3u, 8u, 64u}) {
    const auto f = dft_matrix(n);
    CHECK(unitarity_defect(f.matrix()) < 1e-12);
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const Complex want = std::polar(s, -kTwoPi * double(i * k) / double(n));
        CHECK(std::abs(f.matrix()(i, k) - want) < 1e-13);
      }
  }
  CHECK_THROWS_AS(dft_matrix(0), DimensionError);
}

TEST_CASE("B=2 dft is the normalized Hadamard matrix") {
  const auto f = dft_matrix(2).matrix();
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(f(0, 0) - s) < 1e-15);
  CHECK(std::abs(f(1, 1) + s) < 1e-15);
}

TEST_CASE("unitary transform rejects non-unitary input") {
  CMatrix m = CMatrix::Identity(3, 3);
  m(0, 0) = 1.001;
  CHECK_THROWS_AS(UnitaryTransform{m}, NotUnitaryError);
  CHECK_THROWS_AS(UnitaryTransform{CMatrix(2, 3)}, DimensionError);
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(UnitaryTransform{m}, NotUnitaryError);
}

TEST_CASE("reprojection repairs small drift only") {
  auto rng = std::mt19937_64(3);
  const auto q = random_unitary(6, rng);
  CMatrix drift = q.matrix();
  drift(2, 3) += 1e-8;
  const auto repaired = UnitaryTransform::reprojected(drift);
  CHECK(unitarity_defect(repaired.matrix()) < 1e-12);
  CHECK(max_abs_diff(repaired.matrix(), q.matrix()) < 1e-7);
  drift(2, 3) += 1e-3;
  CHECK_THROWS_AS(UnitaryTransform::reprojected(drift), NotUnitaryError);
}

TEST_CASE("givens matrix layout and row update agree") {
  const GivensRotation g{3, 1, 0.3};
  const auto gm = givens_matrix(g, 5).matrix();
  CHECK(gm(3, 3).real() == doctest::Approx(std::cos(0.3)));
  CHECK(gm(1, 1).real() == doctest::Approx(std::cos(0.3)));
  CHECK(gm(3, 1).real() == doctest::Approx(std::sin(0.3)));
  CHECK(gm(1, 3).real() == doctest::Approx(-std::sin(0.3)));
  CHECK(gm(0, 0).real() == 1.0);

  auto rng = std::mt19937_64(9);
  CMatrix m = complex_gaussian(5, 7, rng);
  const CMatrix want = gm * m;
  apply_givens_rows(m, g);
  CHECK(max_abs_diff(m, want) < 1e-14);

  CRowMatrix r = complex_gaussian(5, 4, rng);
  const CMatrix want_r = gm * CMatrix(r);
  apply_givens_rows(r, g);
  CHECK(max_abs_diff(CMatrix(r), want_r) < 1e-14);
}

TEST_CASE("givens rotation index validation") {
  CMatrix m = CMatrix::Identity(4, 4);
  CHECK_THROWS_AS(apply_givens_rows(m, {1, 1, 0.1}), IndexError);
  CHECK_THROWS_AS(apply_givens_rows(m, {1, 2, 0.1}), IndexError);
  CHECK_THROWS_AS(apply_givens_rows(m, {4, 0, 0.1}), IndexError);
  CHECK_THROWS_AS(phase_matrix({4, 0.1}, 4), IndexError);
}

TEST_CASE("phase matrix is a unit-modulus diagonal") {
  const auto p = phase_matrix({2, 0.7}, 3).matrix();
  CHECK(std::abs(p(2, 2) - std::polar(1.0, 0.7)) < 1e-15);
  CHECK(p(0, 0) == Complex(1.0));
}

TEST_CASE("unitary projection") {
  auto rng = std::mt19937_64(1);
  const auto q = random_unitary(8, rng);
  SUBCASE("a unitary matrix projects to itself") {
    CHECK(max_abs_diff(project_unitary(q.matrix()).matrix(), q.matrix()) < 1e-12);
  }
  SUBCASE("positive definite scaling is removed") {
    Eigen::VectorXd d(8);
    d << 1, 2, 3, 4, 5, 6, 7, 8;
    const CMatrix m = d.cast<Complex>().asDiagonal() * q.matrix();
    CHECK(max_abs_diff(project_unitary(m).matrix(), q.matrix()) < 1e-12);
  }
  SUBCASE("nearest unitary beats other unitaries") {
    const CMatrix m = complex_gaussian(8, 8, rng);
    const auto p = project_unitary(m);
    const double best = (m - p.matrix()).norm();
    for (int t = 0; t < 20; ++t) CHECK(best <= (m - random_unitary(8, rng).matrix()).norm());
  }
  SUBCASE("rank deficient input") {
    CMatrix m = complex_gaussian(4, 4, rng);
    m.row(3) = m.row(0);
    CHECK_THROWS_AS(project_unitary(m), SingularInputError);
    CHECK_THROWS_AS(project_unitary(CMatrix::Zero(3, 3)), SingularInputError);
  }
}

TEST_CASE("l4 norm") {
  CMatrix m(1, 2);
  m << Complex(1, 1), Complex(0, 2);
  CHECK(l4_norm(m) == doctest::Approx(4.0 + 16.0));
}

TEST_CASE("alignment score is one on the complex permutation class") {
  auto rng = std::mt19937_64(4);
  const auto q = random_unitary(10, rng);
  const auto c = random_complex_permutation(10, rng);
  CHECK(permutation_alignment_score(c * q, q) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(permutation_alignment_score(random_unitary(10, rng), q) < 0.9);
}

TEST_CASE("random unitary is unitary and seed-deterministic") {
  auto a = std::mt19937_64(5);
  auto b = std::mt19937_64(5);
  const auto qa = random_unitary(12, a);
  CHECK(unitarity_defect(qa.matrix()) < 1e-12);
  CHECK(max_abs_diff(qa.matrix(), random_unitary(12, b).matrix()) == 0.0);
}

TEST_CASE("complex gaussian has the requested variance") {
  auto rng = std::mt19937_64(6);
  const CMatrix z = complex_gaussian(200, 500, rng, 2.5);
  CHECK(z.cwiseAbs2().mean() == doctest::Approx(2.5).epsilon(0.02));
  CHECK(std::abs(z.mean()) < 0.02);
}

}
