#include "floquet/matrix_core.hpp"

#include <numbers>

#include "doctest.h"
#include "floquet/spin_model.hpp"
#include "test_util.hpp"

using namespace floquet;
using floquet::testing::random_hermitian;
using floquet::testing::random_unitary;

namespace {
constexpr double kPi = std::numbers::pi;

Matrix diag3(Complex a, Complex b, Complex c) {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}
}  // namespace

TEST_CASE("herm_eig clusters the degenerate invariant of the spin model") {
  // I(0) with lambda = +1 on {|+>, |0>} and -1 on |->
  const HermitianOperator i0(diag3(1.0, 1.0, -1.0));
  const SpectralDecomposition sd = herm_eig(i0);
  REQUIRE(sd.clusters.size() == 2);
  CHECK(sd.clusters[0].eigenvalue == doctest::Approx(1.0));
  CHECK(sd.clusters[0].multiplicity == 2);
  CHECK(sd.clusters[1].eigenvalue == doctest::Approx(-1.0));
  CHECK(sd.clusters[1].multiplicity == 1);
  CHECK((sd.reconstruct() - i0.mat()).norm() < 1e-10);
}

TEST_CASE("herm_eig on the zero matrix gives one full cluster") {
  const HermitianOperator zero(Matrix::Zero(2, 2));
  const SpectralDecomposition sd = herm_eig(zero);
  REQUIRE(sd.clusters.size() == 1);
  CHECK(sd.clusters[0].eigenvalue == doctest::Approx(0.0));
  CHECK(sd.clusters[0].multiplicity == 2);
}

TEST_CASE("herm_eig resolves the spin-1 J3 spectrum") {
  const SpectralDecomposition sd = herm_eig(spin_generators(1.0).j3);
  REQUIRE(sd.clusters.size() == 3);
  CHECK(sd.eigenvalues() == std::vector<double>{1.0, 0.0, -1.0});
  CHECK(sd.multiplicities() == std::vector<int>{1, 1, 1});
}

TEST_CASE("herm_eig projectors are an orthogonal resolution of the identity") {
  std::mt19937 rng(991);
  for (int trial = 0; trial < 8; ++trial) {
    const HermitianOperator a = random_hermitian(4, rng);
    const SpectralDecomposition sd = herm_eig(a);
    Matrix sum = Matrix::Zero(4, 4);
    for (size_t n = 0; n < sd.clusters.size(); ++n) {
      const Matrix p = sd.clusters[n].projector();
      CHECK((p * p - p).norm() < 1e-10);
      CHECK(hermiticity_defect(p) < 1e-10);
      for (size_t m = n + 1; m < sd.clusters.size(); ++m) {
        CHECK((p * sd.clusters[m].projector()).norm() < 1e-10);
      }
      sum += p;
    }
    CHECK((sum - Matrix::Identity(4, 4)).norm() < 1e-10);
    CHECK((sd.reconstruct() - a.mat()).norm() < 1e-10);
  }
}

TEST_CASE("herm_eig rejects a chained cluster wider than cluster_tol") {
  Matrix a = Matrix::Zero(3, 3);
  a(1, 1) = 6e-9;
  a(2, 2) = 1.2e-8;  // pairwise gaps below 1e-8 but total spread above
  CHECK_THROWS_WITH_AS(herm_eig(HermitianOperator(a), 1e-8),
                       doctest::Contains("ambiguous"), ValidationError);
}

TEST_CASE("non-Hermitian input is rejected with the measured asymmetry") {
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  CHECK_THROWS_WITH_AS(HermitianOperator{bad},
                       doctest::Contains("asymmetry"), ValidationError);
}

TEST_CASE("unitary_exp basics") {
  const auto& gens = spin_generators(1.0);
  CHECK((unitary_exp(gens.j1, 0.0).mat() - Matrix::Identity(3, 3)).norm() <
        1e-14);
  CHECK((unitary_exp(gens.j3, kPi).mat() - diag3(-1.0, 1.0, -1.0)).norm() <
        1e-12);
}

TEST_CASE("unitary_exp of J1 over a full turn is the identity") {
  // independent oracle: J1 must carry integer eigenvalues {1, 0, -1}
  const auto& gens = spin_generators(1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(gens.j1.mat());
  CHECK(solver.eigenvalues()(0) == doctest::Approx(-1.0));
  CHECK(solver.eigenvalues()(1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(solver.eigenvalues()(2) == doctest::Approx(1.0));
  CHECK((unitary_exp(gens.j1, 2.0 * kPi).mat() - Matrix::Identity(3, 3))
            .norm() < 1e-12);
}

TEST_CASE("unitary_exp composes additively in s") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 8; ++trial) {
    const HermitianOperator a = random_hermitian(3, rng);
    const double s = dist(rng), t = dist(rng);
    const Matrix lhs = unitary_exp(a, s).mat() * unitary_exp(a, t).mat();
    CHECK((lhs - unitary_exp(a, s + t).mat()).norm() < 1e-10);
  }
}

TEST_CASE("unitary_log basics") {
  CHECK(unitary_log(UnitaryOperator::identity(3)).mat().norm() < 1e-12);

  const Matrix u = diag3(std::polar(1.0, 0.8 * kPi), 1.0,
                         std::polar(1.0, -0.8 * kPi));
  const Matrix k = unitary_log(UnitaryOperator(u)).mat();
  CHECK((k - diag3(0.8 * kPi, 0.0, -0.8 * kPi)).norm() < 1e-12);
}

TEST_CASE("unitary_log recovers omega*T J3 from the analytic U(T)") {
  const auto& gens = spin_generators(1.0);
  const UnitaryOperator uT = unitary_exp(gens.j3, 0.8 * kPi);
  const Matrix k = unitary_log(uT).mat();
  CHECK((k - 0.8 * kPi * gens.j3.mat()).norm() < 1e-12);
}

TEST_CASE("unitary_log flags the branch boundary") {
  CHECK_THROWS_AS(unitary_log(UnitaryOperator(diag3(-1.0, 1.0, 1.0))),
                  BranchBoundaryError);
}

TEST_CASE("unitary_log inverts unitary_exp inside the principal zone") {
  std::mt19937 rng(777);
  for (int trial = 0; trial < 8; ++trial) {
    // scale so all eigenvalues stay well inside (-pi, pi)
    HermitianOperator a = random_hermitian(3, rng);
    const Matrix scaled = a.mat() * (2.0 / std::max(1.0, a.mat().norm()));
    const HermitianOperator safe{scaled};
    const Matrix k = unitary_log(unitary_exp(safe, 1.0)).mat();
    CHECK((k - safe.mat()).norm() < 1e-9);
  }
}

TEST_CASE("polar_unitary basics") {
  std::mt19937 rng(4242);
  const UnitaryOperator u = random_unitary(3, rng);
  CHECK((polar_unitary(u.mat()).mat() - u.mat()).norm() < 1e-12);

  CHECK((polar_unitary(2.0 * Matrix::Identity(3, 3)).mat() -
         Matrix::Identity(3, 3))
            .norm() < 1e-12);

  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = Complex(1.0, 1.0);
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 0) = 1.0;
  expected(1, 1) = std::polar(1.0, kPi / 4.0);
  CHECK((polar_unitary(d).mat() - expected).norm() < 1e-12);
}

TEST_CASE("polar_unitary rejects singular input") {
  Matrix s = Matrix::Zero(2, 2);
  s(0, 0) = 1.0;
  CHECK_THROWS_AS(polar_unitary(s), ValidationError);
}

TEST_CASE("polar_unitary leaves a positive Hermitian factor") {
  std::mt19937 rng(31);
  const Matrix a =
      floquet::testing::random_complex(4, 4, rng) + 3.0 * Matrix::Identity(4, 4);
  const Matrix up = polar_unitary(a).mat();
  const Matrix p = up.adjoint() * a;
  CHECK(hermiticity_defect(p) < 1e-10);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (p + p.adjoint().eval()));
  CHECK(solver.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("commutator_norm") {
  const auto& gens = spin_generators(1.0);
  CHECK(commutator_norm(gens.j1.mat(), gens.j1.mat()) == doctest::Approx(0.0));

  // brute-force 3x3 product oracle for [J3, J1] = i J2
  const Matrix prod =
      gens.j3.mat() * gens.j1.mat() - gens.j1.mat() * gens.j3.mat();
  CHECK(prod.norm() == doctest::Approx(std::sqrt(2.0)));
  CHECK(commutator_norm(gens.j1.mat(), gens.j3.mat()) ==
        doctest::Approx(std::sqrt(2.0)));

  // the split-level invariant commutes with M = omega J3
  const Matrix i0 = diag3(1.0, 1.0, -1.0);
  CHECK(commutator_norm(i0, 0.4 * gens.j3.mat()) < 1e-14);

  CHECK_THROWS_AS(commutator_norm(Matrix::Identity(2, 2), Matrix::Identity(3, 3)),
                  ValidationError);
}
