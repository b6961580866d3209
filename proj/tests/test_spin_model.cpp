#include "floquet/spin_model.hpp"

#include <numbers>

#include "doctest.h"
#include "test_util.hpp"

using namespace floquet;

namespace {
constexpr double kPi = std::numbers::pi;

double commutation_defect(const SpinGenerators& g) {
  const Complex i(0, 1);
  const Matrix c12 = g.j1.mat() * g.j2.mat() - g.j2.mat() * g.j1.mat();
  const Matrix c23 = g.j2.mat() * g.j3.mat() - g.j3.mat() * g.j2.mat();
  const Matrix c31 = g.j3.mat() * g.j1.mat() - g.j1.mat() * g.j3.mat();
  return std::max({(c12 - i * g.j3.mat()).norm(), (c23 - i * g.j1.mat()).norm(),
                   (c31 - i * g.j2.mat()).norm()});
}
}  // namespace

TEST_CASE("spin_generators j=1/2 are half the Pauli matrices") {
  const auto& g = spin_generators(0.5);
  REQUIRE(g.dim == 2);
  Matrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, Complex(0, -1), Complex(0, 1), 0;
  sz << 1, 0, 0, -1;
  CHECK((g.j1.mat() - 0.5 * sx).norm() < 1e-14);
  CHECK((g.j2.mat() - 0.5 * sy).norm() < 1e-14);
  CHECK((g.j3.mat() - 0.5 * sz).norm() < 1e-14);
}

TEST_CASE("spin_generators j=1 standard representation") {
  const auto& g = spin_generators(1.0);
  REQUIRE(g.dim == 3);
  CHECK(g.j3.mat()(0, 0) == Complex(1.0));
  CHECK(g.j3.mat()(1, 1) == Complex(0.0));
  CHECK(g.j3.mat()(2, 2) == Complex(-1.0));
  const double s = 1.0 / std::sqrt(2.0);
  Matrix j1(3, 3);
  j1 << 0, s, 0, s, 0, s, 0, s, 0;
  CHECK((g.j1.mat() - j1).norm() < 1e-14);
}

TEST_CASE("spin_generators satisfy the su(2) algebra and the Casimir") {
  for (double j : {0.5, 1.0, 1.5, 2.0, 7.5}) {
    const auto& g = spin_generators(j);
    CHECK(commutation_defect(g) < 1e-12);
    const Matrix casimir = g.j1.mat() * g.j1.mat() +
                           g.j2.mat() * g.j2.mat() + g.j3.mat() * g.j3.mat();
    CHECK((casimir - j * (j + 1) * Matrix::Identity(g.dim, g.dim)).norm() <
          1e-12);
  }
}

TEST_CASE("spin_generators rejects bad j and caps the dimension") {
  CHECK_THROWS_AS(spin_generators(0.3), ValidationError);
  CHECK_THROWS_AS(spin_generators(0.0), ValidationError);
  CHECK_THROWS_AS(spin_generators(-1.0), ValidationError);
  CHECK_THROWS_AS(spin_generators(100.5), ValidationError);
}

TEST_CASE("spin_generators are cached per j") {
  CHECK(&spin_generators(1.0) == &spin_generators(1.0));
}

TEST_CASE("field_hamiltonian constant fields") {
  const auto& g1 = spin_generators(1.0);
  const auto h1 = field_hamiltonian(
      1.0, [](double) { return Eigen::Vector3d(0, 0, 1); }, g1, 2.0);
  CHECK((h1(0.7) - g1.j3.mat()).norm() < 1e-14);

  const auto& gh = spin_generators(0.5);
  const auto h2 = field_hamiltonian(
      2.0, [](double) { return Eigen::Vector3d(1, 0, 0); }, gh, 1.0);
  Matrix sx(2, 2);
  sx << 0, 1, 1, 0;
  CHECK((h2(0.3) - sx).norm() < 1e-14);
}

TEST_CASE("field_hamiltonian reproduces the precessing Hamiltonian") {
  const PrecessingFieldParams p{1.0, 0.4, 1.0};
  const double period = p.period();
  const auto model = precessing_model(p);
  const auto h = field_hamiltonian(
      1.0,
      [&](double t) {
        return Eigen::Vector3d(-p.big_omega, -p.omega * std::sin(p.big_omega * t),
                               -p.omega * std::cos(p.big_omega * t));
      },
      spin_generators(1.0), period);
  for (double t : {0.0, 0.3 * period, 0.77 * period, period}) {
    CHECK((h(t) - model.hamiltonian(t)).norm() < 1e-13);
  }
}

TEST_CASE("field_hamiltonian guards periodicity and level crossings") {
  const auto& g = spin_generators(1.0);
  CHECK_THROWS_AS(field_hamiltonian(
                      1.0, [](double t) { return Eigen::Vector3d(1 + t, 0, 0); },
                      g, 1.0),
                  ValidationError);
  CHECK_THROWS_AS(
      field_hamiltonian(
          1.0,
          [](double t) {
            const double s = std::sin(0.5 * t);
            return Eigen::Vector3d(s * s, 0, 0);
          },
          g, 2.0 * kPi),
      LevelCrossingError);
}

TEST_CASE("precessing_model closed forms at j=1") {
  const PrecessingFieldParams p{1.0, 0.4, 1.0};
  const auto model = precessing_model(p);
  const auto& g = spin_generators(1.0);

  CHECK((model.hamiltonian(0.0) + g.j1.mat() + 0.4 * g.j3.mat()).norm() <
        1e-13);
  CHECK((model.z_analytic(p.period()).mat() - Matrix::Identity(3, 3)).norm() <
        1e-12);
  CHECK((model.m_analytic.mat() - 0.4 * g.j3.mat()).norm() < 1e-14);
}

TEST_CASE("precessing Hamiltonian equals -Omega J1 - omega Z J3 Z^+") {
  const PrecessingFieldParams p{1.0, 0.4, 1.0};
  const auto model = precessing_model(p);
  const auto& g = spin_generators(1.0);
  for (int k = 0; k <= 16; ++k) {
    const double t = p.period() * k / 16.0;
    const Matrix z = model.z_analytic(t).mat();
    const Matrix expected =
        -p.big_omega * g.j1.mat() - p.omega * z * g.j3.mat() * z.adjoint();
    CHECK((model.hamiltonian(t) - expected).norm() < 1e-10);
  }
}

TEST_CASE("precessing analytic pair solves the Schroedinger equation") {
  for (double j : {1.0, 0.5}) {
    const PrecessingFieldParams p{j, 0.4, 1.0};
    const auto model = precessing_model(p);
    auto u = [&](double t) {
      return Matrix(model.z_analytic(t).mat() *
                    unitary_exp(model.m_analytic, t).mat());
    };
    // centered-difference residual of i dU/dt = H U
    const double eps = 1e-5;
    for (double t : {0.4, 2.0, 5.5}) {
      const Matrix du = (u(t + eps) - u(t - eps)) / (2.0 * eps);
      const Matrix residual =
          Complex(0, 1) * du - model.hamiltonian(t) * u(t);
      CHECK(residual.norm() < 1e-8);
    }
    // the returned pair is T-periodic for half-integer j as well
    CHECK((model.z_analytic(p.period()).mat() -
           Matrix::Identity(model.m_analytic.dim(), model.m_analytic.dim()))
              .norm() < 1e-12);
  }
}

TEST_CASE("precessing spectrum is time-independent") {
  const PrecessingFieldParams p{1.0, 0.4, 1.0};
  const auto model = precessing_model(p);
  const double scale = std::sqrt(p.big_omega * p.big_omega + p.omega * p.omega);
  for (double t : {0.0, 1.1, 3.9}) {
    const auto sd = herm_eig(HermitianOperator(model.hamiltonian(t)));
    REQUIRE(sd.clusters.size() == 3);
    CHECK(sd.eigenvalues()[0] == doctest::Approx(scale).epsilon(1e-12));
    CHECK(sd.eigenvalues()[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sd.eigenvalues()[2] == doctest::Approx(-scale).epsilon(1e-12));
  }
}

TEST_CASE("frame_mixer is unitary and checks normalization") {
  const Complex xi(0.6, 0.3), zeta(0.1, std::sqrt(1.0 - 0.36 - 0.09 - 0.01));
  const Eigen::Matrix2cd w = frame_mixer(xi, zeta);
  CHECK((w.adjoint() * w - Eigen::Matrix2cd::Identity()).norm() < 1e-12);
  CHECK_THROWS_AS(frame_mixer(Complex(1.0, 0.0), Complex(0.1, 0.0)),
                  ValidationError);
}

TEST_CASE("precessing_connection closed forms") {
  const PrecessingFieldParams p{1.0, 0.4, 1.0};
  const double s = p.big_omega / std::sqrt(2.0);

  SUBCASE("xi = 1, zeta = 0") {
    const auto c = precessing_connection(p, 1.0, 0.0);
    Eigen::Matrix2cd e;
    e << -p.omega, s, s, 0.0;
    Eigen::Matrix2cd a;
    a << 0.0, s, s, 0.0;
    Eigen::Matrix2cd d;
    d << -p.omega, 0.0, 0.0, 0.0;
    CHECK((c.e - e).norm() < 1e-14);
    CHECK((c.a - a).norm() < 1e-14);
    CHECK((c.delta - d).norm() < 1e-14);
  }

  SUBCASE("xi = zeta = 1/sqrt2") {
    const Complex v(1.0 / std::sqrt(2.0), 0.0);
    const auto c = precessing_connection(p, v, v);
    Eigen::Matrix2cd d;
    d << 1.0, 1.0, 1.0, 1.0;
    d *= -0.5 * p.omega;
    CHECK((c.delta - d).norm() < 1e-14);
    // holonomy e^{-iT Delta} = 1 + (e^{i omega T} - 1) P
    Eigen::Matrix2cd projector;
    projector << 0.5, 0.5, 0.5, 0.5;
    const Complex phase = std::polar(1.0, p.omega * p.period());
    const Eigen::Matrix2cd expected =
        Eigen::Matrix2cd::Identity() + (phase - 1.0) * projector;
    CHECK((c.holonomy(p.period()) - expected).norm() < 1e-12);
  }
}
