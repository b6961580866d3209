#include "floquet/phases.hpp"

#include <numbers>

#include "doctest.h"
#include "test_util.hpp"

using namespace floquet;

namespace {
constexpr double kPi = std::numbers::pi;

struct Pipeline {
  PrecessingFieldParams params{1.0, 0.4, 1.0};
  PrecessingModel model = precessing_model(params);
  PropagatorTrace trace;
  FloquetDecomposition fd;
  InvariantTrace inv;

  explicit Pipeline(int steps = 512)
      : trace(propagate(model.hamiltonian, TimeGrid::uniform(2.0 * kPi, steps))),
        fd(floquet_decompose(trace)),
        inv(invariant_from_initial(
            InvariantSpec::from_levels(
                {{1.0, Matrix::Identity(3, 3).leftCols(2)},
                 {-1.0, Matrix::Identity(3, 3).rightCols(1)}}),
            trace)) {}

  FrameTrace frame(double lambda, FrameGauge gauge,
                   const Matrix* frame0 = nullptr) const {
    return transport_eigenframes(inv, lambda, gauge, &fd, frame0);
  }
};

Vector basis_vector(int i) {
  Vector v = Vector::Zero(3);
  v(i) = 1.0;
  return v;
}
}  // namespace

TEST_CASE("dynamical_phase of an eigenstate of a constant H is -E0*T") {
  Matrix h0 = Matrix::Zero(2, 2);
  h0(0, 0) = 0.7;
  h0(1, 1) = -0.4;
  const PeriodicHamiltonian h(2, 3.0, [h0](double) { return h0; });
  const TimeGrid grid = TimeGrid::uniform(3.0, 16);
  std::vector<Vector> psi(grid.nodes(), Vector::Zero(2));
  for (auto& v : psi) v(0) = 1.0;
  CHECK(dynamical_phase(psi, h, grid) == doctest::Approx(-0.7 * 3.0));
}

TEST_CASE("dynamical_phase of the precessing cyclic states") {
  const Pipeline pipe;
  const TimeGrid& grid = pipe.trace.grid;
  const double T = grid.period;

  const auto psi_plus = propagate_state(pipe.trace, basis_vector(0));
  CHECK(std::abs(dynamical_phase(psi_plus, pipe.model.hamiltonian, grid) -
                 0.4 * T) < 1e-6);
  const auto psi_zero = propagate_state(pipe.trace, basis_vector(1));
  CHECK(std::abs(dynamical_phase(psi_zero, pipe.model.hamiltonian, grid)) <
        1e-6);
}

TEST_CASE("dynamical_phase requires an even grid") {
  Matrix h0 = Matrix::Zero(2, 2);
  const PeriodicHamiltonian h(2, 1.0, [h0](double) { return h0; });
  const TimeGrid grid = TimeGrid::uniform(1.0, 7);
  std::vector<Vector> psi(grid.nodes(), Vector::Zero(2));
  for (auto& v : psi) v(0) = 1.0;
  CHECK_THROWS_AS(dynamical_phase(psi, h, grid), ValidationError);
}

TEST_CASE("geometric_phase basics") {
  SUBCASE("constant frame accumulates nothing") {
    std::vector<Vector> phi(9, basis_vector(0));
    CHECK(geometric_phase(phi).value == doctest::Approx(0.0));
  }

  SUBCASE("Z(t)|m> closes with zero geometric phase") {
    const Pipeline pipe(256);
    for (int m = 0; m < 3; ++m) {
      std::vector<Vector> phi;
      for (const auto& z : pipe.fd.z) phi.push_back(z.mat() * basis_vector(m));
      CHECK(std::abs(geometric_phase(phi).value) < 1e-6);
    }
  }

  SUBCASE("rotating mixed frame picks up -2 pi cos^2(theta)") {
    const auto& g = spin_generators(1.0);
    const double theta = kPi / 3.0;
    const int n = 512;
    std::vector<Vector> phi;
    Vector v0 = std::cos(theta) * basis_vector(0) + std::sin(theta) * basis_vector(1);
    for (int k = 0; k <= n; ++k) {
      phi.push_back(unitary_exp(g.j3, 2.0 * kPi * k / n).mat() * v0);
    }
    const GeometricPhase gp = geometric_phase(phi);
    // the Pancharatnam sum carries an O(h^2) discretization error
    const double expected = principal_angle(-2.0 * kPi * std::cos(theta) *
                                            std::cos(theta));
    CHECK(std::abs(principal_angle(gp.value - expected)) < 1e-4);
    // raw value keeps the winding
    CHECK(gp.raw == doctest::Approx(-2.0 * kPi * std::cos(theta) *
                                    std::cos(theta))
                        .epsilon(1e-4));
  }

  SUBCASE("a coarse chain with small overlaps is rejected") {
    const auto& g = spin_generators(1.0);
    Vector v0 = (basis_vector(0) + basis_vector(1)) / std::sqrt(2.0);
    std::vector<Vector> phi;
    for (int k = 0; k <= 2; ++k) {
      phi.push_back(unitary_exp(g.j3, 2.0 * kPi * k / 2).mat() * v0);
    }
    CHECK_THROWS_AS(geometric_phase(phi), ToleranceError);
  }

  SUBCASE("open chains are rejected") {
    const auto& g = spin_generators(1.0);
    std::vector<Vector> phi;
    for (int k = 0; k <= 8; ++k) {
      phi.push_back(unitary_exp(g.j3, 0.3 * k / 8).mat() * basis_vector(0));
    }
    // |+> picks up a phase under e^{i s J3}, so the chain does not close
    CHECK_THROWS_AS(geometric_phase(phi), ValidationError);
  }
}

TEST_CASE("total_phase_check closes the Abelian phase ledger") {
  const Pipeline pipe;
  const TimeGrid& grid = pipe.trace.grid;
  const auto states = cyclic_states(pipe.fd);
  for (const auto& cs : states) {
    const auto psi = propagate_state(pipe.trace, cs.state);
    const double delta = dynamical_phase(psi, pipe.model.hamiltonian, grid);
    std::vector<Vector> phi;
    for (const auto& z : pipe.fd.z) phi.push_back(z.mat() * cs.state);
    const double gamma = geometric_phase(phi).value;
    CHECK(total_phase_check(pipe.fd, delta, gamma, cs.cluster) < 1e-6);
  }
  CHECK_THROWS_AS(total_phase_check(pipe.fd, 0.0, 0.0, 7), ValidationError);
}

TEST_CASE("connection_matrices reproduces the closed forms") {
  const Pipeline pipe;

  SUBCASE("xi = 1, zeta = 0 frame") {
    const Matrix frame0 =
        Matrix::Identity(3, 3).leftCols(2) * frame_mixer(1.0, 0.0);
    const FrameTrace ft = pipe.frame(1.0, FrameGauge::floquet, &frame0);
    const ConnectionTrace conn =
        connection_matrices(ft, pipe.model.hamiltonian);
    const auto an = precessing_connection(pipe.params, 1.0, 0.0);
    for (int k = 0; k < conn.grid.nodes(); k += 64) {
      CHECK((conn.e[k] - Matrix(an.e)).norm() < 1e-6);
      CHECK((conn.a[k] - Matrix(an.a)).norm() < 1e-6);
      CHECK((conn.delta[k] - Matrix(an.delta)).norm() < 1e-6);
    }
    CHECK(conn.max_asymmetry < 1e-6);
  }

  SUBCASE("xi = zeta = 1/sqrt2 gives the rank-one Delta") {
    const Complex v(1.0 / std::sqrt(2.0), 0.0);
    const Matrix frame0 =
        Matrix::Identity(3, 3).leftCols(2) * frame_mixer(v, v);
    const FrameTrace ft = pipe.frame(1.0, FrameGauge::floquet, &frame0);
    const ConnectionTrace conn =
        connection_matrices(ft, pipe.model.hamiltonian);
    Matrix expected(2, 2);
    expected << 1.0, 1.0, 1.0, 1.0;
    expected *= -0.5 * 0.4;
    double constancy = 0.0;
    for (int k = 0; k < conn.grid.nodes(); ++k) {
      CHECK((conn.delta[k] - expected).norm() < 1e-6);
      constancy = std::max(constancy,
                           (conn.delta[k] - conn.delta.front()).norm());
    }
    CHECK(constancy < 1e-6);
  }

  SUBCASE("a discontinuous frame trips the asymmetry guard") {
    FrameTrace broken = pipe.frame(-1.0, FrameGauge::floquet);
    broken.frames[broken.frames.size() / 2] =
        Matrix::Identity(3, 3).col(0);  // jump out of the subspace
    CHECK_THROWS_AS(connection_matrices(broken, pipe.model.hamiltonian),
                    ToleranceError);
  }
}

TEST_CASE("transport_unitary") {
  const Pipeline pipe;

  SUBCASE("Delta = 0 transports trivially") {
    ConnectionTrace conn;
    conn.grid = TimeGrid::uniform(1.0, 16);
    conn.gauge = FrameGauge::floquet;
    for (int k = 0; k <= 16; ++k) {
      conn.e.push_back(Matrix::Zero(2, 2));
      conn.a.push_back(Matrix::Zero(2, 2));
      conn.delta.push_back(Matrix::Zero(2, 2));
    }
    const TransportResult tr = transport_unitary(conn);
    CHECK((tr.holonomy - Matrix::Identity(2, 2)).norm() < 1e-13);
    CHECK(tr.eigenphases[0] == doctest::Approx(0.0));
  }

  SUBCASE("mixed frame holonomy matches the projector exponential") {
    const Complex v(1.0 / std::sqrt(2.0), 0.0);
    const Matrix frame0 =
        Matrix::Identity(3, 3).leftCols(2) * frame_mixer(v, v);
    const FrameTrace ft = pipe.frame(1.0, FrameGauge::floquet, &frame0);
    const ConnectionTrace conn =
        connection_matrices(ft, pipe.model.hamiltonian);
    const TransportResult tr = transport_unitary(conn);
    const Matrix expected =
        precessing_connection(pipe.params, v, v).holonomy(2.0 * kPi);
    CHECK((tr.holonomy - expected).norm() < 1e-6);
    // |det u(T)| = 1 and arg det = -T trace(Delta) for constant Delta
    const Complex det = tr.holonomy.determinant();
    CHECK(std::abs(std::abs(det) - 1.0) < 1e-8);
    const double expected_arg =
        principal_angle(-2.0 * kPi * conn.delta.front().trace().real());
    CHECK(std::abs(principal_angle(std::arg(det) - expected_arg)) < 1e-6);
  }

  SUBCASE("diagonal frame holonomy is the Abelian pair of phases") {
    const Matrix frame0 =
        Matrix::Identity(3, 3).leftCols(2) * frame_mixer(1.0, 0.0);
    const FrameTrace ft = pipe.frame(1.0, FrameGauge::floquet, &frame0);
    const TransportResult tr =
        transport_unitary(connection_matrices(ft, pipe.model.hamiltonian));
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = std::polar(1.0, 0.8 * kPi);
    expected(1, 1) = 1.0;
    CHECK((tr.holonomy - expected).norm() < 1e-6);
  }

  SUBCASE("the sign hook flips the scalar phase") {
    const FrameTrace ft = pipe.frame(-1.0, FrameGauge::floquet);
    const ConnectionTrace conn =
        connection_matrices(ft, pipe.model.hamiltonian);
    const TransportResult fwd = transport_unitary(conn);
    const TransportResult rev =
        transport_unitary(conn, StepMethod::magnus4, 1e-6, true);
    const double phase = std::arg(fwd.holonomy(0, 0));
    CHECK(std::abs(principal_angle(std::arg(rev.holonomy(0, 0)) + phase)) <
          1e-9);
    // delta + gamma = -0.8 pi for |->, so the flip is detectable
    CHECK(std::abs(principal_angle(phase - (-0.8 * kPi))) < 1e-6);
  }
}

TEST_CASE("abelian consistency: arg u(T) = delta + gamma on l = 1 subspaces") {
  const Pipeline pipe;
  const TimeGrid& grid = pipe.trace.grid;
  const FrameTrace ft = pipe.frame(-1.0, FrameGauge::floquet);
  const TransportResult tr =
      transport_unitary(connection_matrices(ft, pipe.model.hamiltonian));
  const auto psi = propagate_state(pipe.trace, basis_vector(2));
  const double delta = dynamical_phase(psi, pipe.model.hamiltonian, grid);
  std::vector<Vector> phi;
  for (const auto& z : pipe.fd.z) phi.push_back(z.mat() * basis_vector(2));
  const double gamma = geometric_phase(phi).value;
  CHECK(std::abs(principal_angle(std::arg(tr.holonomy(0, 0)) -
                                 (delta + gamma))) < 1e-6);
}

TEST_CASE("factorized_transport") {
  SUBCASE("commuting family against the quadrature oracle") {
    Matrix x(2, 2);
    x << 0.4, Complex(0.1, -0.2), Complex(0.1, 0.2), -0.3;
    const TimeGrid grid = TimeGrid::uniform(2.0 * kPi, 256);
    ConnectionTrace conn;
    conn.grid = grid;
    auto f = [](double t) { return std::sin(t) + 0.3; };
    auto g = [](double t) { return 0.7 * std::cos(2.0 * t); };
    for (int k = 0; k <= grid.steps; ++k) {
      const double t = grid.node(k);
      conn.e.push_back(f(t) * x);
      conn.a.push_back(g(t) * x);
      conn.delta.push_back((f(t) - g(t)) * x);
    }
    const FactorizedTransport fact = factorized_transport(conn);
    REQUIRE(fact.applicable);
    const TransportResult direct = transport_unitary(conn);
    CHECK((fact.holonomy - direct.holonomy).norm() < 1e-8);
    // u(T) = e^{-i (int f - int g) X}; both integrals in closed form:
    // int_0^T sin + 0.3 = 0.3 T, int_0^T 0.7 cos(2t) = 0
    const Matrix expected =
        unitary_exp(HermitianOperator(x), -0.3 * 2.0 * kPi).mat();
    CHECK((fact.holonomy - expected).norm() < 1e-7);
  }

  SUBCASE("E = A factorizes to the identity both ways") {
    Matrix x(2, 2);
    x << 0.2, 0.0, 0.0, -0.1;
    const TimeGrid grid = TimeGrid::uniform(1.0, 32);
    ConnectionTrace conn;
    conn.grid = grid;
    for (int k = 0; k <= grid.steps; ++k) {
      conn.e.push_back(x);
      conn.a.push_back(x);
      conn.delta.push_back(Matrix::Zero(2, 2));
    }
    const FactorizedTransport fact = factorized_transport(conn);
    REQUIRE(fact.applicable);
    CHECK((fact.holonomy - Matrix::Identity(2, 2)).norm() < 1e-10);
    CHECK((transport_unitary(conn).holonomy - Matrix::Identity(2, 2)).norm() <
          1e-10);
  }

  SUBCASE("the spin model with xi=1, zeta=0 is not applicable") {
    const Pipeline pipe;
    const Matrix frame0 =
        Matrix::Identity(3, 3).leftCols(2) * frame_mixer(1.0, 0.0);
    const FrameTrace ft = pipe.frame(1.0, FrameGauge::floquet, &frame0);
    const FactorizedTransport fact =
        factorized_transport(connection_matrices(ft, pipe.model.hamiltonian));
    CHECK_FALSE(fact.applicable);
    CHECK(fact.max_cross_commutator > 0.1);
  }
}

TEST_CASE("holonomy_invariants") {
  SUBCASE("conjugation leaves the eigenphase multiset alone") {
    std::mt19937 rng(17);
    Matrix u = Matrix::Zero(2, 2);
    u(0, 0) = std::polar(1.0, 0.9);
    u(1, 1) = std::polar(1.0, -1.7);
    const Matrix w = floquet::testing::random_unitary(2, rng).mat();
    TransportResult a, b;
    a.holonomy = u;
    a.eigenphases = {-1.7, 0.9};
    b.holonomy = w.adjoint() * u * w;
    Eigen::ComplexEigenSolver<Matrix> eig(b.holonomy);
    b.eigenphases = {std::arg(eig.eigenvalues()(0)),
                     std::arg(eig.eigenvalues()(1))};
    std::sort(b.eigenphases.begin(), b.eigenphases.end());
    std::vector<TransportResult> results{a, b};
    CHECK(holonomy_invariants(results).max_matching_distance < 1e-12);
  }

  SUBCASE("diagonal holonomy reads off its phases") {
    TransportResult r;
    r.holonomy = Matrix::Zero(2, 2);
    r.eigenphases = {0.3, 1.1};
    std::vector<TransportResult> one{r};
    const auto cmp = holonomy_invariants(one);
    CHECK(cmp.phase_multisets[0] == std::vector<double>{0.3, 1.1});
    CHECK(cmp.max_matching_distance == 0.0);
  }

  SUBCASE("matching wraps around the branch point") {
    const std::vector<double> a{kPi - 1e-9};
    const std::vector<double> b{-kPi + 1e-9};
    CHECK(phase_multiset_distance(a, b) < 1e-8);
  }
}

TEST_CASE("frame_reconstruction_check") {
  const Pipeline pipe;
  const Complex v(1.0 / std::sqrt(2.0), 0.0);
  const Matrix frame0 = Matrix::Identity(3, 3).leftCols(2) * frame_mixer(v, v);

  SUBCASE("transported frames solve the Schroedinger equation") {
    for (auto gauge : {FrameGauge::floquet, FrameGauge::aligned}) {
      const FrameTrace ft = pipe.frame(1.0, gauge, &frame0);
      const TransportResult tr =
          transport_unitary(connection_matrices(ft, pipe.model.hamiltonian));
      CHECK(frame_reconstruction_check(ft, tr, pipe.trace) < 1e-6);
    }
  }

  SUBCASE("the residual drops at fourth order") {
    auto residual = [&](int n) {
      const Pipeline p(n);
      const FrameTrace ft = transport_eigenframes(p.inv, 1.0,
                                                  FrameGauge::floquet, &p.fd,
                                                  &frame0);
      const TransportResult tr =
          transport_unitary(connection_matrices(ft, p.model.hamiltonian));
      return frame_reconstruction_check(ft, tr, p.trace);
    };
    const double ratio = residual(64) / residual(128);
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
  }
}

TEST_CASE("gauge covariance of the holonomy under frame rotations") {
  const Pipeline pipe;
  std::mt19937 rng(23);
  const Complex v(1.0 / std::sqrt(2.0), 0.0);
  const Matrix frame0 = Matrix::Identity(3, 3).leftCols(2) * frame_mixer(v, v);
  const FrameTrace ft = pipe.frame(1.0, FrameGauge::floquet, &frame0);
  const TransportResult tr =
      transport_unitary(connection_matrices(ft, pipe.model.hamiltonian));

  const Matrix w = floquet::testing::random_unitary(2, rng).mat();
  const Matrix rotated0 = frame0 * w;
  const FrameTrace ftw = pipe.frame(1.0, FrameGauge::floquet, &rotated0);
  const TransportResult trw =
      transport_unitary(connection_matrices(ftw, pipe.model.hamiltonian));
  CHECK((trw.holonomy - w.adjoint() * tr.holonomy * w).norm() < 1e-7);
  CHECK(phase_multiset_distance(tr.eigenphases, trw.eigenphases) < 1e-7);
}
