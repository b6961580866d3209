#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <optional>
#include <random>

#include "floquet/scenario.hpp"

namespace floquet {

namespace {

constexpr double kPi = std::numbers::pi;

double max_node_error(const PropagatorTrace& trace,
                      const std::function<Matrix(double)>& reference) {
  double worst = 0.0;
  for (int k = 0; k < trace.grid.nodes(); ++k) {
    worst = std::max(worst,
                     (trace.u[k].mat() - reference(trace.grid.node(k))).norm());
  }
  return worst;
}

double fitted_slope(std::span<const double> h, std::span<const double> err) {
  const size_t n = h.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Complex random_unit_complex2(std::mt19937& rng, Complex& second) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (;;) {
    const Complex xi(dist(rng), dist(rng));
    const Complex zeta(dist(rng), dist(rng));
    const double norm = std::sqrt(std::norm(xi) + std::norm(zeta));
    if (norm < 1e-3) continue;
    second = zeta / norm;
    return xi / norm;
  }
}

Matrix random_unitary2(std::mt19937& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (;;) {
    Matrix g(2, 2);
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 2; ++c) g(r, c) = Complex(dist(rng), dist(rng));
    }
    try {
      return polar_unitary(g).mat();
    } catch (const ValidationError&) {
      continue;  // singular draw
    }
  }
}

struct SubspaceRun {
  FrameTrace frame;
  ConnectionTrace conn;
  TransportResult transport;
};

}  // namespace

Report self_check(const SelfCheckOptions& opts) {
  Report report;
  report.config = default_scenario();
  report.config.steps = opts.steps;

  auto add = [&](const std::string& name, double measured, double bound,
                 bool pass, const std::string& note = "") {
    report.criteria.push_back({name, measured, bound, pass, note});
  };
  auto add_upper = [&](const std::string& name, double measured, double bound,
                       const std::string& note = "") {
    add(name, measured, bound, measured <= bound, note);
  };
  // a criterion that cannot even be evaluated is a failed criterion
  auto guarded = [&](const char* name, auto&& block) {
    try {
      block();
    } catch (const std::exception& e) {
      add(name, std::numeric_limits<double>::quiet_NaN(), 0.0, false,
          e.what());
    }
  };

  const PrecessingFieldParams p{1.0, 0.4, 1.0};
  const double period = p.period();
  const PrecessingModel model = precessing_model(p);
  const PeriodicHamiltonian& h = model.hamiltonian;
  auto u_analytic = [&](double t) -> Matrix {
    return model.z_analytic(t).mat() * unitary_exp(model.m_analytic, t).mat();
  };

  const int n = opts.steps;
  const TimeGrid grid = TimeGrid::uniform(period, n);
  const PropagatorTrace trace = propagate(h, grid, StepMethod::magnus4);
  const FloquetDecomposition fd = floquet_decompose(trace);
  const Matrix eye3 = Matrix::Identity(3, 3);
  const InvariantSpec split_spec = InvariantSpec::from_levels(
      {{1.0, eye3.leftCols(2)}, {-1.0, eye3.rightCols(1)}});
  const InvariantTrace inv = invariant_from_initial(split_spec, trace);

  // 1: propagator against the closed-form U(t) = Z(t) e^{iMt}
  add_upper("propagator-oracle", max_node_error(trace, u_analytic), 1e-8);

  // 2: fitted convergence orders over the fixed ladder
  for (const auto& [method, order] :
       {std::pair{StepMethod::magnus2, 2.0}, {StepMethod::magnus4, 4.0}}) {
    guarded(to_string(method).c_str(), [&] {
      std::vector<double> hs, errs;
      for (int steps : {64, 128, 256, 512}) {
        const TimeGrid g = TimeGrid::uniform(period, steps);
        errs.push_back(max_node_error(propagate(h, g, method), u_analytic));
        hs.push_back(g.dt());
      }
      const double slope = fitted_slope(hs, errs);
      add(fmt::format("order-{}", to_string(method)), std::abs(slope - order),
          0.3, std::abs(slope - order) <= 0.3,
          fmt::format("slope {:.3f}, nominal {:.1f}", slope, order));
    });
  }

  // 3: Floquet recovery
  guarded("floquet-mu", [&] {
    auto raw = fd.m_spectrum.raw_spectrum();  // descending
    const std::vector<double> target{p.omega, 0.0, -p.omega};
    double mu_err = 0.0;
    for (size_t i = 0; i < raw.size(); ++i) {
      mu_err = std::max(mu_err, std::abs(raw[i] - target[i]));
    }
    add_upper("floquet-mu", mu_err, 1e-8);
    add_upper("floquet-z-closure",
              std::max((fd.z.front().mat() - eye3).norm(),
                       (fd.z.back().mat() - eye3).norm()),
              1e-8);
    double recon = 0.0;
    for (int k = 0; k < grid.nodes(); ++k) {
      recon = std::max(
          recon, (trace.u[k].mat() -
                  fd.z[k].mat() * unitary_exp(fd.m, grid.node(k)).mat())
                     .norm());
    }
    add_upper("floquet-reconstruction", recon, 1e-8);
  });

  // 4: the split-level invariant (lambda = +1 on {|+>, |0>}, -1 on |->)
  guarded("invariant-checks", [&] {
    const TimeGrid grid2 = TimeGrid::uniform(period, 2 * n);
    const PropagatorTrace trace2 = propagate(h, grid2, StepMethod::magnus4);
    const InvariantTrace inv2 = invariant_from_initial(split_spec, trace2);
    const double r1 = check_invariant_ode(inv, h);
    const double r2 = check_invariant_ode(inv2, h);
    const double ratio = r1 / r2;
    add("invariant-ode-ratio", ratio, 5.0, ratio >= 3.0 && ratio <= 5.0,
        fmt::format("residuals {:.3e} -> {:.3e}, ratio must lie in [3, 5]", r1,
                    r2));
    add_upper("invariant-periodicity", periodicity_defect(inv), 1e-8);
    add_upper("invariant-commutation",
              commutation_check(inv.samples.front(), fd.m), 1e-10);
    add_upper("invariant-spectrum", spectrum_drift(inv), 1e-8);

    const FloquetDecomposition fd2 = floquet_decompose(trace2);
    auto lewis_frames = [&](const InvariantTrace& trace_inv,
                            const FloquetDecomposition& dec) {
      std::vector<FrameTrace> frames;
      for (const auto& cluster : trace_inv.spectrum.clusters) {
        frames.push_back(transport_eigenframes(
            trace_inv, cluster.eigenvalue, FrameGauge::floquet, &dec));
      }
      return frames;
    };
    const double l1 = check_lewis_relation(lewis_frames(inv, fd), h);
    const double l2 = check_lewis_relation(lewis_frames(inv2, fd2), h);
    const double lratio = l1 / l2;
    add("lewis-ratio", lratio, 5.0, lratio >= 3.0 && lratio <= 5.0,
        fmt::format("residuals {:.3e} -> {:.3e}, ratio must lie in [3, 5]", l1,
                    l2));
  });

  // 5: Abelian phases of the three cyclic states
  std::vector<double> deltas, gammas;
  guarded("abelian-phases", [&] {
    std::vector<double> closures;
    for (const auto& cs : cyclic_states(fd)) {
      const auto psi = propagate_state(trace, cs.state);
      const double delta = dynamical_phase(psi, h, grid);
      std::vector<Vector> phi;
      for (const auto& z : fd.z) phi.push_back(z.mat() * cs.state);
      const GeometricPhase gamma = geometric_phase(phi);
      deltas.push_back(delta);
      gammas.push_back(gamma.value);
      closures.push_back(
          total_phase_check(fd, delta, gamma.value, cs.cluster));
    }
    add_upper("abelian-delta", std::abs(deltas[0] - p.omega * period), 1e-6,
              "delta(|+>) against omega*T = 0.8*pi");
    add_upper("abelian-gamma",
              std::max({std::abs(gammas[0]), std::abs(gammas[1]),
                        std::abs(gammas[2])}),
              1e-6, "gamma of |+>, |0>, |-> all vanish");
    add_upper("abelian-closure",
              std::max({closures[0], closures[1], closures[2]}), 1e-6,
              "|mu*T - delta - gamma| mod 2pi");
  });

  // shared helper: frame -> connection -> transport on one subspace
  const Matrix basis2 = eye3.leftCols(2);
  auto run_subspace = [&](double lambda, const Matrix& frame0,
                          FrameGauge gauge) -> SubspaceRun {
    SubspaceRun run{
        transport_eigenframes(inv, lambda, gauge, &fd, &frame0), {}, {}};
    run.conn = connection_matrices(run.frame, h);
    run.transport = transport_unitary(run.conn);
    return run;
  };

  // 6: connection matrices against the closed forms
  std::mt19937 rng(0x5eed0u);
  guarded("connection-matrices", [&] {
    auto connection_error = [&](Complex xi, Complex zeta) {
      const Matrix frame0 = basis2 * frame_mixer(xi, zeta);
      const auto run = run_subspace(1.0, frame0, FrameGauge::floquet);
      const PrecessingConnection an = precessing_connection(p, xi, zeta);
      double match = 0.0, constancy = 0.0;
      for (int k = 0; k < grid.nodes(); ++k) {
        match = std::max({match, (run.conn.e[k] - Matrix(an.e)).norm(),
                          (run.conn.a[k] - Matrix(an.a)).norm(),
                          (run.conn.delta[k] - Matrix(an.delta)).norm()});
        constancy =
            std::max({constancy, (run.conn.e[k] - run.conn.e[0]).norm(),
                      (run.conn.a[k] - run.conn.a[0]).norm(),
                      (run.conn.delta[k] - run.conn.delta[0]).norm()});
      }
      return std::pair{match, constancy};
    };
    const auto [match10, const10] = connection_error(1.0, 0.0);
    add_upper("connection-xi10", match10, 1e-6, "xi=1, zeta=0");
    double match_rand = 0.0, const_all = const10;
    for (int i = 0; i < 5; ++i) {
      Complex zeta;
      const Complex xi = random_unit_complex2(rng, zeta);
      const auto [m, c] = connection_error(xi, zeta);
      match_rand = std::max(match_rand, m);
      const_all = std::max(const_all, c);
    }
    add_upper("connection-random", match_rand, 1e-6,
              "5 seeded random unit (xi, zeta) pairs");
    add_upper("connection-constancy", const_all, 1e-6);
  });

  // 7: non-Abelian holonomy against the constant-generator exponential
  const Complex isq(1.0 / std::numbers::sqrt2, 0.0);
  const Matrix frame_mixed = basis2 * frame_mixer(isq, isq);
  std::optional<SubspaceRun> mixed_floquet;
  guarded("holonomy-mixed", [&] {
    mixed_floquet = run_subspace(1.0, frame_mixed, FrameGauge::floquet);
    Matrix projector(2, 2);
    projector << 0.5, 0.5, 0.5, 0.5;
    const Complex phase = std::exp(Complex(0.0, 0.8 * kPi));
    const Matrix expected = Matrix::Identity(2, 2) + (phase - 1.0) * projector;
    add_upper("holonomy-mixed",
              (mixed_floquet->transport.holonomy - expected).norm(), 1e-6,
              "u(T) = 1 + (e^{i 0.8 pi} - 1) P at xi = zeta = 1/sqrt2");
    const std::vector<double> target{0.0, 0.8 * kPi};
    add_upper("holonomy-phases",
              phase_multiset_distance(mixed_floquet->transport.eigenphases,
                                      target),
              1e-6, "eigenphases {0.8 pi, 0}");
    const Matrix frame_diag = basis2 * frame_mixer(1.0, 0.0);
    const auto diag_run = run_subspace(1.0, frame_diag, FrameGauge::floquet);
    Matrix expected_diag = Matrix::Zero(2, 2);
    expected_diag(0, 0) = phase;
    expected_diag(1, 1) = 1.0;
    add_upper("holonomy-diagonal",
              (diag_run.transport.holonomy - expected_diag).norm(), 1e-6,
              "u(T) = diag(e^{i 0.8 pi}, 1) at xi=1, zeta=0");
  });

  // 8: gauge invariance of the eigenphase multisets
  guarded("gauge-invariance", [&] {
    if (!mixed_floquet) throw Error("holonomy prerequisite failed");
    const SubspaceRun mixed_aligned =
        run_subspace(1.0, frame_mixed, FrameGauge::aligned);
    add_upper("gauge-cross",
              phase_multiset_distance(mixed_floquet->transport.eigenphases,
                                      mixed_aligned.transport.eigenphases),
              1e-7, "floquet vs aligned");
    double conj_err = 0.0, phase_err = 0.0;
    for (int i = 0; i < 3; ++i) {
      const Matrix w = random_unitary2(rng);
      const auto rotated =
          run_subspace(1.0, Matrix(frame_mixed * w), FrameGauge::floquet);
      conj_err = std::max(
          conj_err, (rotated.transport.holonomy -
                     w.adjoint() * mixed_floquet->transport.holonomy * w)
                        .norm());
      phase_err = std::max(
          phase_err,
          phase_multiset_distance(rotated.transport.eigenphases,
                                  mixed_floquet->transport.eigenphases));
    }
    add_upper("gauge-rotation-conj", conj_err, 1e-7,
              "u'(T) = w^+ u(T) w under frame(0) -> frame(0) w");
    add_upper("gauge-rotation-phases", phase_err, 1e-7);
  });

  // 9: necessary-condition detector
  guarded("condition-detector", [&] {
    const auto rsplit = nonabelian_condition(inv.spectrum, fd);
    const Matrix j3sq =
        spin_generators(1.0).j3.mat() * spin_generators(1.0).j3.mat();
    const auto rj3sq =
        nonabelian_condition(herm_eig(HermitianOperator(j3sq)), fd);
    const auto rm = nonabelian_condition(fd.m_spectrum, fd);
    const int correct = (rsplit.satisfied ? 1 : 0) + (rj3sq.satisfied ? 1 : 0) +
                        (rm.satisfied ? 0 : 1);
    add("condition-detector", correct, 3.0, correct == 3,
        fmt::format("split-level: {}, J3^2: {}, I0=M: {}", rsplit.satisfied,
                    rj3sq.satisfied, rm.satisfied));
  });

  // 10: commuting-case factorization
  guarded("factorization", [&] {
    Matrix x(2, 2);
    x << Complex(0.3, 0.0), Complex(0.2, -0.1), Complex(0.2, 0.1),
        Complex(-0.5, 0.0);
    ConnectionTrace synth;
    synth.eigenvalue = 0.0;
    synth.gauge = FrameGauge::floquet;
    synth.grid = grid;
    for (int k = 0; k <= n; ++k) {
      const double t = grid.node(k);
      const double f = std::sin(p.big_omega * t) + 0.3;
      const double g = 0.7 * std::cos(2.0 * p.big_omega * t);
      synth.e.push_back(f * x);
      synth.a.push_back(g * x);
      synth.delta.push_back((f - g) * x);
    }
    const TransportResult direct = transport_unitary(synth);
    const FactorizedTransport fact = factorized_transport(synth);
    add_upper("factorization-commuting",
              fact.applicable ? (fact.holonomy - direct.holonomy).norm()
                              : std::numeric_limits<double>::infinity(),
              1e-8, "commuting family E = f(t)X, A = g(t)X");
    const auto diag_run = run_subspace(
        1.0, Matrix(basis2 * frame_mixer(1.0, 0.0)), FrameGauge::floquet);
    const FactorizedTransport gate = factorized_transport(diag_run.conn);
    add("factorization-gate", gate.max_cross_commutator, 1e-8,
        !gate.applicable,
        "xi=1, zeta=0 must report not-applicable ([E, A] != 0)");
  });

  // 11: frame reconstruction in both gauges
  guarded("frame-reconstruction", [&] {
    double worst = 0.0;
    for (auto gauge : {FrameGauge::floquet, FrameGauge::aligned}) {
      const auto top = run_subspace(1.0, frame_mixed, gauge);
      worst = std::max(
          worst, frame_reconstruction_check(top.frame, top.transport, trace));
      const auto bottom = run_subspace(-1.0, Matrix(eye3.rightCols(1)), gauge);
      worst = std::max(worst, frame_reconstruction_check(
                                  bottom.frame, bottom.transport, trace));
    }
    add_upper("frame-reconstruction", worst, 1e-6,
              "max_k ||U(t_k) frame(0) - frame(t_k) u(t_k)||");
  });

  // 12: guard rails
  guarded("guard-rails", [&] {
    bool branch_raised = false;
    try {
      const PrecessingModel res = precessing_model({1.0, 0.5, 1.0});
      floquet_decompose(propagate(res.hamiltonian, grid));
    } catch (const BranchBoundaryError&) {
      branch_raised = true;
    }
    add("guard-branch-boundary", branch_raised ? 1.0 : 0.0, 1.0, branch_raised,
        "omega = Omega/2 puts an eigenphase of U(T) at pi");

    bool crossing_raised = false;
    try {
      auto path = [&](double t) {
        const double s = std::sin(0.5 * p.big_omega * t);
        return Eigen::Vector3d(s * s, 0.0, 0.0);
      };
      field_hamiltonian(1.0, path, spin_generators(1.0), period);
    } catch (const LevelCrossingError&) {
      crossing_raised = true;
    }
    add("guard-level-crossing", crossing_raised ? 1.0 : 0.0, 1.0,
        crossing_raised, "field path through R = 0");
  });

  // scalar cross-check of the transport sign convention: for l = 1 the phase of
  // u(T) is delta + gamma (mod 2pi)
  guarded("abelian-consistency", [&] {
    if (deltas.size() < 3) throw Error("phase prerequisite failed");
    const FrameTrace ft =
        transport_eigenframes(inv, -1.0, FrameGauge::floquet, &fd);
    const ConnectionTrace conn = connection_matrices(ft, h);
    const TransportResult tr = transport_unitary(
        conn, StepMethod::magnus4, 1e-6, opts.flip_transport_sign);
    const double u_phase = std::arg(tr.holonomy(0, 0));
    const double expected = deltas[2] + gammas[2];  // the |-> state
    add_upper("abelian-consistency",
              std::abs(principal_angle(u_phase - expected)), 1e-6,
              "arg u(T) = delta + gamma for the l = 1 subspace");
  });

  return report;
}

}  // namespace floquet
