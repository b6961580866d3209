#pragma once

#include <span>
#include <vector>

#include "floquet/invariants.hpp"
#include "floquet/propagator.hpp"

namespace floquet {

/// delta = -int_0^T <psi|H|psi> dt by composite Simpson (N even).
double dynamical_phase(std::span<const Vector> psi,
                       const PeriodicHamiltonian& h, const TimeGrid& grid);

/// Discrete Pancharatnam geometric phase of a closed single-valued chain:
/// gamma = -sum_k arg <phi_k|phi_{k+1}>. `value` is reduced to (-pi, pi],
/// `raw` keeps the accumulated sum. An overlap modulus below min_overlap
/// raises ToleranceError (grid too coarse).
struct GeometricPhase {
  double value = 0.0;
  double raw = 0.0;
};

GeometricPhase geometric_phase(std::span<const Vector> phi,
                               double min_overlap = 0.1);

/// |mu_n T - delta - gamma| reduced mod 2pi; mu_n from cluster n of fd.
double total_phase_check(const FloquetDecomposition& fd, double delta,
                         double gamma, int cluster_index);

/// Connection matrices on one degeneracy subspace:
/// E = F^+ H F, A = i F^+ dF/dt (4th-order differences of the smooth frame,
/// one-sided at the ends, then Hermitized), Delta = E - A.
struct ConnectionTrace {
  double eigenvalue = 0.0;
  FrameGauge gauge = FrameGauge::floquet;
  TimeGrid grid;
  std::vector<Matrix> e, a, delta;  // N+1 samples, l x l
  double max_asymmetry = 0.0;       // diagnostic from Hermitizing A
  Matrix closure;                   // carried from the frame

  int subspace_dim() const { return static_cast<int>(e.front().rows()); }
};

/// asymmetry_tol guards against a grid too coarse to differentiate.
ConnectionTrace connection_matrices(const FrameTrace& frame,
                                    const PeriodicHamiltonian& h,
                                    double asymmetry_tol = 1e-4);

/// Solution of the transport equation i du/dt = Delta(t) u, u(0) = 1,
/// integrated from the
/// node samples of Delta. u[N] absorbs the frame closure, so it is the
/// holonomy relating frame(0) to its image after one period.
struct TransportResult {
  std::vector<Matrix> u;  // N+1, u[N] = closure * transported u(T)
  Matrix holonomy;        // = u[N]
  std::vector<double> eigenphases;  // sorted ascending, in (-pi, pi]
  double unitarity_drift = 0.0;

  int dim() const { return static_cast<int>(holonomy.rows()); }
};

/// flip_sign integrates i du/dt = -Delta u instead (test hook for the
/// transport sign convention).
TransportResult transport_unitary(const ConnectionTrace& conn,
                                  StepMethod method = StepMethod::magnus4,
                                  double drift_tol = 1e-6,
                                  bool flip_sign = false);

/// Commuting-case factorization u(T) = Texp(-i int E) Texp(+i int A)
/// (times the
/// frame closure), valid only when every sampled pair [E(t_k), A(t_j)]
/// commutes. Returns applicable = false past commute_tol.
struct FactorizedTransport {
  bool applicable = false;
  double max_cross_commutator = 0.0;
  Matrix dynamical_factor;   // Texp(-i int E)
  Matrix geometric_factor;   // Texp(+i int A), the non-Abelian geometric part
  Matrix holonomy;           // closure * dynamical * geometric
};

FactorizedTransport factorized_transport(const ConnectionTrace& conn,
                                         double commute_tol = 1e-8,
                                         StepMethod method = StepMethod::magnus4);

/// Gauge comparison of holonomies: only the eigenphase multisets are
/// physical. max_matching_distance is the largest circular distance after
/// optimally matching the sorted multisets pairwise.
struct HolonomyComparison {
  std::vector<std::vector<double>> phase_multisets;
  double max_matching_distance = 0.0;
};

HolonomyComparison holonomy_invariants(std::span<const TransportResult> results);

/// Minimal circular matching distance between two phase multisets.
double phase_multiset_distance(std::span<const double> a,
                               std::span<const double> b);

/// max_k || U(t_k) frame(0) - frame(t_k) u(t_k) ||_F: the transported
/// frame must solve the Schroedinger equation.
double frame_reconstruction_check(const FrameTrace& frame,
                                  const TransportResult& transport,
                                  const PropagatorTrace& trace);

}  // namespace floquet
