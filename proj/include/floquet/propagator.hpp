#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "floquet/matrix_core.hpp"
#include "floquet/spin_model.hpp"

namespace floquet {

/// Uniform grid t_k = k T / N, k = 0..N.
struct TimeGrid {
  double period = 1.0;
  int steps = 0;  // N

  static TimeGrid uniform(double period, int steps);

  double dt() const { return period / steps; }
  double node(int k) const { return period * k / steps; }
  int nodes() const { return steps + 1; }
};

enum class StepMethod { magnus2, magnus4 };

StepMethod method_from_string(const std::string& name);
std::string to_string(StepMethod m);

/// Discrete time-ordered exponential V(t) = Texp(-i sign int_0^t F),
/// i.e. the solution of i dV/dt = sign * F(t) V, V(0) = 1, for a
/// Hermitian-valued generator F. magnus2 uses the midpoint exponential,
/// magnus4 two Gauss-Legendre samples per step plus the commutator term.
/// Every step is re-unitarized through the polar factor. A sampled generator
/// with Hermiticity defect above 1e-8 is rejected (unitarity would drift).
std::vector<UnitaryOperator> time_ordered_exp(
    const std::function<Matrix(double)>& generator, const TimeGrid& grid,
    StepMethod method = StepMethod::magnus4, double sign = -1.0);

/// Same stepping from node samples F(t_k); off-node values come from local
/// cubic interpolation, which preserves the magnus4 order.
std::vector<UnitaryOperator> time_ordered_exp(
    std::span<const Matrix> node_samples, const TimeGrid& grid,
    StepMethod method = StepMethod::magnus4, double sign = -1.0);

/// Time-evolution samples U(t_k) of i dU/dt = H(t) U, U(0) = 1.
struct PropagatorTrace {
  TimeGrid grid;
  StepMethod method = StepMethod::magnus4;
  std::vector<UnitaryOperator> u;  // N+1 samples

  Eigen::Index dim() const { return u.front().dim(); }
};

/// Integrate the evolution operator on the grid. Requires N >= 8 and
/// grid.period == H.period.
PropagatorTrace propagate(const PeriodicHamiltonian& h, const TimeGrid& grid,
                          StepMethod method = StepMethod::magnus4);

/// psi(t_k) = U(t_k) psi0.
std::vector<Vector> propagate_state(const PropagatorTrace& trace,
                                    const Vector& psi0);

/// Floquet decomposition U(t) = Z(t) e^{iMt} with principal M (eigenphases
/// of U(T) in (-pi, pi], so mu_n in (-pi/T, pi/T]).
struct FloquetDecomposition {
  HermitianOperator m;
  SpectralDecomposition m_spectrum;  // clusters of M, descending mu
  std::vector<UnitaryOperator> z;    // Z(t_k), k = 0..N
  TimeGrid grid;
  bool degeneracy_warning = false;
  std::string warning;

  double period() const { return grid.period; }
  Eigen::Index dim() const { return m.dim(); }
  /// U(T) reconstructed as Z(T) e^{iMT}.
  UnitaryOperator u_period() const;
};

/// Extract M = unitary_log(U(T))/T and Z(t_k) = U(t_k) e^{-iMt_k}.
/// Throws BranchBoundaryError at resonant periods; sets
/// degeneracy_warning when distinct mu_n nearly coincide mod 2pi/T.
FloquetDecomposition floquet_decompose(const PropagatorTrace& trace,
                                       std::optional<double> cluster_tol = {},
                                       double resonance_tol = kResonanceTol);

/// One cyclic state |mu_n, a>: eigenvector of U(T) within the cluster of
/// mu_n, with total phase alpha = mu_n T.
struct CyclicState {
  double mu = 0.0;
  int cluster = 0;
  int index = 0;  // a within the cluster
  Vector state;
  double alpha = 0.0;
  double alpha_mod = 0.0;  // reduced to (-pi, pi]
};

std::vector<CyclicState> cyclic_states(const FloquetDecomposition& fd);

/// CSV trace export: header then one row per node,
/// k, t_k, re/im of each entry in row-major order.
void write_trace_csv(std::ostream& out, const TimeGrid& grid,
                     std::span<const UnitaryOperator> samples);

/// Wrap an angle to (-pi, pi].
double principal_angle(double theta);

}  // namespace floquet
