#pragma once

#include <optional>
#include <span>
#include <vector>

#include "floquet/matrix_core.hpp"
#include "floquet/propagator.hpp"

namespace floquet {

/// Initial data of a dynamical invariant: real levels with orthonormal
/// eigenvector blocks, complete over the space. I(0) = sum_n c_n B_n B_n^+.
struct InvariantSpec {
  struct Level {
    double value = 0.0;
    Matrix basis;  // dim x l_n, orthonormal columns
  };

  std::vector<Level> levels;
  Eigen::Index dim = 0;

  /// From weights c_n and a complete orthonormal set of state columns.
  static InvariantSpec from_weights(std::span<const double> weights,
                                    const Matrix& states);
  /// From spectral data; equal values may be split across entries.
  static InvariantSpec from_levels(std::vector<Level> levels);

  HermitianOperator initial() const;
};

/// Samples I(t_k) of a dynamical invariant plus the spectrum of I(0).
struct InvariantTrace {
  TimeGrid grid;
  std::vector<HermitianOperator> samples;
  SpectralDecomposition spectrum;  // of I(0)

  Eigen::Index dim() const { return samples.front().dim(); }
};

/// I(t_k) = U(t_k) I(0) U(t_k)^+.
InvariantTrace invariant_from_initial(const InvariantSpec& spec,
                                      const PropagatorTrace& trace);

/// I(t_k) = Z(t_k) M Z(t_k)^+; I(0) = M and the trace is closed exactly at
/// the last node.
InvariantTrace invariant_from_floquet(const FloquetDecomposition& fd);

/// Max interior-node residual of dI/dt = i[I, H] with centered differences;
/// O(h^2) for an exact invariant. Requires N >= 4.
double check_invariant_ode(const InvariantTrace& inv,
                           const PeriodicHamiltonian& h);

/// Max deviation of the sorted instantaneous spectrum from the node-0 one.
double spectrum_drift(const InvariantTrace& inv);

/// ||I(t_N) - I(t_0)||_F.
double periodicity_defect(const InvariantTrace& inv);

/// ||[I0, M]||_F.
double commutation_check(const HermitianOperator& i0,
                         const HermitianOperator& m);

enum class FrameGauge { floquet, aligned };

FrameGauge gauge_from_string(const std::string& name);
std::string to_string(FrameGauge g);

/// Single-valued orthonormal eigenframes of one degeneracy subspace.
/// frames[N] is forced equal to frames[0]; the unforced continuation is kept
/// in smooth_end and the closing unitary polar(frames[0]^+ smooth_end) in
/// closure, to be absorbed into the holonomy downstream.
struct FrameTrace {
  double eigenvalue = 0.0;
  FrameGauge gauge = FrameGauge::floquet;
  TimeGrid grid;
  std::vector<Matrix> frames;  // N+1 blocks, dim x l
  Matrix smooth_end;           // unforced frame at t_N
  Matrix closure;              // l x l unitary

  int subspace_dim() const { return static_cast<int>(frames.front().cols()); }
  /// Node-k block for differentiation: the smooth continuation at k = N.
  const Matrix& smooth(int k) const;
};

/// Commutation gate for the floquet gauge: wide enough to absorb the
/// integrator error in M, narrow enough to reject genuinely non-commuting
/// invariants (whose residual is O(||I0|| ||M||)).
double floquet_gauge_tolerance(const HermitianOperator& i0,
                               const HermitianOperator& m);

/// Transport a single-valued eigenframe of I(t) through the lambda subspace.
///
/// floquet gauge: frame(t_k) = Z(t_k) frame(0); requires fd and
/// ||[I(0), M]|| <= tol (default floquet_gauge_tolerance).
/// aligned gauge: successive frames maximize overlap (project onto the
/// next eigenbasis, right-multiply by the polar factor of the overlap).
/// initial_frame (dim x l, orthonormal, spanning the lambda subspace of
/// I(0)) defaults to the herm_eig cluster basis. A change of cluster
/// multiplicities along t aborts with LevelCrossingError.
FrameTrace transport_eigenframes(const InvariantTrace& inv, double lambda,
                                 FrameGauge gauge,
                                 const FloquetDecomposition* fd = nullptr,
                                 const Matrix* initial_frame = nullptr,
                                 std::optional<double> tol = {});

/// Max cross-subspace Lewis residual:
/// || F_m^+ (H - i d/dt) F_n ||_F over interior nodes and pairs m != n,
/// centered differences. Frames must cover the full space.
double check_lewis_relation(std::span<const FrameTrace> frames,
                            const PeriodicHamiltonian& h);

/// Per-degenerate-projector part of the necessary-condition report.
struct ProjectorCondition {
  double eigenvalue = 0.0;
  int multiplicity = 0;
  double invariance_residual = 0.0;      // ||M L - L M L||_F
  double eigenprojector_residual = 0.0;  // min_mu ||(M - mu) L||_F
  bool is_m_eigenprojector = false;
};

/// Necessary condition for a non-Abelian phase: I(0)
/// commutes with M yet has a degenerate eigenprojector that is not an
/// M-eigenprojector. Both commutation residuals are reported since
/// [e^{iMT}, I0] = 0 does not always imply [M, I0] = 0.
struct NonAbelianConditionReport {
  double commutation_residual = 0.0;         // ||[I0, M]||
  double strobe_commutation_residual = 0.0;  // ||[e^{iMT}, I0]||
  bool commutes_with_m = false;
  std::vector<ProjectorCondition> degenerate_projectors;
  bool satisfied = false;
  double tol = 0.0;
};

NonAbelianConditionReport nonabelian_condition(const SpectralDecomposition& i0_spec,
                                               const FloquetDecomposition& fd,
                                               std::optional<double> tol = {});

}  // namespace floquet
