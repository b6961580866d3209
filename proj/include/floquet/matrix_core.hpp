#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "floquet/errors.hpp"

namespace floquet {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Frobenius norm of A - A^dagger.
double hermiticity_defect(const Matrix& a);

/// Frobenius norm of U^dagger U - 1.
double unitarity_defect(const Matrix& u);

/// Default clustering width for herm_eig: 1e-8 * max(1, ||A||_F).
double default_cluster_tol(const Matrix& a);

/// Guard width around the principal-branch boundary at pi (radians).
inline constexpr double kResonanceTol = 1e-6;

/// Square complex matrix checked Hermitian on construction,
/// ||A - A^dagger||_F <= 1e-12 * max(1, ||A||_F).
class HermitianOperator {
 public:
  explicit HermitianOperator(Matrix a);

  const Matrix& mat() const { return a_; }
  Eigen::Index dim() const { return a_.rows(); }

 private:
  Matrix a_;
};

/// Square complex matrix checked unitary on construction,
/// ||U^dagger U - 1||_F <= 1e-10 * dim.
class UnitaryOperator {
 public:
  explicit UnitaryOperator(Matrix u);

  static UnitaryOperator identity(Eigen::Index dim);

  const Matrix& mat() const { return u_; }
  Eigen::Index dim() const { return u_.rows(); }

 private:
  Matrix u_;
};

/// One eigenvalue cluster of a Hermitian operator: the representative value
/// (mean of the raw eigenvalues), the orthonormal eigenvector block, and the
/// raw values it absorbed.
struct EigenCluster {
  double eigenvalue = 0.0;
  int multiplicity = 0;
  Matrix basis;  // dim x multiplicity, orthonormal columns
  std::vector<double> raw_eigenvalues;

  Matrix projector() const { return basis * basis.adjoint(); }
};

/// Clustered spectral decomposition, clusters sorted by descending eigenvalue.
struct SpectralDecomposition {
  std::vector<EigenCluster> clusters;
  double cluster_tol = 0.0;
  Eigen::Index dim = 0;

  Matrix reconstruct() const;
  std::vector<double> eigenvalues() const;
  std::vector<int> multiplicities() const;

  /// Cluster whose eigenvalue is nearest to `value`; throws ValidationError
  /// if the distance exceeds `tol` (default: cluster_tol scaled up).
  const EigenCluster& nearest(double value, std::optional<double> tol = {}) const;

  /// All raw eigenvalues expanded by multiplicity, descending.
  std::vector<double> raw_spectrum() const;
};

/// Hermitian eigendecomposition with degeneracy clustering. Raw eigenvalues
/// are grouped greedily at gaps larger than cluster_tol; a chained cluster
/// whose internal spread also exceeds cluster_tol is rejected as ambiguous.
/// Column gauge is deterministic: descending raw eigenvalue, ties broken by
/// the row of the largest-magnitude entry, each column phased so that entry
/// is real positive.
SpectralDecomposition herm_eig(const HermitianOperator& a,
                               std::optional<double> cluster_tol = {});

/// e^{i s A} for Hermitian A, exact on the eigenbasis.
UnitaryOperator unitary_exp(const HermitianOperator& a, double s);

/// Principal logarithm: Hermitian K with U = e^{iK} and eigenphases in
/// (-pi, pi]. Throws BranchBoundaryError if an eigenphase lies within
/// resonance_tol of the branch point at pi.
HermitianOperator unitary_log(const UnitaryOperator& u,
                              double resonance_tol = kResonanceTol);

/// Unitary factor of the polar decomposition; the Frobenius-nearest unitary.
UnitaryOperator polar_unitary(const Matrix& a);

/// ||AB - BA||_F.
double commutator_norm(const Matrix& a, const Matrix& b);

}  // namespace floquet
