#include "floquet/matrix_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <numeric>

namespace floquet {

namespace {

void require_square(const Matrix& a, const char* who) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw ValidationError(fmt::format("{}: need a square matrix, got {}x{}",
                                      who, a.rows(), a.cols()));
  }
  if (!a.allFinite()) {
    throw ValidationError(fmt::format("{}: non-finite entries", who));
  }
}

// Phase-fix each column so its largest-magnitude entry is real positive.
void fix_column_phases(Matrix& block) {
  for (Eigen::Index c = 0; c < block.cols(); ++c) {
    Eigen::Index imax = 0;
    block.col(c).cwiseAbs().maxCoeff(&imax);
    const Complex z = block(imax, c);
    if (std::abs(z) > 0) block.col(c) *= std::conj(z) / std::abs(z);
  }
}

Eigen::Index largest_entry_row(const Eigen::VectorXcd& v) {
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  return imax;
}

}  // namespace

double hermiticity_defect(const Matrix& a) {
  return (a - a.adjoint()).norm();
}

double unitarity_defect(const Matrix& u) {
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).norm();
}

double default_cluster_tol(const Matrix& a) {
  return 1e-8 * std::max(1.0, a.norm());
}

HermitianOperator::HermitianOperator(Matrix a) : a_(std::move(a)) {
  require_square(a_, "HermitianOperator");
  const double defect = hermiticity_defect(a_);
  const double bound = 1e-12 * std::max(1.0, a_.norm());
  if (defect > bound) {
    throw ValidationError(fmt::format(
        "HermitianOperator: asymmetry ||A - A^+||_F = {:.3e} exceeds {:.3e}",
        defect, bound));
  }
}

UnitaryOperator::UnitaryOperator(Matrix u) : u_(std::move(u)) {
  require_square(u_, "UnitaryOperator");
  const double defect = unitarity_defect(u_);
  const double bound = 1e-10 * static_cast<double>(u_.rows());
  if (defect > bound) {
    throw ValidationError(fmt::format(
        "UnitaryOperator: ||U^+U - 1||_F = {:.3e} exceeds {:.3e}", defect,
        bound));
  }
}

UnitaryOperator UnitaryOperator::identity(Eigen::Index dim) {
  return UnitaryOperator(Matrix::Identity(dim, dim));
}

Matrix SpectralDecomposition::reconstruct() const {
  Matrix sum = Matrix::Zero(dim, dim);
  for (const auto& c : clusters) sum += c.eigenvalue * c.projector();
  return sum;
}

std::vector<double> SpectralDecomposition::eigenvalues() const {
  std::vector<double> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.eigenvalue);
  return out;
}

std::vector<int> SpectralDecomposition::multiplicities() const {
  std::vector<int> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.multiplicity);
  return out;
}

std::vector<double> SpectralDecomposition::raw_spectrum() const {
  std::vector<double> out;
  for (const auto& c : clusters)
    out.insert(out.end(), c.raw_eigenvalues.begin(), c.raw_eigenvalues.end());
  return out;
}

const EigenCluster& SpectralDecomposition::nearest(
    double value, std::optional<double> tol) const {
  const double bound = tol.value_or(std::max(cluster_tol * 10.0, 1e-8));
  const EigenCluster* best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& c : clusters) {
    const double d = std::abs(c.eigenvalue - value);
    if (d < best_dist) {
      best_dist = d;
      best = &c;
    }
  }
  if (best == nullptr || best_dist > bound) {
    throw ValidationError(fmt::format(
        "SpectralDecomposition: no cluster within {:.3e} of eigenvalue {}",
        bound, value));
  }
  return *best;
}

SpectralDecomposition herm_eig(const HermitianOperator& a,
                               std::optional<double> cluster_tol) {
  const Matrix& m = a.mat();
  const double tol = cluster_tol.value_or(default_cluster_tol(m));
  if (tol <= 0) throw ValidationError("herm_eig: cluster_tol must be > 0");

  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw Error("herm_eig: eigendecomposition failed to converge");
  }

  const Eigen::Index n = m.rows();
  // descending order
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());

  SpectralDecomposition out;
  out.cluster_tol = tol;
  out.dim = n;

  Eigen::Index pos = 0;
  while (pos < n) {
    Eigen::Index end = pos + 1;
    while (end < n &&
           solver.eigenvalues()(order[end - 1]) -
                   solver.eigenvalues()(order[end]) <=
               tol) {
      ++end;
    }
    const Eigen::Index l = end - pos;
    const double spread = solver.eigenvalues()(order[pos]) -
                          solver.eigenvalues()(order[end - 1]);
    if (spread > tol) {
      throw ValidationError(fmt::format(
          "herm_eig: ambiguous clustering, chained spread {:.3e} exceeds "
          "cluster_tol {:.3e}",
          spread, tol));
    }

    EigenCluster cluster;
    cluster.multiplicity = static_cast<int>(l);
    cluster.basis.resize(n, l);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < l; ++i) {
      cluster.basis.col(i) = solver.eigenvectors().col(order[pos + i]);
      cluster.raw_eigenvalues.push_back(solver.eigenvalues()(order[pos + i]));
      sum += cluster.raw_eigenvalues.back();
    }
    cluster.eigenvalue = sum / static_cast<double>(l);
    fix_column_phases(cluster.basis);
    if (l > 1) {
      // ties in the raw values leave the solver order arbitrary; pin it by
      // the row of each column's dominant entry
      std::vector<Eigen::Index> cols(l);
      std::iota(cols.begin(), cols.end(), 0);
      std::stable_sort(cols.begin(), cols.end(),
                       [&](Eigen::Index x, Eigen::Index y) {
                         const double dx = cluster.raw_eigenvalues[x] -
                                           cluster.raw_eigenvalues[y];
                         if (std::abs(dx) > 0) return dx > 0;
                         return largest_entry_row(cluster.basis.col(x)) <
                                largest_entry_row(cluster.basis.col(y));
                       });
      Matrix sorted(n, l);
      std::vector<double> raw_sorted;
      for (Eigen::Index i = 0; i < l; ++i) {
        sorted.col(i) = cluster.basis.col(cols[i]);
        raw_sorted.push_back(cluster.raw_eigenvalues[cols[i]]);
      }
      cluster.basis = std::move(sorted);
      cluster.raw_eigenvalues = std::move(raw_sorted);
    }
    out.clusters.push_back(std::move(cluster));
    pos = end;
  }
  return out;
}

UnitaryOperator unitary_exp(const HermitianOperator& a, double s) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.mat());
  if (solver.info() != Eigen::Success) {
    throw Error("unitary_exp: eigendecomposition failed to converge");
  }
  const Eigen::Index n = a.dim();
  Vector phases(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    phases(i) = std::exp(Complex(0.0, s * solver.eigenvalues()(i)));
  }
  Matrix u = solver.eigenvectors() * phases.asDiagonal() *
             solver.eigenvectors().adjoint();
  return UnitaryOperator(std::move(u));
}

HermitianOperator unitary_log(const UnitaryOperator& u, double resonance_tol) {
  const Eigen::Index n = u.dim();
  Eigen::ComplexSchur<Matrix> schur(u.mat(), true);
  if (schur.info() != Eigen::Success) {
    throw Error("unitary_log: Schur decomposition failed to converge");
  }
  // a unitary matrix is normal, so the Schur form is diagonal
  Eigen::VectorXd theta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = std::arg(schur.matrixT()(i, i));
    if (t <= -std::numbers::pi) t = std::numbers::pi;  // zone (-pi, pi]
    if (std::numbers::pi - std::abs(t) < resonance_tol) {
      throw BranchBoundaryError(fmt::format(
          "unitary_log: eigenphase {:.12f} within {:.1e} of the branch "
          "boundary at pi",
          t, resonance_tol));
    }
    theta(i) = t;
  }
  Matrix k = schur.matrixU() * theta.cast<Complex>().asDiagonal() *
             schur.matrixU().adjoint();
  k = 0.5 * (k + k.adjoint().eval());
  HermitianOperator out{std::move(k)};
  const double recon =
      (unitary_exp(out, 1.0).mat() - u.mat()).norm();
  if (recon > 1e-10 * std::max(1.0, static_cast<double>(n))) {
    throw ToleranceError(fmt::format(
        "unitary_log: e^{{iK}} reconstruction residual {:.3e}", recon));
  }
  return out;
}

UnitaryOperator polar_unitary(const Matrix& a) {
  require_square(a, "polar_unitary");
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (smin <= 1e-14 * std::max(1.0, smax)) {
    throw ValidationError(fmt::format(
        "polar_unitary: singular input (sigma_min = {:.3e})", smin));
  }
  return UnitaryOperator(svd.matrixU() * svd.matrixV().adjoint());
}

double commutator_norm(const Matrix& a, const Matrix& b) {
  require_square(a, "commutator_norm");
  require_square(b, "commutator_norm");
  if (a.rows() != b.rows()) {
    throw ValidationError(fmt::format(
        "commutator_norm: dimension mismatch {} vs {}", a.rows(), b.rows()));
  }
  return (a * b - b * a).norm();
}

}  // namespace floquet
