#include "floquet/phases.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace floquet {

namespace {

void check_unit_norms(std::span<const Vector> states, const char* who) {
  for (const auto& v : states) {
    if (std::abs(v.norm() - 1.0) > 1e-6) {
      throw ValidationError(
          fmt::format("{}: state norm {:.9f} is not 1", who, v.norm()));
    }
  }
}

// 4th-order first derivative of a matrix sequence, one-sided at the ends.
std::vector<Matrix> differentiate5(const std::vector<Matrix>& g, double h) {
  const int n = static_cast<int>(g.size()) - 1;
  std::vector<Matrix> d(n + 1);
  for (int k = 0; k <= n; ++k) {
    if (k >= 2 && k <= n - 2) {
      d[k] = (-g[k + 2] + 8.0 * g[k + 1] - 8.0 * g[k - 1] + g[k - 2]) /
             (12.0 * h);
    } else if (k == 0) {
      d[k] = (-25.0 * g[0] + 48.0 * g[1] - 36.0 * g[2] + 16.0 * g[3] -
              3.0 * g[4]) /
             (12.0 * h);
    } else if (k == 1) {
      d[k] = (-3.0 * g[0] - 10.0 * g[1] + 18.0 * g[2] - 6.0 * g[3] + g[4]) /
             (12.0 * h);
    } else if (k == n - 1) {
      d[k] = -(-3.0 * g[n] - 10.0 * g[n - 1] + 18.0 * g[n - 2] -
               6.0 * g[n - 3] + g[n - 4]) /
             (12.0 * h);
    } else {
      d[k] = -(-25.0 * g[n] + 48.0 * g[n - 1] - 36.0 * g[n - 2] +
               16.0 * g[n - 3] - 3.0 * g[n - 4]) /
             (12.0 * h);
    }
  }
  return d;
}

std::vector<double> unitary_eigenphases(const Matrix& u) {
  Eigen::ComplexSchur<Matrix> schur(u, false);
  if (schur.info() != Eigen::Success) {
    throw Error("eigenphases: Schur decomposition failed");
  }
  std::vector<double> phases;
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const Complex z = schur.matrixT()(i, i);
    if (std::abs(std::abs(z) - 1.0) > 1e-8) {
      throw ToleranceError(fmt::format(
          "eigenphases: eigenvalue modulus {:.9f} off the unit circle",
          std::abs(z)));
    }
    phases.push_back(std::arg(z));
  }
  std::sort(phases.begin(), phases.end());
  return phases;
}

Matrix closure_or_identity(const Matrix& closure, Eigen::Index l) {
  if (closure.size() == 0) return Matrix::Identity(l, l);
  return closure;
}

}  // namespace

double dynamical_phase(std::span<const Vector> psi,
                       const PeriodicHamiltonian& h, const TimeGrid& grid) {
  if (static_cast<int>(psi.size()) != grid.nodes()) {
    throw ValidationError("dynamical_phase: trace does not match the grid");
  }
  if (grid.steps % 2 != 0) {
    throw ValidationError("dynamical_phase: Simpson quadrature needs even N");
  }
  check_unit_norms(psi, "dynamical_phase");
  const int n = grid.steps;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double f =
        std::real(psi[k].dot(h(grid.node(k)) * psi[k]));
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += w * f;
  }
  return -sum * grid.dt() / 3.0;
}

GeometricPhase geometric_phase(std::span<const Vector> phi,
                               double min_overlap) {
  if (phi.size() < 3) {
    throw ValidationError("geometric_phase: need at least 3 nodes");
  }
  check_unit_norms(phi, "geometric_phase");
  if ((phi.back() - phi.front()).norm() > 1e-6) {
    throw ValidationError(
        "geometric_phase: chain is not single-valued (phi(T) != phi(0))");
  }
  double raw = 0.0;
  for (size_t k = 0; k + 1 < phi.size(); ++k) {
    const Complex overlap = phi[k].dot(phi[k + 1]);
    if (std::abs(overlap) < min_overlap) {
      throw ToleranceError(fmt::format(
          "geometric_phase: overlap modulus {:.3f} at node {} below {}; grid "
          "too coarse",
          std::abs(overlap), k, min_overlap));
    }
    raw -= std::arg(overlap);
  }
  return GeometricPhase{principal_angle(raw), raw};
}

double total_phase_check(const FloquetDecomposition& fd, double delta,
                         double gamma, int cluster_index) {
  if (cluster_index < 0 ||
      cluster_index >= static_cast<int>(fd.m_spectrum.clusters.size())) {
    throw ValidationError("total_phase_check: cluster index out of range");
  }
  const double alpha =
      fd.m_spectrum.clusters[cluster_index].eigenvalue * fd.period();
  return std::abs(principal_angle(alpha - delta - gamma));
}

ConnectionTrace connection_matrices(const FrameTrace& frame,
                                    const PeriodicHamiltonian& h,
                                    double asymmetry_tol) {
  const int n = frame.grid.steps;
  if (n < 4) throw ValidationError("connection_matrices: N must be >= 4");
  std::vector<Matrix> g;
  g.reserve(n + 1);
  for (int k = 0; k <= n; ++k) g.push_back(frame.smooth(k));
  const std::vector<Matrix> dg = differentiate5(g, frame.grid.dt());

  ConnectionTrace out;
  out.eigenvalue = frame.eigenvalue;
  out.gauge = frame.gauge;
  out.grid = frame.grid;
  out.closure = frame.closure;
  for (int k = 0; k <= n; ++k) {
    Matrix e = g[k].adjoint() * h(frame.grid.node(k)) * g[k];
    e = 0.5 * (e + e.adjoint().eval());
    Matrix a = Complex(0, 1) * (g[k].adjoint() * dg[k]);
    out.max_asymmetry =
        std::max(out.max_asymmetry, hermiticity_defect(a));
    a = 0.5 * (a + a.adjoint().eval());
    out.delta.push_back(e - a);
    out.e.push_back(std::move(e));
    out.a.push_back(std::move(a));
  }
  if (out.max_asymmetry > asymmetry_tol) {
    throw ToleranceError(fmt::format(
        "connection_matrices: connection asymmetry {:.3e} exceeds {:.1e}; "
        "grid too coarse",
        out.max_asymmetry, asymmetry_tol));
  }
  return out;
}

TransportResult transport_unitary(const ConnectionTrace& conn,
                                  StepMethod method, double drift_tol,
                                  bool flip_sign) {
  const double sign = flip_sign ? 1.0 : -1.0;
  const auto useq =
      time_ordered_exp(std::span<const Matrix>(conn.delta), conn.grid, method,
                       sign);
  TransportResult out;
  out.u.reserve(useq.size());
  for (const auto& u : useq) {
    out.unitarity_drift =
        std::max(out.unitarity_drift, unitarity_defect(u.mat()));
    out.u.push_back(u.mat());
  }
  if (out.unitarity_drift > drift_tol) {
    throw ToleranceError(fmt::format(
        "transport_unitary: unitarity drift {:.3e} exceeds {:.1e}",
        out.unitarity_drift, drift_tol));
  }
  const Matrix closure =
      closure_or_identity(conn.closure, conn.subspace_dim());
  out.holonomy = closure * out.u.back();
  out.u.back() = out.holonomy;
  out.eigenphases = unitary_eigenphases(out.holonomy);
  return out;
}

FactorizedTransport factorized_transport(const ConnectionTrace& conn,
                                         double commute_tol,
                                         StepMethod method) {
  FactorizedTransport out;
  for (const auto& e : conn.e) {
    for (const auto& a : conn.a) {
      out.max_cross_commutator =
          std::max(out.max_cross_commutator, commutator_norm(e, a));
    }
  }
  out.applicable = out.max_cross_commutator <= commute_tol;
  if (!out.applicable) return out;

  const auto ve = time_ordered_exp(std::span<const Matrix>(conn.e), conn.grid,
                                   method, -1.0);
  const auto wa = time_ordered_exp(std::span<const Matrix>(conn.a), conn.grid,
                                   method, 1.0);
  out.dynamical_factor = ve.back().mat();
  out.geometric_factor = wa.back().mat();
  out.holonomy = closure_or_identity(conn.closure, conn.subspace_dim()) *
                 out.dynamical_factor * out.geometric_factor;
  return out;
}

double phase_multiset_distance(std::span<const double> a,
                               std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ValidationError("phase_multiset_distance: multiset sizes differ");
  }
  const size_t l = a.size();
  auto matched_max = [&](std::span<const size_t> perm) {
    double worst = 0.0;
    for (size_t i = 0; i < l; ++i) {
      worst = std::max(worst, std::abs(principal_angle(a[i] - b[perm[i]])));
    }
    return worst;
  };
  std::vector<size_t> perm(l);
  std::iota(perm.begin(), perm.end(), 0);
  if (l > 6) return matched_max(perm);  // sorted pairing for large sets
  double best = std::numeric_limits<double>::infinity();
  do {
    best = std::min(best, matched_max(perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

HolonomyComparison holonomy_invariants(std::span<const TransportResult> results) {
  if (results.empty()) {
    throw ValidationError("holonomy_invariants: need at least one gauge");
  }
  HolonomyComparison out;
  for (const auto& r : results) out.phase_multisets.push_back(r.eigenphases);
  for (size_t i = 0; i + 1 < results.size(); ++i) {
    for (size_t j = i + 1; j < results.size(); ++j) {
      out.max_matching_distance = std::max(
          out.max_matching_distance,
          phase_multiset_distance(out.phase_multisets[i],
                                  out.phase_multisets[j]));
    }
  }
  return out;
}

double frame_reconstruction_check(const FrameTrace& frame,
                                  const TransportResult& transport,
                                  const PropagatorTrace& trace) {
  if (frame.grid.steps != trace.grid.steps ||
      static_cast<int>(transport.u.size()) != frame.grid.nodes()) {
    throw ValidationError("frame_reconstruction_check: inconsistent grids");
  }
  const Matrix& frame0 = frame.frames.front();
  double worst = 0.0;
  for (int k = 0; k < frame.grid.nodes(); ++k) {
    worst = std::max(worst, (trace.u[k].mat() * frame0 -
                             frame.frames[k] * transport.u[k])
                                .norm());
  }
  return worst;
}

}  // namespace floquet
