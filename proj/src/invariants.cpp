#include "floquet/invariants.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace floquet {

namespace {

void check_frame_block(const Matrix& frame, Eigen::Index dim, int l,
                       const char* who) {
  if (frame.rows() != dim || frame.cols() != l) {
    throw ValidationError(fmt::format("{}: frame block must be {}x{}, got {}x{}",
                                      who, dim, l, frame.rows(), frame.cols()));
  }
  const double ortho =
      (frame.adjoint() * frame - Matrix::Identity(l, l)).norm();
  if (ortho > 1e-8) {
    throw ValidationError(fmt::format(
        "{}: frame columns not orthonormal (defect {:.3e})", who, ortho));
  }
}

std::vector<double> sorted_eigenvalues(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a, Eigen::EigenvaluesOnly);
  std::vector<double> v(solver.eigenvalues().data(),
                        solver.eigenvalues().data() + a.rows());
  return v;  // ascending
}

}  // namespace

InvariantSpec InvariantSpec::from_weights(std::span<const double> weights,
                                          const Matrix& states) {
  if (static_cast<Eigen::Index>(weights.size()) != states.cols()) {
    throw ValidationError("InvariantSpec: one weight per state column required");
  }
  std::vector<Level> levels;
  for (Eigen::Index i = 0; i < states.cols(); ++i) {
    levels.push_back(Level{weights[i], states.col(i)});
  }
  return from_levels(std::move(levels));
}

InvariantSpec InvariantSpec::from_levels(std::vector<Level> levels) {
  if (levels.empty()) throw ValidationError("InvariantSpec: no levels given");
  InvariantSpec spec;
  spec.dim = levels.front().basis.rows();
  Eigen::Index total = 0;
  Matrix all(spec.dim, spec.dim);
  for (const auto& level : levels) {
    if (!std::isfinite(level.value)) {
      throw ValidationError("InvariantSpec: weights must be finite reals");
    }
    if (level.basis.rows() != spec.dim) {
      throw ValidationError("InvariantSpec: inconsistent dimensions");
    }
    if (total + level.basis.cols() > spec.dim) {
      throw ValidationError("InvariantSpec: more vectors than dimensions");
    }
    all.block(0, total, spec.dim, level.basis.cols()) = level.basis;
    total += level.basis.cols();
  }
  if (total != spec.dim) {
    throw ValidationError(fmt::format(
        "InvariantSpec: blocks must be complete, got {} of {} columns", total,
        spec.dim));
  }
  const double ortho =
      (all.adjoint() * all - Matrix::Identity(spec.dim, spec.dim)).norm();
  if (ortho > 1e-8) {
    throw ValidationError(fmt::format(
        "InvariantSpec: state vectors not orthonormal (defect {:.3e})", ortho));
  }
  spec.levels = std::move(levels);
  return spec;
}

HermitianOperator InvariantSpec::initial() const {
  Matrix i0 = Matrix::Zero(dim, dim);
  for (const auto& level : levels) {
    i0 += level.value * level.basis * level.basis.adjoint();
  }
  i0 = 0.5 * (i0 + i0.adjoint().eval());
  return HermitianOperator(std::move(i0));
}

InvariantTrace invariant_from_initial(const InvariantSpec& spec,
                                      const PropagatorTrace& trace) {
  if (spec.dim != trace.dim()) {
    throw ValidationError(fmt::format(
        "invariant_from_initial: spec dim {} != trace dim {}", spec.dim,
        trace.dim()));
  }
  const HermitianOperator i0 = spec.initial();
  InvariantTrace inv{trace.grid, {}, herm_eig(i0)};
  inv.samples.reserve(trace.u.size());
  for (const auto& u : trace.u) {
    Matrix ik = u.mat() * i0.mat() * u.mat().adjoint();
    ik = 0.5 * (ik + ik.adjoint().eval());
    inv.samples.emplace_back(std::move(ik));
  }
  return inv;
}

InvariantTrace invariant_from_floquet(const FloquetDecomposition& fd) {
  InvariantTrace inv{fd.grid, {}, fd.m_spectrum};
  inv.samples.reserve(fd.z.size());
  for (size_t k = 0; k < fd.z.size(); ++k) {
    if (k == 0 || k + 1 == fd.z.size()) {
      inv.samples.push_back(fd.m);  // closed exactly at the endpoints
      continue;
    }
    Matrix ik = fd.z[k].mat() * fd.m.mat() * fd.z[k].mat().adjoint();
    ik = 0.5 * (ik + ik.adjoint().eval());
    inv.samples.emplace_back(std::move(ik));
  }
  return inv;
}

double check_invariant_ode(const InvariantTrace& inv,
                           const PeriodicHamiltonian& h) {
  const int n = inv.grid.steps;
  if (n < 4) throw ValidationError("check_invariant_ode: N must be >= 4");
  const double dt = inv.grid.dt();
  double worst = 0.0;
  for (int k = 1; k < n; ++k) {
    const Matrix diff =
        (inv.samples[k + 1].mat() - inv.samples[k - 1].mat()) / (2.0 * dt);
    const Matrix hk = h(inv.grid.node(k));
    const Matrix& ik = inv.samples[k].mat();
    const Matrix rhs = Complex(0, 1) * (ik * hk - hk * ik);
    worst = std::max(worst, (diff - rhs).norm());
  }
  return worst;
}

double spectrum_drift(const InvariantTrace& inv) {
  const auto ref = sorted_eigenvalues(inv.samples.front().mat());
  double worst = 0.0;
  for (const auto& sample : inv.samples) {
    const auto cur = sorted_eigenvalues(sample.mat());
    for (size_t i = 0; i < ref.size(); ++i) {
      worst = std::max(worst, std::abs(cur[i] - ref[i]));
    }
  }
  return worst;
}

double periodicity_defect(const InvariantTrace& inv) {
  return (inv.samples.back().mat() - inv.samples.front().mat()).norm();
}

double commutation_check(const HermitianOperator& i0,
                         const HermitianOperator& m) {
  return commutator_norm(i0.mat(), m.mat());
}

FrameGauge gauge_from_string(const std::string& name) {
  if (name == "floquet") return FrameGauge::floquet;
  if (name == "aligned") return FrameGauge::aligned;
  throw ValidationError(fmt::format("unknown gauge '{}'", name));
}

std::string to_string(FrameGauge g) {
  return g == FrameGauge::floquet ? "floquet" : "aligned";
}

const Matrix& FrameTrace::smooth(int k) const {
  return k == grid.steps ? smooth_end : frames[k];
}

double floquet_gauge_tolerance(const HermitianOperator& i0,
                               const HermitianOperator& m) {
  return 1e-3 * std::max(1.0, i0.mat().norm() * m.mat().norm());
}

FrameTrace transport_eigenframes(const InvariantTrace& inv, double lambda,
                                 FrameGauge gauge,
                                 const FloquetDecomposition* fd,
                                 const Matrix* initial_frame,
                                 std::optional<double> tol) {
  const Eigen::Index dim = inv.dim();
  const EigenCluster& cluster0 = inv.spectrum.nearest(lambda);
  const int l = cluster0.multiplicity;

  Matrix frame0 = initial_frame ? *initial_frame : cluster0.basis;
  check_frame_block(frame0, dim, l, "transport_eigenframes");
  const Matrix proj0 = cluster0.projector();
  const double inplane = (proj0 * frame0 - frame0).norm();
  if (inplane > std::max(inv.spectrum.cluster_tol * 10.0, 1e-8)) {
    throw ValidationError(fmt::format(
        "transport_eigenframes: initial frame leaves the lambda = {} "
        "subspace (residual {:.3e})",
        lambda, inplane));
  }

  FrameTrace out;
  out.eigenvalue = cluster0.eigenvalue;
  out.gauge = gauge;
  out.grid = inv.grid;
  out.frames.reserve(inv.grid.nodes());

  const int n = inv.grid.steps;
  if (gauge == FrameGauge::floquet) {
    if (fd == nullptr) {
      throw ValidationError(
          "transport_eigenframes: floquet gauge needs a FloquetDecomposition");
    }
    const double gate_tol =
        tol.value_or(floquet_gauge_tolerance(inv.samples.front(), fd->m));
    const double comm = commutation_check(inv.samples.front(), fd->m);
    if (comm > gate_tol) {
      throw ValidationError(fmt::format(
          "transport_eigenframes: [I(0), M] residual {:.3e} exceeds {:.3e}; "
          "the floquet gauge requires a commuting invariant",
          comm, gate_tol));
    }
    for (int k = 0; k < n; ++k) out.frames.push_back(fd->z[k].mat() * frame0);
    out.smooth_end = fd->z[n].mat() * frame0;
  } else {
    const auto signature = inv.spectrum.multiplicities();
    Matrix f = frame0;
    out.frames.push_back(f);
    for (int k = 1; k <= n; ++k) {
      const SpectralDecomposition sd =
          herm_eig(inv.samples[k], inv.spectrum.cluster_tol);
      if (sd.multiplicities() != signature) {
        throw LevelCrossingError(fmt::format(
            "transport_eigenframes: degeneracy structure changed at node {} "
            "(level crossing)",
            k));
      }
      const Matrix& basis = sd.nearest(lambda).basis;
      const Matrix overlap = basis.adjoint() * f;
      Eigen::JacobiSVD<Matrix> svd(overlap);
      if (svd.singularValues()(l - 1) < 0.1) {
        throw ToleranceError(fmt::format(
            "transport_eigenframes: frame overlap {:.3f} at node {} below "
            "0.1; grid too coarse",
            svd.singularValues()(l - 1), k));
      }
      f = basis * polar_unitary(overlap).mat();
      if (k < n) out.frames.push_back(f);
    }
    out.smooth_end = f;
  }

  out.closure = polar_unitary(frame0.adjoint() * out.smooth_end).mat();
  out.frames.push_back(frame0);  // single-valued by construction
  return out;
}

double check_lewis_relation(std::span<const FrameTrace> frames,
                            const PeriodicHamiltonian& h) {
  if (frames.empty()) {
    throw ValidationError("check_lewis_relation: no frames given");
  }
  const int n = frames.front().grid.steps;
  Eigen::Index total = 0;
  for (const auto& f : frames) {
    if (f.grid.steps != n) {
      throw ValidationError("check_lewis_relation: frames on different grids");
    }
    total += f.subspace_dim();
  }
  if (total != h.dim()) {
    throw ValidationError(fmt::format(
        "check_lewis_relation: incomplete frame set ({} of {} columns)", total,
        h.dim()));
  }
  if (frames.size() < 2) return 0.0;  // no cross-subspace pairs

  const double dt = frames.front().grid.dt();
  double worst = 0.0;
  for (int k = 1; k < n; ++k) {
    const Matrix hk = h(frames.front().grid.node(k));
    for (size_t b = 0; b < frames.size(); ++b) {
      const Matrix deriv =
          (frames[b].smooth(k + 1) - frames[b].smooth(k - 1)) / (2.0 * dt);
      const Matrix lhs = hk * frames[b].smooth(k) - Complex(0, 1) * deriv;
      for (size_t a = 0; a < frames.size(); ++a) {
        if (a == b) continue;
        worst = std::max(worst, (frames[a].smooth(k).adjoint() * lhs).norm());
      }
    }
  }
  return worst;
}

NonAbelianConditionReport nonabelian_condition(const SpectralDecomposition& i0_spec,
                                               const FloquetDecomposition& fd,
                                               std::optional<double> tol) {
  if (i0_spec.dim != fd.dim()) {
    throw ValidationError("nonabelian_condition: dimension mismatch");
  }
  NonAbelianConditionReport report;
  report.tol = tol.value_or(1e-8 * static_cast<double>(fd.dim()));

  const Matrix i0 = i0_spec.reconstruct();
  const Matrix& m = fd.m.mat();
  report.commutation_residual = commutator_norm(i0, m);
  report.strobe_commutation_residual =
      commutator_norm(fd.u_period().mat(), i0);
  report.commutes_with_m = report.commutation_residual <= report.tol;

  const auto mu_values = fd.m_spectrum.eigenvalues();
  bool any_mixing = false;
  for (const auto& cluster : i0_spec.clusters) {
    if (cluster.multiplicity < 2) continue;
    ProjectorCondition pc;
    pc.eigenvalue = cluster.eigenvalue;
    pc.multiplicity = cluster.multiplicity;
    const Matrix proj = cluster.projector();
    const Matrix mproj = m * proj;
    pc.invariance_residual = (mproj - proj * mproj).norm();
    pc.eigenprojector_residual = std::numeric_limits<double>::infinity();
    for (double mu : mu_values) {
      pc.eigenprojector_residual =
          std::min(pc.eigenprojector_residual, (mproj - mu * proj).norm());
    }
    pc.is_m_eigenprojector = pc.eigenprojector_residual <= report.tol;
    if (!pc.is_m_eigenprojector) any_mixing = true;
    report.degenerate_projectors.push_back(std::move(pc));
  }
  report.satisfied = report.commutes_with_m && any_mixing;
  return report;
}

}  // namespace floquet
