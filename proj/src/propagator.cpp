#include "floquet/propagator.hpp"

#include <cmath>
#include <fmt/format.h>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace floquet {

namespace {

constexpr double kGaussOffset = 0.28867513459481287;  // sqrt(3)/6

Matrix hermitized_sample(const Matrix& f, double t) {
  const double defect = hermiticity_defect(f);
  if (defect > 1e-8 * std::max(1.0, f.norm())) {
    throw ToleranceError(fmt::format(
        "time_ordered_exp: generator at t = {} has asymmetry {:.3e}; "
        "unitarity would drift beyond 1e-8",
        t, defect));
  }
  return 0.5 * (f + f.adjoint().eval());
}

// One Magnus step factor exp(i*sign*K) over [t, t+h].
UnitaryOperator magnus_step(const std::function<Matrix(double)>& gen, double t,
                            double h, StepMethod method, double sign) {
  Matrix k;
  if (method == StepMethod::magnus2) {
    k = h * hermitized_sample(gen(t + 0.5 * h), t + 0.5 * h);
  } else {
    const double t1 = t + (0.5 - kGaussOffset) * h;
    const double t2 = t + (0.5 + kGaussOffset) * h;
    const Matrix f1 = hermitized_sample(gen(t1), t1);
    const Matrix f2 = hermitized_sample(gen(t2), t2);
    const Matrix comm = f1 * f2 - f2 * f1;
    k = 0.5 * h * (f1 + f2) -
        sign * Complex(0.0, std::numbers::sqrt3 * h * h / 12.0) * comm;
    k = 0.5 * (k + k.adjoint().eval());
  }
  return unitary_exp(HermitianOperator(std::move(k)), sign);
}

std::vector<UnitaryOperator> magnus_trace(const std::function<Matrix(double)>& gen,
                                          const TimeGrid& grid,
                                          StepMethod method, double sign,
                                          Eigen::Index dim) {
  std::vector<UnitaryOperator> out;
  out.reserve(grid.nodes());
  out.push_back(UnitaryOperator::identity(dim));
  const double h = grid.dt();
  for (int k = 0; k < grid.steps; ++k) {
    const UnitaryOperator step = magnus_step(gen, grid.node(k), h, method, sign);
    out.push_back(polar_unitary(step.mat() * out.back().mat()));
  }
  return out;
}

// Local 4-point Lagrange interpolation of node samples.
class CubicInterpolant {
 public:
  CubicInterpolant(std::span<const Matrix> nodes, const TimeGrid& grid)
      : nodes_(nodes), grid_(grid) {}

  Matrix operator()(double t) const {
    const int n = grid_.steps;
    const double h = grid_.dt();
    int k = static_cast<int>(std::floor(t / h));
    k = std::clamp(k, 0, n - 1);
    const int i0 = std::clamp(k - 1, 0, n - 3);
    Matrix p = Matrix::Zero(nodes_[0].rows(), nodes_[0].cols());
    for (int j = 0; j < 4; ++j) {
      double w = 1.0;
      const double xj = (i0 + j) * h;
      for (int m = 0; m < 4; ++m) {
        if (m == j) continue;
        const double xm = (i0 + m) * h;
        w *= (t - xm) / (xj - xm);
      }
      p += w * nodes_[i0 + j];
    }
    return p;
  }

 private:
  std::span<const Matrix> nodes_;
  TimeGrid grid_;
};

}  // namespace

TimeGrid TimeGrid::uniform(double period, int steps) {
  if (!(period > 0) || !std::isfinite(period)) {
    throw ValidationError("TimeGrid: period must be positive and finite");
  }
  if (steps < 1) throw ValidationError("TimeGrid: steps must be >= 1");
  return TimeGrid{period, steps};
}

StepMethod method_from_string(const std::string& name) {
  if (name == "magnus2") return StepMethod::magnus2;
  if (name == "magnus4") return StepMethod::magnus4;
  throw ValidationError(fmt::format("unknown step method '{}'", name));
}

std::string to_string(StepMethod m) {
  return m == StepMethod::magnus2 ? "magnus2" : "magnus4";
}

double principal_angle(double theta) {
  double r = std::remainder(theta, 2.0 * std::numbers::pi);
  if (r <= -std::numbers::pi) r = std::numbers::pi;
  return r;
}

std::vector<UnitaryOperator> time_ordered_exp(
    const std::function<Matrix(double)>& generator, const TimeGrid& grid,
    StepMethod method, double sign) {
  const Matrix probe = generator(0.0);
  if (probe.rows() != probe.cols() || probe.rows() < 1) {
    throw ValidationError("time_ordered_exp: generator must be square");
  }
  return magnus_trace(generator, grid, method, sign, probe.rows());
}

std::vector<UnitaryOperator> time_ordered_exp(std::span<const Matrix> node_samples,
                                              const TimeGrid& grid,
                                              StepMethod method, double sign) {
  if (static_cast<int>(node_samples.size()) != grid.nodes()) {
    throw ValidationError(fmt::format(
        "time_ordered_exp: {} samples for a grid of {} nodes",
        node_samples.size(), grid.nodes()));
  }
  if (grid.steps < 4) {
    throw ValidationError("time_ordered_exp: sampled form needs N >= 4");
  }
  CubicInterpolant interp(node_samples, grid);
  return magnus_trace(interp, grid, method, sign, node_samples[0].rows());
}

PropagatorTrace propagate(const PeriodicHamiltonian& h, const TimeGrid& grid,
                          StepMethod method) {
  if (grid.steps < 8) throw ValidationError("propagate: N must be >= 8");
  if (std::abs(grid.period - h.period()) > 1e-9 * h.period()) {
    throw ValidationError(fmt::format(
        "propagate: grid period {} != Hamiltonian period {}", grid.period,
        h.period()));
  }
  auto gen = [&h](double t) { return h(t); };
  return PropagatorTrace{grid, method,
                         magnus_trace(gen, grid, method, -1.0, h.dim())};
}

std::vector<Vector> propagate_state(const PropagatorTrace& trace,
                                    const Vector& psi0) {
  std::vector<Vector> out;
  out.reserve(trace.u.size());
  for (const auto& u : trace.u) out.push_back(u.mat() * psi0);
  return out;
}

UnitaryOperator FloquetDecomposition::u_period() const {
  return UnitaryOperator(
      z.back().mat() * unitary_exp(m, grid.period).mat());
}

FloquetDecomposition floquet_decompose(const PropagatorTrace& trace,
                                       std::optional<double> cluster_tol,
                                       double resonance_tol) {
  const double period = trace.grid.period;
  const HermitianOperator k = unitary_log(trace.u.back(), resonance_tol);
  HermitianOperator m((k.mat() / period).eval());
  SpectralDecomposition spectrum = herm_eig(m, cluster_tol);

  FloquetDecomposition fd{std::move(m), std::move(spectrum), {},
                          trace.grid, false, {}};
  fd.z.reserve(trace.u.size());
  for (int i = 0; i < trace.grid.nodes(); ++i) {
    const double s = -static_cast<double>(i) / trace.grid.steps;
    fd.z.push_back(
        polar_unitary(trace.u[i].mat() * unitary_exp(k, s).mat()));
  }

  // distinct quasienergies that nearly coincide mod 2pi/T deserve a warning:
  // their clusters would merge under a different branch choice
  const auto values = fd.m_spectrum.eigenvalues();
  for (size_t i = 0; i + 1 < values.size(); ++i) {
    for (size_t j = i + 1; j < values.size(); ++j) {
      const double gap =
          std::abs(principal_angle((values[i] - values[j]) * period));
      if (gap < 1e-6) {
        fd.degeneracy_warning = true;
        fd.warning = fmt::format(
            "quasienergies {:.9f} and {:.9f} nearly coincide mod 2pi/T "
            "(gap {:.3e} rad)",
            values[i], values[j], gap);
      }
    }
  }
  return fd;
}

std::vector<CyclicState> cyclic_states(const FloquetDecomposition& fd) {
  std::vector<CyclicState> out;
  const double period = fd.grid.period;
  int n = 0;
  for (const auto& cluster : fd.m_spectrum.clusters) {
    for (int a = 0; a < cluster.multiplicity; ++a) {
      CyclicState s;
      s.mu = cluster.eigenvalue;
      s.cluster = n;
      s.index = a;
      s.state = cluster.basis.col(a);
      s.alpha = s.mu * period;
      s.alpha_mod = principal_angle(s.alpha);
      out.push_back(std::move(s));
    }
    ++n;
  }
  return out;
}

void write_trace_csv(std::ostream& out, const TimeGrid& grid,
                     std::span<const UnitaryOperator> samples) {
  const Eigen::Index dim = samples.front().dim();
  out << "k,t";
  for (Eigen::Index r = 0; r < dim; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      out << ",re_" << r << "_" << c << ",im_" << r << "_" << c;
    }
  }
  out << "\n";
  out << std::setprecision(17);
  for (size_t k = 0; k < samples.size(); ++k) {
    out << k << "," << grid.node(static_cast<int>(k));
    const Matrix& u = samples[k].mat();
    for (Eigen::Index r = 0; r < dim; ++r) {
      for (Eigen::Index c = 0; c < dim; ++c) {
        out << "," << u(r, c).real() << "," << u(r, c).imag();
      }
    }
    out << "\n";
  }
}

}  // namespace floquet
