#include "floquet/spin_model.hpp"

#include <cmath>
#include <fmt/format.h>
#include <map>
#include <mutex>
#include <numbers>

namespace floquet {

namespace {

bool is_half_integer(double j) {
  const double twoj = 2.0 * j;
  return j > 0 && std::abs(twoj - std::round(twoj)) < 1e-12;
}

SpinGenerators build_generators(double j) {
  const int twoj = static_cast<int>(std::round(2.0 * j));
  const Eigen::Index dim = twoj + 1;
  Matrix jplus = Matrix::Zero(dim, dim);
  Matrix j3 = Matrix::Zero(dim, dim);
  // rows ordered m = j, j-1, ..., -j
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double m = j - static_cast<double>(i);
    j3(i, i) = m;
    if (i > 0) {
      const double mlow = m;  // J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>
      jplus(i - 1, i) = std::sqrt(j * (j + 1) - mlow * (mlow + 1));
    }
  }
  const Matrix jminus = jplus.adjoint();
  Matrix j1 = 0.5 * (jplus + jminus);
  Matrix j2 = Complex(0.0, -0.5) * (jplus - jminus);
  return SpinGenerators{j, dim, HermitianOperator(std::move(j1)),
                        HermitianOperator(std::move(j2)),
                        HermitianOperator(std::move(j3))};
}

}  // namespace

const SpinGenerators& spin_generators(double j) {
  if (!is_half_integer(j)) {
    throw ValidationError(
        fmt::format("spin_generators: j = {} is not a positive half-integer", j));
  }
  if (j > 100.0) {
    throw ValidationError(
        fmt::format("spin_generators: j = {} exceeds the dense cap j <= 100", j));
  }
  static std::mutex mutex;
  static std::map<int, SpinGenerators> cache;
  const int key = static_cast<int>(std::round(2.0 * j));
  std::scoped_lock lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_generators(j)).first;
  return it->second;
}

PeriodicHamiltonian::PeriodicHamiltonian(Eigen::Index dim, double period,
                                         std::function<Matrix(double)> sampler)
    : dim_(dim), period_(period), sampler_(std::move(sampler)) {
  if (dim_ < 1) throw ValidationError("PeriodicHamiltonian: dim must be >= 1");
  if (!(period_ > 0) || !std::isfinite(period_)) {
    throw ValidationError("PeriodicHamiltonian: period must be positive");
  }
  const Matrix h0 = (*this)(0.0);
  const Matrix hT = (*this)(period_);
  const double defect = (h0 - hT).norm();
  const double bound = 1e-10 * std::max(1.0, h0.norm());
  if (defect > bound) {
    throw ValidationError(fmt::format(
        "PeriodicHamiltonian: ||H(0) - H(T)||_F = {:.3e} breaks periodicity",
        defect));
  }
}

Matrix PeriodicHamiltonian::operator()(double t) const {
  Matrix h = sampler_(t);
  if (h.rows() != dim_ || h.cols() != dim_) {
    throw ValidationError(fmt::format(
        "PeriodicHamiltonian: sampler returned {}x{}, expected {}x{}",
        h.rows(), h.cols(), dim_, dim_));
  }
  const double defect = hermiticity_defect(h);
  if (defect > 1e-12 * std::max(1.0, h.norm())) {
    throw ValidationError(fmt::format(
        "PeriodicHamiltonian: sample at t = {} has asymmetry {:.3e}", t,
        defect));
  }
  return h;
}

PeriodicHamiltonian field_hamiltonian(double b,
                                      std::function<Eigen::Vector3d(double)> path,
                                      const SpinGenerators& gens,
                                      double period) {
  const Eigen::Vector3d r0 = path(0.0);
  const Eigen::Vector3d rT = path(period);
  if ((r0 - rT).norm() > 1e-10 * std::max(1.0, r0.norm())) {
    throw ValidationError(fmt::format(
        "field_hamiltonian: R(0) != R(T), defect {:.3e}", (r0 - rT).norm()));
  }
  const Matrix j1 = gens.j1.mat();
  const Matrix j2 = gens.j2.mat();
  const Matrix j3 = gens.j3.mat();
  auto sampler = [=](double t) -> Matrix {
    const Eigen::Vector3d r = path(t);
    if (r.norm() <= 1e-12) {
      throw LevelCrossingError(fmt::format(
          "field_hamiltonian: |R(t)| = {:.3e} at t = {} (level crossing)",
          r.norm(), t));
    }
    return b * (r(0) * j1 + r(1) * j2 + r(2) * j3);
  };
  return PeriodicHamiltonian(gens.dim, period, std::move(sampler));
}

double PrecessingFieldParams::period() const {
  return 2.0 * std::numbers::pi / big_omega;
}

void PrecessingFieldParams::validate() const {
  if (!is_half_integer(j)) {
    throw ValidationError(
        fmt::format("precessing model: j = {} is not a positive half-integer", j));
  }
  if (!(omega > 0) || !std::isfinite(omega)) {
    throw ValidationError("precessing model: omega must be positive");
  }
  if (!(big_omega > 0) || !std::isfinite(big_omega)) {
    throw ValidationError("precessing model: Omega must be positive");
  }
}

PrecessingModel precessing_model(const PrecessingFieldParams& p) {
  p.validate();
  const SpinGenerators& gens = spin_generators(p.j);
  const double period = p.period();
  const double w = p.omega;
  const double om = p.big_omega;
  const Matrix j1 = gens.j1.mat();
  const Matrix j2 = gens.j2.mat();
  const Matrix j3 = gens.j3.mat();
  const Eigen::Index dim = gens.dim;

  auto sampler = [=](double t) -> Matrix {
    return -(om * j1 + w * std::sin(om * t) * j2 + w * std::cos(om * t) * j3);
  };
  PeriodicHamiltonian hamiltonian(dim, period, sampler);

  // e^{i Omega T J1} = (-1)^{2j}; shift by a scalar phase for half-integer j
  // so that Z stays T-periodic and M absorbs -Omega/2.
  const int twoj = static_cast<int>(std::round(2.0 * p.j));
  const double shift = (twoj % 2 == 0) ? 0.0 : 0.5;

  HermitianOperator m_analytic(
      (w * j3 - shift * om * Matrix::Identity(dim, dim)).eval());
  HermitianOperator j1op = gens.j1;
  auto z_analytic = [j1op, om, shift, dim](double t) -> UnitaryOperator {
    Matrix z = unitary_exp(j1op, om * t).mat();
    if (shift != 0.0) z *= std::exp(Complex(0.0, shift * om * t));
    return UnitaryOperator(std::move(z));
  };

  return PrecessingModel{std::move(hamiltonian), std::move(z_analytic),
                         std::move(m_analytic)};
}

Eigen::Matrix2cd frame_mixer(Complex xi, Complex zeta) {
  const double norm = std::norm(xi) + std::norm(zeta);
  if (std::abs(norm - 1.0) > 1e-10) {
    throw ValidationError(fmt::format(
        "frame_mixer: |xi|^2 + |zeta|^2 = {:.12f}, must be 1 to 1e-10", norm));
  }
  Eigen::Matrix2cd w;
  w << xi, std::conj(zeta), zeta, -std::conj(xi);
  return w;
}

PrecessingConnection precessing_connection(const PrecessingFieldParams& p,
                                           Complex xi, Complex zeta) {
  p.validate();
  frame_mixer(xi, zeta);  // normalization check
  const double w = p.omega;
  const double om = p.big_omega;
  const Complex xc = std::conj(xi);
  const Complex zc = std::conj(zeta);

  Eigen::Matrix2cd j3_block;
  j3_block << std::norm(xi), xc * zc, xi * zeta, std::norm(zeta);
  Eigen::Matrix2cd j1_block;
  j1_block << xc * zeta + zc * xi, -xc * xc + zc * zc, -xi * xi + zeta * zeta,
      -(xc * zeta + zc * xi);
  j1_block /= std::sqrt(2.0);

  PrecessingConnection out;
  out.a = -om * j1_block;
  out.e = -w * j3_block + out.a;
  out.delta = -w * j3_block;
  return out;
}

Eigen::Matrix2cd PrecessingConnection::holonomy(double period) const {
  Matrix d = delta;
  Matrix u = unitary_exp(HermitianOperator(std::move(d)), -period).mat();
  return Eigen::Matrix2cd(u);
}

}  // namespace floquet
