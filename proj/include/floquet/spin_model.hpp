#pragma once

#include <Eigen/Dense>
#include <functional>

#include "floquet/matrix_core.hpp"

namespace floquet {

/// Angular-momentum generators for total spin j (hbar = 1), dimension 2j+1.
/// J3 is diagonal with entries j, j-1, ..., -j.
struct SpinGenerators {
  double j = 0.0;
  Eigen::Index dim = 0;
  HermitianOperator j1, j2, j3;
};

/// Ladder-operator construction, cached per j. Requires 2j a positive
/// integer and j <= 100 (dense algebra cap).
const SpinGenerators& spin_generators(double j);

/// T-periodic Hermitian sampler. Construction checks sampler(0) == sampler(T)
/// to 1e-10; every sample is checked Hermitian.
class PeriodicHamiltonian {
 public:
  PeriodicHamiltonian(Eigen::Index dim, double period,
                      std::function<Matrix(double)> sampler);

  Matrix operator()(double t) const;
  double period() const { return period_; }
  Eigen::Index dim() const { return dim_; }

 private:
  Eigen::Index dim_;
  double period_;
  std::function<Matrix(double)> sampler_;
};

/// H(t) = b R(t).J for a classical field path R. The path must be T-periodic
/// and never vanish; |R(t)| <= 1e-12 at a sample raises LevelCrossingError.
PeriodicHamiltonian field_hamiltonian(double b,
                                      std::function<Eigen::Vector3d(double)> path,
                                      const SpinGenerators& gens, double period);

struct PrecessingFieldParams {
  double j = 1.0;
  double omega = 0.4;      // Floquet exponent scale, M = omega*J3
  double big_omega = 1.0;  // drive frequency, Omega = 2*pi/T

  double period() const;
  void validate() const;
};

/// Precessing-field model with its closed-form Floquet pair:
/// H(t) = -[Omega J1 + omega sin(Omega t) J2 + omega cos(Omega t) J3],
/// U(t) = z_analytic(t) e^{i m_analytic t}.
/// For half-integer j the pair is phase-shifted so that z stays T-periodic.
struct PrecessingModel {
  PeriodicHamiltonian hamiltonian;
  std::function<UnitaryOperator(double)> z_analytic;
  HermitianOperator m_analytic;
};

PrecessingModel precessing_model(const PrecessingFieldParams& p);

/// 2x2 mixing unitary of an arbitrary initial frame over a two-dimensional
/// subspace: columns (xi, zeta) and (zeta*, -xi*). Requires |xi|^2+|zeta|^2=1
/// to 1e-10.
Eigen::Matrix2cd frame_mixer(Complex xi, Complex zeta);

/// Closed-form connection matrices of the j=1 precessing model on the
/// degenerate {|+>, |0>} subspace, for the frame mixed by (xi, zeta).
/// E and A are constant in time; the holonomy is e^{-i T Delta}.
struct PrecessingConnection {
  Eigen::Matrix2cd e, a, delta;
  Eigen::Matrix2cd holonomy(double period) const;
};

PrecessingConnection precessing_connection(const PrecessingFieldParams& p,
                                           Complex xi, Complex zeta);

}  // namespace floquet
