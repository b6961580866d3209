#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "floquet/phases.hpp"

namespace floquet {

inline constexpr const char* kVersion = "0.1.0";

/// Residual tolerances gating a scenario run (exit code 1 when exceeded).
/// ode_residual and lewis are O(h^2) finite-difference residuals; defaults
/// assume the default grid of 512 steps.
struct ToleranceSettings {
  double ode_residual = 5e-3;
  double periodicity = 1e-8;
  double commutation = 1e-8;
  double lewis = 1e-3;
  double cross_gauge = 1e-7;
  double closure = 1e-6;
  double connection_asymmetry = 1e-4;
};

struct ScenarioConfig {
  struct Precessing {
    double j = 1.0;
    double omega = 0.4;
    double big_omega = 1.0;
  };
  struct CustomField {
    double j = 1.0;
    double b = 1.0;
    double period = 0.0;
    bool constant = false;
    Eigen::Vector3d constant_value{0, 0, 1};
    std::vector<Eigen::Vector3d> table;  // uniform samples over [0, T]
  };
  struct InvariantChoice {
    bool from_floquet = false;
    struct Level {
      double value = 0.0;
      std::vector<int> basis_indices;  // standard-basis selectors, or
      Matrix vectors;                  // explicit columns (dim x l)
    };
    std::vector<Level> levels;
  };
  struct FrameChoice {
    bool mixed = false;  // pair (xi v1 + zeta v2, zeta* v1 - xi* v2)
    Complex xi{1.0, 0.0};
    Complex zeta{0.0, 0.0};
    std::optional<double> eigenvalue;  // subspace selector when ambiguous
    Matrix vectors;                    // explicit initial frame (optional)
  };
  struct Output {
    std::string directory;  // empty: no files written
    std::string format = "json";  // json | csv | both
  };

  std::string model_type = "precessing";  // precessing | custom-field
  Precessing precessing;
  CustomField custom_field;
  int steps = 512;
  StepMethod method = StepMethod::magnus4;
  InvariantChoice invariant;
  FrameChoice frame;
  std::vector<FrameGauge> gauges{FrameGauge::floquet, FrameGauge::aligned};
  ToleranceSettings tolerances;
  Output output;

  /// Throws ValidationError on any invariant violation (frame normalization,
  /// steps a power of two, ...).
  void validate() const;

  static ScenarioConfig from_json(const std::string& text);
  std::string to_json() const;
};

/// The shipped spin-1 precessing scenario (j=1, omega=0.4, Omega=1,
/// xi=zeta=1/sqrt2, N=512, magnus4, both gauges).
ScenarioConfig default_scenario();

/// One self-check criterion outcome.
struct CriterionResult {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string note;
};

struct Report {
  struct State {
    double mu = 0.0;
    double alpha = 0.0;
    double alpha_mod = 0.0;
    double delta = 0.0;
    double gamma = 0.0;
    double gamma_raw = 0.0;
    double closure = 0.0;
  };
  struct Subspace {
    double eigenvalue = 0.0;
    FrameGauge gauge = FrameGauge::floquet;
    Matrix e0, a0, delta0;
    Matrix u_period;
    std::vector<double> holonomy_phases;
    double frame_reconstruction = 0.0;
  };
  struct Checks {
    double ode_residual = 0.0;
    double periodicity = 0.0;
    double commutation = 0.0;
    double lewis = 0.0;
  };

  ScenarioConfig config;
  std::vector<double> mu;
  std::vector<int> multiplicity;
  Checks checks;
  NonAbelianConditionReport nonabelian;
  std::vector<State> states;
  std::vector<Subspace> subspaces;
  double cross_gauge_distance = 0.0;
  std::vector<std::string> tolerance_failures;
  std::vector<CriterionResult> criteria;  // self-check runs only
  std::map<std::string, double> timings_ms;

  bool passed() const { return tolerance_failures.empty(); }

  /// Serialization: stable key order, timings last (the byte-stable section
  /// is everything before the "timings" key).
  std::string to_json() const;
};

/// Full pipeline: model -> propagate -> Floquet -> invariant -> frames ->
/// phases -> report. Per-(subspace, gauge) jobs run in parallel, capped by
/// FLOQUET_HOLONOMY_THREADS (0 or unset = auto).
Report run_scenario(const ScenarioConfig& config);

struct SelfCheckOptions {
  int steps = 512;
  bool flip_transport_sign = false;  // mutation hook for the transport sign
};

/// Runs every acceptance criterion at its pinned bound and returns the
/// filled criteria table; `steps` overrides the default scenario grid
/// (the convergence-order ladders stay fixed).
Report self_check(const SelfCheckOptions& options = {});

/// Render the criteria table (one line per criterion).
std::string format_criteria(const Report& report);

}  // namespace floquet
