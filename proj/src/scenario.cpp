#include "floquet/scenario.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

#include "json.hpp"

namespace floquet {

using json = nlohmann::ordered_json;

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ValidationError("config: complex numbers are [re, im] pairs");
  }
  return Complex(j[0].get<double>(), j[1].get<double>());
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix columns_from_json(const json& j) {
  // list of state vectors; each vector is a list of [re, im]
  if (!j.is_array() || j.empty()) {
    throw ValidationError("config: 'vectors' must be a non-empty array");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(j[0].size());
  Matrix m(dim, static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (static_cast<Eigen::Index>(j[c].size()) != dim) {
      throw ValidationError("config: ragged vector list");
    }
    for (Eigen::Index r = 0; r < dim; ++r) {
      m(r, c) = complex_from_json(j[c][r]);
    }
  }
  return m;
}

class StageTimer {
 public:
  explicit StageTimer(std::map<std::string, double>& sink) : sink_(sink) {}

  template <typename F>
  auto run(const std::string& name, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      record(name, start);
    } else {
      auto result = f();
      record(name, start);
      return result;
    }
  }

 private:
  void record(const std::string& name,
              std::chrono::steady_clock::time_point start) {
    const auto stop = std::chrono::steady_clock::now();
    sink_[name] =
        std::chrono::duration<double, std::milli>(stop - start).count();
  }

  std::map<std::string, double>& sink_;
};

unsigned thread_cap() {
  unsigned cap = std::thread::hardware_concurrency();
  if (cap == 0) cap = 1;
  if (const char* env = std::getenv("FLOQUET_HOLONOMY_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) cap = static_cast<unsigned>(v);
  }
  return cap;
}

// Run f(i) for i in [0, count) on up to thread_cap() workers; results are
// written to fixed slots so the outcome does not depend on scheduling.
template <typename F>
void parallel_for(size_t count, F&& f) {
  const unsigned cap =
      std::min<unsigned>(thread_cap(), static_cast<unsigned>(count));
  if (cap <= 1) {
    for (size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < cap; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (model_type == "precessing") {
    PrecessingFieldParams{precessing.j, precessing.omega, precessing.big_omega}
        .validate();
  } else if (model_type == "custom-field") {
    if (!(custom_field.period > 0) || !std::isfinite(custom_field.period)) {
      throw ValidationError("config: custom-field period must be positive");
    }
    if (!custom_field.constant && custom_field.table.size() < 2) {
      throw ValidationError(
          "config: custom-field path needs 'constant' or a table of >= 2 "
          "samples");
    }
  } else {
    throw ValidationError(
        fmt::format("config: unknown model type '{}'", model_type));
  }
  if (steps < 8 || steps % 2 != 0 || !power_of_two(steps)) {
    throw ValidationError(fmt::format(
        "config: steps must be an even power of two >= 8, got {}", steps));
  }
  if (gauges.empty()) throw ValidationError("config: at least one gauge");
  for (size_t i = 0; i + 1 < gauges.size(); ++i) {
    for (size_t j = i + 1; j < gauges.size(); ++j) {
      if (gauges[i] == gauges[j]) {
        throw ValidationError("config: duplicate gauge");
      }
    }
  }
  if (!invariant.from_floquet && invariant.levels.empty()) {
    throw ValidationError("config: spectral invariant needs levels");
  }
  for (const auto& level : invariant.levels) {
    if (level.basis_indices.empty() && level.vectors.size() == 0) {
      throw ValidationError(
          "config: each invariant level needs 'basis' indices or 'vectors'");
    }
  }
  if (frame.mixed) {
    frame_mixer(frame.xi, frame.zeta);  // throws unless |xi|^2+|zeta|^2 = 1
  }
  if (frame.vectors.size() != 0 && !frame.eigenvalue.has_value()) {
    throw ValidationError("config: an explicit frame needs 'lambda'");
  }
  if (output.format != "json" && output.format != "csv" &&
      output.format != "both") {
    throw ValidationError(
        fmt::format("config: unknown output format '{}'", output.format));
  }
}

namespace {

json config_to_json(const ScenarioConfig& c) {
  json j;
  json model;
  model["type"] = c.model_type;
  if (c.model_type == "precessing") {
    model["j"] = c.precessing.j;
    model["omega"] = c.precessing.omega;
    model["big_omega"] = c.precessing.big_omega;
  } else {
    model["j"] = c.custom_field.j;
    model["b"] = c.custom_field.b;
    model["period"] = c.custom_field.period;
    json path;
    if (c.custom_field.constant) {
      path["type"] = "constant";
      path["value"] = {c.custom_field.constant_value(0),
                       c.custom_field.constant_value(1),
                       c.custom_field.constant_value(2)};
    } else {
      path["type"] = "table";
      json samples = json::array();
      for (const auto& r : c.custom_field.table) {
        samples.push_back({r(0), r(1), r(2)});
      }
      path["samples"] = std::move(samples);
    }
    model["path"] = std::move(path);
  }
  j["model"] = std::move(model);
  j["grid"] = {{"steps", c.steps}, {"method", to_string(c.method)}};

  json inv;
  if (c.invariant.from_floquet) {
    inv["type"] = "from-floquet";
  } else {
    inv["type"] = "spectral";
    json levels = json::array();
    for (const auto& level : c.invariant.levels) {
      json lj;
      lj["value"] = level.value;
      if (!level.basis_indices.empty()) {
        lj["basis"] = level.basis_indices;
      } else {
        json cols = json::array();
        for (Eigen::Index col = 0; col < level.vectors.cols(); ++col) {
          json v = json::array();
          for (Eigen::Index r = 0; r < level.vectors.rows(); ++r) {
            v.push_back(complex_json(level.vectors(r, col)));
          }
          cols.push_back(std::move(v));
        }
        lj["vectors"] = std::move(cols);
      }
      levels.push_back(std::move(lj));
    }
    inv["levels"] = std::move(levels);
  }
  j["invariant"] = std::move(inv);

  json frame;
  if (c.frame.mixed) {
    frame["xi"] = complex_json(c.frame.xi);
    frame["zeta"] = complex_json(c.frame.zeta);
  }
  if (c.frame.vectors.size() != 0) {
    json cols = json::array();
    for (Eigen::Index col = 0; col < c.frame.vectors.cols(); ++col) {
      json v = json::array();
      for (Eigen::Index r = 0; r < c.frame.vectors.rows(); ++r) {
        v.push_back(complex_json(c.frame.vectors(r, col)));
      }
      cols.push_back(std::move(v));
    }
    frame["vectors"] = std::move(cols);
  }
  if (c.frame.eigenvalue) frame["lambda"] = *c.frame.eigenvalue;
  j["frame"] = std::move(frame);

  json gauges = json::array();
  for (auto g : c.gauges) gauges.push_back(to_string(g));
  j["gauges"] = std::move(gauges);

  j["tolerances"] = {{"ode_residual", c.tolerances.ode_residual},
                     {"periodicity", c.tolerances.periodicity},
                     {"commutation", c.tolerances.commutation},
                     {"lewis", c.tolerances.lewis},
                     {"cross_gauge", c.tolerances.cross_gauge},
                     {"closure", c.tolerances.closure},
                     {"connection_asymmetry", c.tolerances.connection_asymmetry}};
  j["output"] = {{"directory", c.output.directory},
                 {"format", c.output.format}};
  return j;
}

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig c = default_scenario();
  c.invariant.levels.clear();
  if (j.contains("model")) {
    const auto& model = j.at("model");
    c.model_type = model.value("type", std::string("precessing"));
    if (c.model_type == "precessing") {
      c.precessing.j = model.value("j", 1.0);
      c.precessing.omega = model.value("omega", 0.4);
      c.precessing.big_omega = model.value("big_omega", 1.0);
    } else if (c.model_type == "custom-field") {
      c.custom_field.j = model.value("j", 1.0);
      c.custom_field.b = model.value("b", 1.0);
      c.custom_field.period = model.value("period", 0.0);
      if (model.contains("path")) {
        const auto& path = model.at("path");
        const std::string type = path.value("type", std::string("constant"));
        if (type == "constant") {
          c.custom_field.constant = true;
          const auto& v = path.at("value");
          c.custom_field.constant_value =
              Eigen::Vector3d(v[0].get<double>(), v[1].get<double>(),
                              v[2].get<double>());
        } else if (type == "table") {
          c.custom_field.constant = false;
          for (const auto& row : path.at("samples")) {
            c.custom_field.table.emplace_back(row[0].get<double>(),
                                              row[1].get<double>(),
                                              row[2].get<double>());
          }
        } else {
          throw ValidationError(
              fmt::format("config: unknown path type '{}'", type));
        }
      }
    }
  }
  if (j.contains("grid")) {
    c.steps = j.at("grid").value("steps", 512);
    c.method =
        method_from_string(j.at("grid").value("method", std::string("magnus4")));
  }
  if (j.contains("invariant")) {
    const auto& inv = j.at("invariant");
    const std::string type = inv.value("type", std::string("spectral"));
    if (type == "from-floquet") {
      c.invariant.from_floquet = true;
    } else if (type == "spectral") {
      c.invariant.from_floquet = false;
      for (const auto& lj : inv.at("levels")) {
        ScenarioConfig::InvariantChoice::Level level;
        level.value = lj.at("value").get<double>();
        if (lj.contains("basis")) {
          level.basis_indices = lj.at("basis").get<std::vector<int>>();
        } else if (lj.contains("vectors")) {
          level.vectors = columns_from_json(lj.at("vectors"));
        }
        c.invariant.levels.push_back(std::move(level));
      }
    } else {
      throw ValidationError(
          fmt::format("config: unknown invariant type '{}'", type));
    }
  } else {
    c.invariant = default_scenario().invariant;
  }
  if (j.contains("frame")) {
    const auto& f = j.at("frame");
    c.frame = ScenarioConfig::FrameChoice{};
    c.frame.mixed = f.contains("xi") || f.contains("zeta");
    if (c.frame.mixed) {
      c.frame.xi = complex_from_json(f.at("xi"));
      c.frame.zeta = complex_from_json(f.at("zeta"));
    }
    if (f.contains("vectors")) {
      c.frame.mixed = false;
      c.frame.vectors = columns_from_json(f.at("vectors"));
    }
    if (f.contains("lambda")) c.frame.eigenvalue = f.at("lambda").get<double>();
  }
  if (j.contains("gauges")) {
    c.gauges.clear();
    for (const auto& g : j.at("gauges")) {
      c.gauges.push_back(gauge_from_string(g.get<std::string>()));
    }
  }
  if (j.contains("tolerances")) {
    const auto& t = j.at("tolerances");
    c.tolerances.ode_residual =
        t.value("ode_residual", c.tolerances.ode_residual);
    c.tolerances.periodicity = t.value("periodicity", c.tolerances.periodicity);
    c.tolerances.commutation = t.value("commutation", c.tolerances.commutation);
    c.tolerances.lewis = t.value("lewis", c.tolerances.lewis);
    c.tolerances.cross_gauge = t.value("cross_gauge", c.tolerances.cross_gauge);
    c.tolerances.closure = t.value("closure", c.tolerances.closure);
    c.tolerances.connection_asymmetry =
        t.value("connection_asymmetry", c.tolerances.connection_asymmetry);
  }
  if (j.contains("output")) {
    c.output.directory =
        j.at("output").value("directory", std::string());
    c.output.format = j.at("output").value("format", std::string("json"));
  }
  return c;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("config: invalid JSON ({})", e.what()));
  }
  try {
    return config_from_json(j);
  } catch (const json::exception& e) {
    throw ValidationError(fmt::format("config: {}", e.what()));
  }
}

std::string ScenarioConfig::to_json() const {
  return config_to_json(*this).dump(2);
}

ScenarioConfig default_scenario() {
  ScenarioConfig c;
  c.model_type = "precessing";
  c.precessing = {1.0, 0.4, 1.0};
  c.steps = 512;
  c.method = StepMethod::magnus4;
  c.invariant.from_floquet = false;
  c.invariant.levels = {{1.0, {0, 1}, {}}, {-1.0, {2}, {}}};
  c.frame.mixed = true;
  c.frame.xi = Complex(1.0 / std::numbers::sqrt2, 0.0);
  c.frame.zeta = Complex(1.0 / std::numbers::sqrt2, 0.0);
  c.gauges = {FrameGauge::floquet, FrameGauge::aligned};
  return c;
}

namespace {

json nonabelian_json(const NonAbelianConditionReport& r) {
  json j;
  j["commutation_residual"] = r.commutation_residual;
  j["strobe_commutation_residual"] = r.strobe_commutation_residual;
  j["commutes_with_m"] = r.commutes_with_m;
  j["tol"] = r.tol;
  json projectors = json::array();
  for (const auto& p : r.degenerate_projectors) {
    projectors.push_back({{"lambda", p.eigenvalue},
                          {"multiplicity", p.multiplicity},
                          {"invariance_residual", p.invariance_residual},
                          {"eigenprojector_residual", p.eigenprojector_residual},
                          {"is_m_eigenprojector", p.is_m_eigenprojector}});
  }
  j["degenerate_projectors"] = std::move(projectors);
  j["satisfied"] = r.satisfied;
  return j;
}

}  // namespace

std::string Report::to_json() const {
  json j;
  j["version"] = kVersion;
  j["conventions"] = {
      {"phase_zone", "(-pi, pi]"},
      {"mu_zone", "(-pi/T, pi/T]"},
      {"transport_sign",
       "u(T) = Texp(-i int_0^T Delta dt); scalar reduction u(T) = "
       "exp(i(delta+gamma))"}};
  j["config"] = config_to_json(config);
  j["floquet"] = {{"mu", mu}, {"multiplicity", multiplicity}};
  j["checks"] = {{"ode_residual", checks.ode_residual},
                 {"periodicity", checks.periodicity},
                 {"commutation", checks.commutation},
                 {"lewis", checks.lewis}};
  j["nonabelian_condition"] = nonabelian_json(nonabelian);
  json state_list = json::array();
  for (const auto& s : states) {
    state_list.push_back({{"mu", s.mu},
                          {"alpha", s.alpha},
                          {"alpha_mod", s.alpha_mod},
                          {"delta", s.delta},
                          {"gamma", s.gamma},
                          {"gamma_raw", s.gamma_raw},
                          {"closure", s.closure}});
  }
  j["states"] = std::move(state_list);
  json subspace_list = json::array();
  for (const auto& s : subspaces) {
    subspace_list.push_back({{"lambda", s.eigenvalue},
                             {"gauge", to_string(s.gauge)},
                             {"E0", matrix_json(s.e0)},
                             {"A0", matrix_json(s.a0)},
                             {"Delta0", matrix_json(s.delta0)},
                             {"uT", matrix_json(s.u_period)},
                             {"holonomy_phases", s.holonomy_phases},
                             {"frame_reconstruction", s.frame_reconstruction}});
  }
  j["subspaces"] = std::move(subspace_list);
  j["cross_gauge_distance"] = cross_gauge_distance;
  j["tolerance_failures"] = tolerance_failures;
  if (!criteria.empty()) {
    json rows = json::array();
    for (const auto& c : criteria) {
      rows.push_back({{"name", c.name},
                      {"measured", c.measured},
                      {"bound", c.bound},
                      {"pass", c.pass},
                      {"note", c.note}});
    }
    j["criteria"] = std::move(rows);
  }
  j["timings"] = timings_ms;  // last: outside the byte-stable section
  return j.dump(2);
}

namespace {

PeriodicHamiltonian build_model(const ScenarioConfig& config) {
  if (config.model_type == "precessing") {
    PrecessingFieldParams p{config.precessing.j, config.precessing.omega,
                            config.precessing.big_omega};
    return precessing_model(p).hamiltonian;
  }
  const auto& cf = config.custom_field;
  const SpinGenerators& gens = spin_generators(cf.j);
  std::function<Eigen::Vector3d(double)> path;
  if (cf.constant) {
    const Eigen::Vector3d v = cf.constant_value;
    path = [v](double) { return v; };
  } else {
    const std::vector<Eigen::Vector3d> table = cf.table;
    const double period = cf.period;
    path = [table, period](double t) {
      const double x =
          std::clamp(t / period, 0.0, 1.0) * (table.size() - 1);
      const size_t k = std::min(static_cast<size_t>(x), table.size() - 2);
      const double w = x - static_cast<double>(k);
      return Eigen::Vector3d((1.0 - w) * table[k] + w * table[k + 1]);
    };
  }
  return field_hamiltonian(cf.b, path, gens, cf.period);
}

struct FrameBasis {
  double eigenvalue = 0.0;
  Matrix basis;  // initial frame for the subspace
};

// Initial frames per invariant subspace: user level bases for spectral
// invariants, the M cluster bases for from-floquet, with the configured
// mixing or explicit columns applied to the selected subspace.
std::vector<FrameBasis> initial_frames(const ScenarioConfig& config,
                                       const InvariantTrace& inv,
                                       const std::vector<InvariantSpec::Level>& levels) {
  std::vector<FrameBasis> frames;
  for (const auto& cluster : inv.spectrum.clusters) {
    Matrix basis(inv.dim(), cluster.multiplicity);
    Eigen::Index at = 0;
    for (const auto& level : levels) {
      if (std::abs(level.value - cluster.eigenvalue) <=
          std::max(inv.spectrum.cluster_tol * 10.0, 1e-10)) {
        basis.block(0, at, inv.dim(), level.basis.cols()) = level.basis;
        at += level.basis.cols();
      }
    }
    if (at != cluster.multiplicity) basis = cluster.basis;
    frames.push_back({cluster.eigenvalue, std::move(basis)});
  }

  const auto& fc = config.frame;
  if (!fc.mixed && fc.vectors.size() == 0) return frames;

  FrameBasis* target = nullptr;
  if (fc.eigenvalue) {
    for (auto& f : frames) {
      if (std::abs(f.eigenvalue - *fc.eigenvalue) <=
          std::max(inv.spectrum.cluster_tol * 10.0, 1e-10)) {
        target = &f;
      }
    }
    if (target == nullptr) {
      throw ValidationError(fmt::format(
          "config: frame lambda {} is not an invariant eigenvalue",
          *fc.eigenvalue));
    }
  } else {
    for (auto& f : frames) {
      if (f.basis.cols() == 2) {
        if (target != nullptr) {
          throw ValidationError(
              "config: several 2-dimensional subspaces; give frame 'lambda'");
        }
        target = &f;
      }
    }
    if (target == nullptr) {
      throw ValidationError(
          "config: frame mixing needs a 2-dimensional degenerate subspace");
    }
  }
  if (fc.vectors.size() != 0) {
    target->basis = fc.vectors;
  } else {
    if (target->basis.cols() != 2) {
      throw ValidationError(
          "config: xi/zeta mixing needs a 2-dimensional subspace");
    }
    target->basis = target->basis * frame_mixer(fc.xi, fc.zeta);
  }
  return frames;
}

}  // namespace

Report run_scenario(const ScenarioConfig& config) {
  config.validate();
  Report report;
  report.config = config;
  StageTimer timer(report.timings_ms);
  const auto total_start = std::chrono::steady_clock::now();

  const PeriodicHamiltonian h = build_model(config);
  const TimeGrid grid = TimeGrid::uniform(h.period(), config.steps);

  const PropagatorTrace trace =
      timer.run("propagate", [&] { return propagate(h, grid, config.method); });
  const FloquetDecomposition fd =
      timer.run("floquet", [&] { return floquet_decompose(trace); });
  report.mu = fd.m_spectrum.eigenvalues();
  report.multiplicity = fd.m_spectrum.multiplicities();

  // cyclic states and their Abelian phases
  timer.run("states", [&] {
    for (const auto& cs : cyclic_states(fd)) {
      Report::State s;
      s.mu = cs.mu;
      s.alpha = cs.alpha;
      s.alpha_mod = cs.alpha_mod;
      const auto psi = propagate_state(trace, cs.state);
      s.delta = dynamical_phase(psi, h, grid);
      std::vector<Vector> phi;
      phi.reserve(fd.z.size());
      for (const auto& z : fd.z) phi.push_back(z.mat() * cs.state);
      const GeometricPhase g = geometric_phase(phi);
      s.gamma = g.value;
      s.gamma_raw = g.raw;
      s.closure = total_phase_check(fd, s.delta, s.gamma, cs.cluster);
      report.states.push_back(s);
    }
  });

  // invariant
  std::vector<InvariantSpec::Level> levels;
  const InvariantTrace inv = timer.run("invariant", [&] {
    if (config.invariant.from_floquet) {
      for (const auto& c : fd.m_spectrum.clusters) {
        levels.push_back({c.eigenvalue, c.basis});
      }
      return invariant_from_floquet(fd);
    }
    for (const auto& lc : config.invariant.levels) {
      InvariantSpec::Level level;
      level.value = lc.value;
      if (!lc.basis_indices.empty()) {
        Matrix basis = Matrix::Zero(h.dim(), lc.basis_indices.size());
        for (size_t i = 0; i < lc.basis_indices.size(); ++i) {
          const int idx = lc.basis_indices[i];
          if (idx < 0 || idx >= h.dim()) {
            throw ValidationError(
                fmt::format("config: basis index {} out of range", idx));
          }
          basis(idx, static_cast<Eigen::Index>(i)) = 1.0;
        }
        level.basis = std::move(basis);
      } else {
        level.basis = lc.vectors;
      }
      levels.push_back(std::move(level));
    }
    return invariant_from_initial(InvariantSpec::from_levels(levels), trace);
  });

  timer.run("checks", [&] {
    report.checks.ode_residual = check_invariant_ode(inv, h);
    report.checks.periodicity = periodicity_defect(inv);
    report.checks.commutation = commutation_check(inv.samples.front(), fd.m);
    // Lewis needs every eigenvalue; gauge does not matter for cross terms
    const bool floquet_ok =
        report.checks.commutation <=
        floquet_gauge_tolerance(inv.samples.front(), fd.m);
    std::vector<FrameTrace> all_frames;
    for (const auto& cluster : inv.spectrum.clusters) {
      all_frames.push_back(transport_eigenframes(
          inv, cluster.eigenvalue,
          floquet_ok ? FrameGauge::floquet : FrameGauge::aligned, &fd));
    }
    report.checks.lewis = check_lewis_relation(all_frames, h);
    report.nonabelian = nonabelian_condition(inv.spectrum, fd);
  });

  // per-(subspace, gauge) connection + transport, parallel
  timer.run("subspaces", [&] {
    const auto frames0 = initial_frames(config, inv, levels);
    struct Job {
      double eigenvalue;
      const Matrix* frame0;
      FrameGauge gauge;
    };
    std::vector<Job> jobs;
    for (const auto& f : frames0) {
      for (auto gauge : config.gauges) {
        jobs.push_back({f.eigenvalue, &f.basis, gauge});
      }
    }
    report.subspaces.resize(jobs.size());
    std::vector<TransportResult> transports(jobs.size());
    parallel_for(jobs.size(), [&](size_t i) {
      const Job& job = jobs[i];
      const FrameTrace ft = transport_eigenframes(inv, job.eigenvalue,
                                                  job.gauge, &fd, job.frame0);
      const ConnectionTrace conn =
          connection_matrices(ft, h, config.tolerances.connection_asymmetry);
      TransportResult tr = transport_unitary(conn, config.method);
      Report::Subspace& s = report.subspaces[i];
      s.eigenvalue = job.eigenvalue;
      s.gauge = job.gauge;
      s.e0 = conn.e.front();
      s.a0 = conn.a.front();
      s.delta0 = conn.delta.front();
      s.u_period = tr.holonomy;
      s.holonomy_phases = tr.eigenphases;
      s.frame_reconstruction = frame_reconstruction_check(ft, tr, trace);
      transports[i] = std::move(tr);
    });
    // cross-gauge comparison per eigenvalue
    for (size_t a = 0; a < jobs.size(); ++a) {
      for (size_t b = a + 1; b < jobs.size(); ++b) {
        if (jobs[a].eigenvalue != jobs[b].eigenvalue) continue;
        report.cross_gauge_distance =
            std::max(report.cross_gauge_distance,
                     phase_multiset_distance(transports[a].eigenphases,
                                             transports[b].eigenphases));
      }
    }
  });

  // tolerance gate
  const auto& tol = config.tolerances;
  auto gate = [&](double value, double bound, const std::string& name) {
    if (value > bound) {
      report.tolerance_failures.push_back(
          fmt::format("{} = {:.3e} exceeds {:.3e}", name, value, bound));
    }
  };
  gate(report.checks.ode_residual, tol.ode_residual, "ode_residual");
  gate(report.checks.periodicity, tol.periodicity, "periodicity");
  gate(report.checks.commutation, tol.commutation, "commutation");
  gate(report.checks.lewis, tol.lewis, "lewis");
  for (size_t i = 0; i < report.states.size(); ++i) {
    gate(report.states[i].closure, tol.closure,
         fmt::format("states[{}].closure", i));
  }
  if (config.gauges.size() > 1) {
    gate(report.cross_gauge_distance, tol.cross_gauge, "cross_gauge_distance");
  }

  report.timings_ms["total"] = std::chrono::duration<double, std::milli>(
                                   std::chrono::steady_clock::now() - total_start)
                                   .count();

  // optional file output
  if (!config.output.directory.empty()) {
    namespace fs = std::filesystem;
    const fs::path dir(config.output.directory);
    fs::create_directories(dir);
    {
      std::ofstream out(dir / "report.json");  // the report is always written
      out << report.to_json() << "\n";
    }
    if (config.output.format == "csv" || config.output.format == "both") {
      std::ofstream u_out(dir / "u_trace.csv");
      write_trace_csv(u_out, grid, trace.u);
      std::ofstream z_out(dir / "z_trace.csv");
      write_trace_csv(z_out, grid, fd.z);
    }
  }
  return report;
}

std::string format_criteria(const Report& report) {
  std::string out;
  for (const auto& c : report.criteria) {
    out += fmt::format("{}  {:<28} measured = {:<12.4e} bound = {:<10.3e} {}\n",
                       c.pass ? "PASS" : "FAIL", c.name, c.measured, c.bound,
                       c.note);
  }
  int passed = 0;
  for (const auto& c : report.criteria) passed += c.pass ? 1 : 0;
  out += fmt::format("{} of {} criteria passed\n", passed,
                     report.criteria.size());
  return out;
}

}  // namespace floquet
