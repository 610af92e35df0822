#include "crowd/cli.hpp"

#include <cmath>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "crowd/ca.hpp"
#include "crowd/calibrate.hpp"
#include "crowd/io.hpp"
#include "crowd/pde.hpp"
#include "crowd/potential.hpp"
#include "crowd/riemann.hpp"

namespace crowd::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Common {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<int> threads;
  bool quick = false;
};

struct Context {
  io::Config cfg;
  io::RunManifest manifest;
  std::string hash;
  std::ostream* out = nullptr;

  std::string path(const std::string& name) const {
    return (fs::path(manifest.out_dir) / name).string();
  }

  std::vector<std::string> meta(const std::string& what) const {
    return {"crowd " + manifest.subcommand + ": " + what, "manifest_hash: " + hash,
            "seed: " + std::to_string(manifest.seed),
            "format_version: " + std::to_string(manifest.format_version)};
  }

  void csv(const std::string& name, io::Table t, const std::string& what,
           const std::vector<std::string>& extra = {}) const {
    std::vector<std::string> m = meta(what);
    m.insert(m.end(), extra.begin(), extra.end());
    t.meta = std::move(m);
    io::write_csv(path(name), t);
    *out << "wrote " << path(name) << "\n";
  }

  void json_file(const std::string& name, json j) const {
    j["manifest"] = manifest.to_json();
    j["manifest_hash"] = hash;
    io::write_json(path(name), j);
    *out << "wrote " << path(name) << "\n";
  }
};

const std::vector<std::string> kRunKeys = {"run.seed", "run.runs", "run.threads"};
const std::vector<std::string> kCorridorKeys = {"corridor.width", "corridor.length",
                                                "corridor.exit_width", "corridor.cell_size"};

std::vector<std::string> join(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> all;
  for (const auto& p : parts) all.insert(all.end(), p.begin(), p.end());
  return all;
}

Context make_context(const std::string& sub, const Common& c, std::ostream& out,
                     const std::vector<std::string>& known, int default_runs) {
  Context ctx;
  ctx.out = &out;
  if (!c.config_path.empty()) ctx.cfg = io::Config::load(c.config_path);
  ctx.cfg.require_known(known);
  if (c.seed) ctx.cfg.set("run.seed", static_cast<double>(*c.seed));
  if (c.runs) ctx.cfg.set("run.runs", static_cast<double>(*c.runs));
  if (c.threads) ctx.cfg.set("run.threads", static_cast<double>(*c.threads));

  io::RunManifest& m = ctx.manifest;
  m.subcommand = sub;
  m.config_path = c.config_path;
  m.config_text = ctx.cfg.text();
  m.out_dir = c.out_dir;
  const int seed = ctx.cfg.get_int("run.seed", 1);
  if (seed < 0) throw ConfigError("run.seed must be >= 0");
  m.seed = static_cast<std::uint64_t>(seed);
  m.runs = ctx.cfg.get_int("run.runs", c.quick ? std::min(default_runs, 100) : default_runs);
  if (m.runs < 1) throw ConfigError("run.runs must be >= 1");
  m.threads = ctx.cfg.get_int("run.threads", 1);
  if (m.threads < 1) throw ConfigError("run.threads must be >= 1");
  m.quick = c.quick;
  ctx.hash = m.hash();
  io::ensure_directory(m.out_dir);
  return ctx;
}

std::string label(double width) { return "w" + io::format_double(width); }

CorridorGrid corridor_from(const io::Config& cfg, double width) {
  return build_corridor(width, cfg.get_double("corridor.length", calibrate::kCorridorLength),
                        cfg.get_double("corridor.exit_width", calibrate::kExitWidth),
                        cfg.get_double("corridor.cell_size", calibrate::kCellSize));
}

PotentialField corridor_potential(const CorridorGrid& cg, const std::string& kind) {
  if (kind == "distance") return corridor_distance(cg);
  if (kind == "eikonal") return corridor_eikonal(cg);
  if (kind == "laplace") return corridor_laplace(cg);
  throw ConfigError("potential must be distance, eikonal or laplace, got '" + kind + "'");
}

io::Table field_table(const ScalarField& f) {
  io::Table t;
  t.data = f.matrix();
  return t;
}

double measurement_max(const CorridorGrid& cg, const ScalarField& f) {
  double m = 0.0;
  for (const Cell& c : cg.index.measurement_cells) m = std::max(m, f(c.j, c.i));
  return m;
}

// simulate ------------------------------------------------------------------

int cmd_simulate(const Common& c, std::ostream& out) {
  const Context ctx = make_context(
      "simulate", c, out,
      join({kRunKeys, kCorridorKeys,
            {"agents.n", "model.beta", "model.mu", "model.p_ex", "model.dt", "model.gamma",
             "model.exit_rule", "model.potential", "model.step_cap", "output.histogram_bin"}}),
      500);
  const io::Config& cfg = ctx.cfg;

  ca::SimParams p;
  p.beta = cfg.get_double("model.beta", p.beta);
  p.mu = cfg.get_double("model.mu", p.mu);
  p.p_ex = cfg.get_double("model.p_ex", p.p_ex);
  p.gamma = cfg.get_double("model.gamma", p.gamma);
  p.exit_rule = ca::exit_rule_from_string(cfg.get_string("model.exit_rule", "queue"));
  p.step_cap = cfg.get_int("model.step_cap", static_cast<int>(p.step_cap));
  p.n_agents = cfg.get_int("agents.n", 60);
  p.seed = ctx.manifest.seed;
  const bool dt_given = cfg.has("model.dt");
  p.dt = dt_given ? cfg.get_double("model.dt", 0.0)
                  : calibrate::derive_dt(p.beta, calibrate::reference_fit());
  ca::validate(p);
  const std::string potential = cfg.get_string("model.potential", "distance");

  ca::MonteCarloOptions mc;
  mc.n_runs = ctx.manifest.runs;
  mc.threads = ctx.manifest.threads;
  mc.histogram_bin = cfg.get_double("output.histogram_bin", 1.0);
  mc.pushing = p.gamma > 0.0;

  json summary;
  summary["low_fidelity"] = c.quick;
  summary["params"] = {{"beta", p.beta},       {"mu", p.mu},
                       {"p_ex", p.p_ex},       {"dt", p.dt},
                       {"dt_derived", !dt_given}, {"gamma", p.gamma},
                       {"exit_rule", ca::to_string(p.exit_rule)},
                       {"n_agents", p.n_agents}, {"potential", potential},
                       {"runs", mc.n_runs}};
  summary["scenarios"] = json::array();

  for (double w : cfg.get_array("corridor.width", {0.9, 3.3, 5.7})) {
    const CorridorGrid cg = corridor_from(cfg, w);
    const PotentialField phi = corridor_potential(cg, potential);
    const ca::EnsembleStatistics e = ca::monte_carlo(cg, p, phi, mc);
    const std::string tag = label(w);

    io::Table times;
    times.columns = {"run", "exit_time_s"};
    times.data.resize(static_cast<Eigen::Index>(e.exit_times.size()), 2);
    for (std::size_t r = 0; r < e.exit_times.size(); ++r) {
      times.data(r, 0) = static_cast<double>(r);
      times.data(r, 1) = e.exit_times[r];
    }
    ctx.csv("exit_times_" + tag + ".csv", times, "exit time per run",
            {"width_m: " + io::format_double(w)});

    io::Table hist;
    hist.columns = {"bin_start_s", "bin_end_s", "count"};
    const auto& h = e.exit_histogram;
    hist.data.resize(static_cast<Eigen::Index>(h.counts.size()), 3);
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
      hist.data(k, 0) = h.origin + k * h.bin_width;
      hist.data(k, 1) = h.origin + (k + 1) * h.bin_width;
      hist.data(k, 2) = static_cast<double>(h.counts[k]);
    }
    ctx.csv("exit_histogram_" + tag + ".csv", hist, "exit time histogram",
            {"width_m: " + io::format_double(w)});

    ctx.csv("max_density_" + tag + ".csv", field_table(e.max_density_map),
            "per-cell maximum over steps of the ensemble-mean density, persons/m^2",
            {"width_m: " + io::format_double(w), "cell_size_m: " + io::format_double(cg.grid.h),
             "layout: row j (0 = exit row), column i"});

    io::Table series;
    series.columns = {"step", "time_s", "mean_measurement_density"};
    series.data.resize(static_cast<Eigen::Index>(e.mean_density_series.size()), 3);
    for (std::size_t k = 0; k < e.mean_density_series.size(); ++k) {
      series.data(k, 0) = static_cast<double>(k);
      series.data(k, 1) = k * p.dt;
      series.data(k, 2) = e.mean_density_series[k];
    }
    ctx.csv("density_series_" + tag + ".csv", series,
            "ensemble-mean measurement-area density, persons/m^2",
            {"width_m: " + io::format_double(w), std::string("area: ") + kMeasurementAreaNote});

    const double mean_exit = p.n_agents == 0 ? 0.0 : e.mean_exit_time;
    summary["scenarios"].push_back({{"width_m", w},
                                    {"mean_exit_time_s", mean_exit},
                                    {"std_exit_time_s", e.std_exit_time},
                                    {"incomplete_runs", e.incomplete_runs},
                                    {"peak_mean_density", e.peak_mean_density},
                                    {"peak_mean_density_se", e.peak_mean_density_se},
                                    {"peak_time_s", e.peak_step * p.dt},
                                    {"mean_run_max_density", e.mean_run_max_density},
                                    {"max_density_measurement_area",
                                     measurement_max(cg, e.max_density_map)}});
    out << tag << ": mean exit time " << io::format_double(mean_exit) << " s, peak density "
        << io::format_double(e.peak_mean_density) << " p/m^2\n";
  }
  ctx.json_file("summary.json", summary);
  return kOk;
}

// pde -----------------------------------------------------------------------

pde::ScenarioResult run_pde(const CorridorGrid& cg, int n, const pde::PdeParams& p,
                            const std::string& potential, const pde::ScenarioOptions& o) {
  if (potential == "hughes") {
    pde::ScenarioOptions h = o;
    if (h.hughes_every <= 0) h.hughes_every = 10;
    return pde::simulate_scenario(cg, n, p, corridor_eikonal(cg), h);
  }
  return pde::simulate_scenario(cg, n, p, corridor_potential(cg, potential), o);
}

int cmd_pde(const Common& c, std::ostream& out) {
  const Context ctx = make_context(
      "pde", c, out,
      join({kRunKeys, kCorridorKeys,
            {"agents.n", "pde.variant", "pde.mu", "pde.beta", "pde.p_ex", "pde.gamma", "pde.cfl",
             "pde.dt_max", "pde.time_scale_s", "pde.potential", "pde.hughes_every", "pde.closed",
             "pde.compare_pushing", "output.t_max", "output.record_every",
             "output.snapshot_every", "output.stop_fraction"}}),
      1);
  const io::Config& cfg = ctx.cfg;
  pde::PdeParams p;
  p.variant = pde::variant_from_string(cfg.get_string("pde.variant", "standard"));
  p.mu = cfg.get_double("pde.mu", p.mu);
  p.beta = cfg.get_double("pde.beta", p.beta);
  p.p_ex = cfg.get_double("pde.p_ex", p.p_ex);
  p.gamma = cfg.get_double("pde.gamma", p.variant == pde::Variant::pushing ? 1.0 : 0.0);
  p.cfl = cfg.get_double("pde.cfl", p.cfl);
  p.dt_max = cfg.get_double("pde.dt_max", c.quick ? 0.1 : p.dt_max);
  p.time_scale_s = cfg.get_double("pde.time_scale_s", p.time_scale_s);
  pde::validate(p);
  const std::string potential = cfg.get_string("pde.potential", "distance");
  const bool compare = cfg.get_bool("pde.compare_pushing", false);
  const int n = cfg.get_int("agents.n", 60);

  pde::ScenarioOptions o;
  o.t_max = cfg.get_double("output.t_max", o.t_max);
  o.record_every = cfg.get_double("output.record_every", c.quick ? 0.2 : o.record_every);
  o.snapshot_every = cfg.get_double("output.snapshot_every", 0.0);
  o.stop_fraction = cfg.get_double("output.stop_fraction", o.stop_fraction);
  o.hughes_every = cfg.get_int("pde.hughes_every", 0);
  o.closed = cfg.get_bool("pde.closed", false);

  json summary;
  summary["low_fidelity"] = c.quick;
  summary["params"] = {{"variant", pde::to_string(p.variant)},
                       {"mu", p.mu},
                       {"beta", p.beta},
                       {"p_ex", p.p_ex},
                       {"gamma", p.gamma_eff()},
                       {"cfl", p.cfl},
                       {"dt_max", p.dt_max},
                       {"time_scale_s", p.time_scale_s},
                       {"potential", potential},
                       {"closed", o.closed},
                       {"n_persons", n}};
  summary["scenarios"] = json::array();

  auto write_series = [&](const pde::ScenarioResult& r, const std::string& tag, double w) {
    io::Table t;
    t.columns = {"t", "t_s", "mass_persons", "measurement_density", "entropy"};
    t.data.resize(static_cast<Eigen::Index>(r.series.size()), 5);
    for (std::size_t k = 0; k < r.series.size(); ++k) {
      const auto& s = r.series[k];
      t.data.row(k) << s.t, s.t_s, s.mass, s.measurement_density, s.entropy;
    }
    ctx.csv("series_" + tag + ".csv", t, "PDE time series",
            {"width_m: " + io::format_double(w), "density unit: persons/m^2"});
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
      ctx.csv("snapshot_" + tag + "_" + std::to_string(k) + ".csv",
              field_table(r.snapshots[k].rho), "density snapshot (scaled, 0..1)",
              {"t: " + io::format_double(r.snapshots[k].t),
               "layout: row j (0 = exit row), column i"});
    }
  };

  for (double w : cfg.get_array("corridor.width", {0.9, 3.3, 5.7})) {
    const CorridorGrid cg = corridor_from(cfg, w);
    const std::string tag = label(w);
    const pde::ScenarioResult r = run_pde(cg, n, p, potential, o);
    write_series(r, tag, w);
    json s = {{"width_m", w},
              {"rho0", r.rho0},
              {"peak_measurement_density", r.peak_measurement_density},
              {"peak_time", r.peak_time},
              {"steps", r.steps},
              {"finished", r.finished},
              {"final_time", r.series.back().t},
              {"final_mass_persons", r.series.back().mass}};
    if (compare) {
      pde::PdeParams q = p;
      q.variant = pde::Variant::pushing;
      q.gamma = cfg.get_double("pde.gamma", 1.0);
      pde::PdeParams base = p;
      base.variant = pde::Variant::standard;
      const pde::ScenarioResult r0 = run_pde(cg, n, base, potential, o);
      const pde::ScenarioResult r1 = run_pde(cg, n, q, potential, o);
      write_series(r0, tag + "_gamma0", w);
      write_series(r1, tag + "_pushing", w);
      const double half = 0.5 * r0.peak_measurement_density;
      s["half_peak_time_gamma0"] = pde::time_to_reach(r0.series, half);
      s["half_peak_time_pushing"] = pde::time_to_reach(r1.series, half);
      s["pushing_gamma"] = q.gamma;
    }
    summary["scenarios"].push_back(s);
    out << tag << ": rho0 " << io::format_double(r.rho0) << ", peak density "
        << io::format_double(r.peak_measurement_density) << " p/m^2 at t = "
        << io::format_double(r.peak_time) << "\n";
  }
  ctx.json_file("summary.json", summary);
  return kOk;
}

// riemann -------------------------------------------------------------------

struct RiemannFlags {
  std::optional<double> rho0, p_ex, length;
  std::optional<int> map;
};

int cmd_riemann(const Common& c, const RiemannFlags& f, std::ostream& out) {
  Context ctx = make_context(
      "riemann", c, out,
      join({kRunKeys, {"riemann.rho0", "riemann.p_ex", "riemann.L", "riemann.map",
                       "riemann.map_size", "riemann.profile_points"}}),
      1);
  io::Config& cfg = ctx.cfg;
  if (f.rho0) cfg.set("riemann.rho0", *f.rho0);
  if (f.p_ex) cfg.set("riemann.p_ex", *f.p_ex);
  if (f.length) cfg.set("riemann.L", *f.length);
  if (f.map) {
    cfg.set("riemann.map", true);
    cfg.set("riemann.map_size", static_cast<double>(*f.map));
  }
  const double L = cfg.get_double("riemann.L", 1.0);

  if (cfg.get_bool("riemann.map", false)) {
    const int n = cfg.get_int("riemann.map_size", 50);
    if (n < 2) throw ConfigError("riemann.map_size must be >= 2");
    std::vector<double> rho0(n), pex(n);
    for (int k = 0; k < n; ++k) rho0[k] = pex[k] = (k + 0.5) / n;
    const Eigen::MatrixXd m = riemann::exit_time_map(pex, rho0, L);
    io::Table t;
    t.columns.push_back("rho0");
    for (double q : pex) t.columns.push_back("p_ex=" + io::format_double(q));
    t.data.resize(n, n + 1);
    t.data.col(0) = Eigen::Map<const Eigen::VectorXd>(rho0.data(), n);
    t.data.rightCols(n) = m;
    ctx.csv("exit_time_map.csv", t, "exit time of the 1D Riemann problem",
            {"L: " + io::format_double(L), "rows: rho0, columns: p_ex"});
    ctx.json_file("map.json", {{"L", L}, {"size", n}});
    return kOk;
  }

  const riemann::Problem prob{cfg.get_double("riemann.rho0", 0.4), L,
                              cfg.get_double("riemann.p_ex", 0.3)};
  const riemann::Solution s = riemann::solve(prob);
  json events = json::array();
  for (const auto& e : s.events) events.push_back({{"t", e.t}, {"x", e.x}, {"kind", e.kind}});
  double rh = 0.0;
  bool lax = true;
  for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (const auto& sh : riemann::shocks_at(s, frac * s.exit_time)) {
      rh = std::max(rh, std::abs(riemann::rankine_hugoniot_residual(sh)));
      lax = lax && riemann::lax_admissible(sh);
    }
  }
  ctx.json_file("solution.json", {{"rho0", prob.rho0},
                                  {"p_ex", prob.p_ex},
                                  {"L", prob.L},
                                  {"regime", riemann::to_string(s.regime)},
                                  {"boundary_trace", s.rho_bar},
                                  {"exit_time", s.exit_time},
                                  {"events", events},
                                  {"near_interface", s.near_interface},
                                  {"max_rankine_hugoniot_residual", rh},
                                  {"lax_admissible", lax}});

  const int np = cfg.get_int("riemann.profile_points", 201);
  if (np < 2) throw ConfigError("riemann.profile_points must be >= 2");
  const std::array<double, 4> fracs = {0.0, 0.25, 0.5, 0.75};
  io::Table t;
  t.columns = {"x"};
  for (double fr : fracs) t.columns.push_back("rho_t=" + io::format_double(fr * s.exit_time));
  t.data.resize(np, 1 + static_cast<Eigen::Index>(fracs.size()));
  for (int k = 0; k < np; ++k) {
    const double x = L * k / (np - 1);
    t.data(k, 0) = x;
    for (std::size_t q = 0; q < fracs.size(); ++q) {
      t.data(k, 1 + q) = riemann::evaluate(s, x, fracs[q] * s.exit_time);
    }
  }
  ctx.csv("profile.csv", t, "entropy solution profiles (left limit at shocks)");
  out << "regime " << riemann::to_string(s.regime) << ", exit time "
      << io::format_double(s.exit_time) << (s.near_interface ? " (near a regime interface)" : "")
      << "\n";
  return kOk;
}

// calibrate -----------------------------------------------------------------

std::array<double, 3> targets_from(const io::Config& cfg, const std::string& key,
                                   const std::array<double, 3>& fallback, bool& injected) {
  if (!cfg.has(key)) {
    injected = true;
    return fallback;
  }
  const std::vector<double> v = cfg.get_array(key, {});
  if (v.size() != 3) throw ConfigError("config key '" + key + "' needs exactly 3 values");
  return {v[0], v[1], v[2]};
}

int cmd_calibrate(const Common& c, std::ostream& out) {
  const Context ctx = make_context(
      "calibrate", c, out,
      join({kRunKeys,
            {"calibrate.nbar_betas", "calibrate.nbar_runs", "calibrate.nbar_p_ex",
             "calibrate.use_reference_fit", "calibrate.beta_min", "calibrate.beta_max",
             "calibrate.beta_points", "calibrate.pex_min", "calibrate.pex_max",
             "calibrate.pex_points", "calibrate.estimate_mu0", "calibrate.mu_min",
             "calibrate.mu_coarse_step", "calibrate.mu_fine_step", "targets.motivated",
             "targets.unmotivated"}}),
      500);
  const io::Config& cfg = ctx.cfg;
  const bool q = c.quick;
  bool injected = false;
  const auto motivated =
      targets_from(cfg, "targets.motivated", calibrate::motivated_targets(), injected);
  const auto unmotivated =
      targets_from(cfg, "targets.unmotivated", calibrate::unmotivated_targets(), injected);

  calibrate::EnsembleOptions ens{ctx.manifest.runs, ctx.manifest.threads, ctx.manifest.seed};

  calibrate::NbarOptions no;
  no.seed = ctx.manifest.seed;
  no.n_runs = cfg.get_int("calibrate.nbar_runs", q ? 500 : no.n_runs);
  no.p_ex = cfg.get_double("calibrate.nbar_p_ex", no.p_ex);
  const std::vector<double> betas = cfg.get_array(
      "calibrate.nbar_betas",
      std::vector<double>(calibrate::kNbarBetas.begin(), calibrate::kNbarBetas.end()));

  json report;
  report["low_fidelity"] = q;
  report["targets"] = {{"motivated", motivated},
                       {"unmotivated", unmotivated},
                       {"defaults_injected", injected}};

  calibrate::FitResult fit;
  if (cfg.get_bool("calibrate.use_reference_fit", false)) {
    fit = calibrate::reference_fit();
    report["fit_source"] = "reference";
  } else {
    const calibrate::NbarCurve curve = calibrate::measure_nbar_curve(betas, no);
    fit = curve.fit;
    report["fit_source"] = "measured";
    io::Table t;
    t.columns = {"beta", "nbar", "standard_error", "dt_s", "iterations", "converged"};
    t.data.resize(static_cast<Eigen::Index>(curve.samples.size()), 6);
    for (std::size_t k = 0; k < curve.samples.size(); ++k) {
      const auto& s = curve.samples[k];
      t.data.row(k) << s.beta, s.nbar, s.standard_error, s.dt, s.iterations,
          s.converged ? 1.0 : 0.0;
    }
    ctx.csv("nbar_samples.csv", t, "single-agent mean step counts",
            {"nbar_p_ex: " + io::format_double(no.p_ex),
             "nbar_runs: " + std::to_string(no.n_runs)});
  }
  report["fit"] = {{"a", fit.a},
                   {"b", fit.b},
                   {"c", fit.c},
                   {"rms_residual_steps", fit.residual},
                   {"converged", fit.converged}};

  calibrate::GridSearchOptions go;
  go.beta_min = cfg.get_double("calibrate.beta_min", go.beta_min);
  go.beta_max = cfg.get_double("calibrate.beta_max", go.beta_max);
  go.beta_points = cfg.get_int("calibrate.beta_points", q ? 6 : go.beta_points);
  go.pex_min = cfg.get_double("calibrate.pex_min", go.pex_min);
  go.pex_max = cfg.get_double("calibrate.pex_max", go.pex_max);
  go.pex_points = cfg.get_int("calibrate.pex_points", q ? 6 : go.pex_points);
  go.targets = motivated;
  go.ensemble = ens;
  const calibrate::CalibrationResult cr = calibrate::grid_search(fit, go);

  io::Table z;
  z.columns.push_back("beta");
  for (double p : cr.pexs) z.columns.push_back("p_ex=" + io::format_double(p));
  z.data.resize(static_cast<Eigen::Index>(cr.betas.size()), cr.z.cols() + 1);
  for (std::size_t a = 0; a < cr.betas.size(); ++a) z.data(a, 0) = cr.betas[a];
  z.data.rightCols(cr.z.cols()) = cr.z;
  ctx.csv("z_surface.csv", z, "exit-time functional Z in seconds, beta rows x p_ex columns",
          {"runs: " + std::to_string(ens.n_runs)});

  report["grid"] = {{"beta_min", go.beta_min},   {"beta_max", go.beta_max},
                    {"beta_points", go.beta_points}, {"pex_min", go.pex_min},
                    {"pex_max", go.pex_max},     {"pex_points", go.pex_points},
                    {"dt_per_beta", cr.dts}};
  report["argmin"] = {{"beta", cr.beta_min},
                      {"p_ex", cr.pex_min},
                      {"dt_s", cr.dt_min},
                      {"z_s", cr.z_min},
                      {"incomplete_runs", cr.incomplete_runs}};
  out << "argmin beta " << io::format_double(cr.beta_min) << ", p_ex "
      << io::format_double(cr.pex_min) << ", Z " << io::format_double(cr.z_min) << " s\n";

  if (cfg.get_bool("calibrate.estimate_mu0", true)) {
    calibrate::Mu0Options mo;
    mo.mu_min = cfg.get_double("calibrate.mu_min", mo.mu_min);
    mo.coarse_step = cfg.get_double("calibrate.mu_coarse_step", q ? 1.0 : mo.coarse_step);
    mo.fine_step = cfg.get_double("calibrate.mu_fine_step", q ? 0.25 : mo.fine_step);
    mo.ensemble = ens;
    const calibrate::Mu0Result mr =
        calibrate::estimate_mu0(cr.beta_min, cr.pex_min, cr.dt_min, unmotivated, mo);
    io::Table t;
    t.columns = {"mu", "z_s"};
    t.data.resize(static_cast<Eigen::Index>(mr.mus.size()), 2);
    for (std::size_t k = 0; k < mr.mus.size(); ++k) t.data.row(k) << mr.mus[k], mr.zs[k];
    ctx.csv("mu_scan.csv", t, "functional against the less-motivated targets");
    report["mu0"] = {{"mu0", mr.mu0},
                     {"z_s", mr.z},
                     {"mean_exit_times_s", mr.mean_exit},
                     {"implied_speed_m_per_s", calibrate::implied_speed(mr.mu0)}};
    out << "mu0 " << io::format_double(mr.mu0) << ", Z " << io::format_double(mr.z) << " s\n";
  }
  ctx.json_file("report.json", report);
  return kOk;
}

// potential -----------------------------------------------------------------

int cmd_potential(const Common& c, std::ostream& out) {
  const Context ctx = make_context(
      "potential", c, out,
      join({kRunKeys, kCorridorKeys,
            {"potential.scene", "potential.h", "solver.tol", "solver.max_iterations",
             "solver.sor_omega"}}),
      1);
  const io::Config& cfg = ctx.cfg;
  SolverOptions so;
  so.tol = cfg.get_double("solver.tol", so.tol);
  so.max_iterations = cfg.get_int("solver.max_iterations", so.max_iterations);
  so.sor_omega = cfg.get_double("solver.sor_omega", so.sor_omega);
  const std::string scene = cfg.get_string("potential.scene", "corridor");
  const std::vector<std::string> layout = {"layout: row j, column i; closed cells are inf"};

  if (scene == "corridor") {
    const std::vector<double> widths = cfg.get_array("corridor.width", {0.9});
    if (widths.size() != 1) throw ConfigError("corridor.width must be a single value here");
    const CorridorGrid cg = corridor_from(cfg, widths.front());
    const PotentialField d = corridor_distance(cg);
    const PotentialField e = corridor_eikonal(cg, so);
    const PotentialField l = corridor_laplace(cg, so);
    ctx.csv("distance.csv", field_table(d.values), "distance to the exit, m", layout);
    ctx.csv("eikonal.csv", field_table(e.values), "fast-sweeping eikonal potential, m", layout);
    ctx.csv("laplace.csv", field_table(l.values), "Laplace potential", layout);
    const double diff = (e.values - d.values).abs().maxCoeff();
    ctx.json_file("report.json", {{"scene", scene},
                                  {"h", cg.grid.h},
                                  {"max_abs_diff_eikonal_distance", diff},
                                  {"max_abs_diff_in_cells", diff / cg.grid.h},
                                  {"within_two_cells", diff <= 2.0 * cg.grid.h},
                                  {"eikonal_converged", e.converged},
                                  {"laplace_converged", l.converged},
                                  {"laplace_iterations", l.iterations}});
    out << "eikonal vs distance: max |diff| " << io::format_double(diff) << " m ("
        << io::format_double(diff / cg.grid.h) << " cells)\n";
    return kOk;
  }
  const double h = cfg.get_double("potential.h", 0.1);
  ObstacleScene s;
  if (scene == "convex") {
    s = make_convex_obstacle_scene(h);
  } else if (scene == "u_obstacle") {
    s = make_u_obstacle_scene(h);
  } else {
    throw ConfigError("potential.scene must be corridor, convex or u_obstacle, got '" + scene +
                      "'");
  }
  const ObstacleReport r = compare_potentials(s, so);
  ctx.csv("eikonal.csv", field_table(r.eikonal.values), "eikonal potential", layout);
  ctx.csv("laplace.csv", field_table(r.laplace.values), "Laplace potential", layout);
  json j = {{"scene", s.name},
            {"h", h},
            {"mean_cosine", r.mean_cosine},
            {"eikonal_converged", r.eikonal.converged},
            {"laplace_converged", r.laplace.converged}};
  if (scene == "u_obstacle") {
    j["probe"] = {{"i", s.probe.i},
                  {"j", s.probe.j},
                  {"eikonal_descent_y", r.probe_eikonal_y},
                  {"laplace_descent_y", r.probe_laplace_y}};
  }
  ctx.json_file("report.json", j);
  out << s.name << ": mean cosine of descent directions " << io::format_double(r.mean_cosine)
      << "\n";
  return kOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "scenario config file");
  sub->add_option("--out", c.out_dir, "output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "master seed");
  sub->add_option("--runs", c.runs, "ensemble size");
  sub->add_option("--threads", c.threads, "worker threads");
  sub->add_flag("--quick", c.quick, "coarse, low-fidelity settings");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crowd evacuation toolkit: cellular automaton, PDE, Riemann and calibration"};
  app.require_subcommand(1);
  Common common;
  RiemannFlags rf;
  CLI::App* sim = app.add_subcommand("simulate", "cellular automaton ensembles");
  CLI::App* pd = app.add_subcommand("pde", "macroscopic PDE scenarios");
  CLI::App* ri = app.add_subcommand("riemann", "exact 1D exit problem");
  CLI::App* ca = app.add_subcommand("calibrate", "fit the step curve and grid-search parameters");
  CLI::App* po = app.add_subcommand("potential", "potential fields for corridors and obstacles");
  for (CLI::App* s : {sim, pd, ri, ca, po}) add_common(s, common);
  ri->add_option("--rho0", rf.rho0, "initial density in (0, 1)");
  ri->add_option("--pex", rf.p_ex, "exit coefficient in (0, 1]");
  ri->add_option("--length", rf.length, "initial block length");
  ri->add_option("--map", rf.map, "exit-time map of size N x N");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (sim->parsed()) return cmd_simulate(common, out);
    if (pd->parsed()) return cmd_pde(common, out);
    if (ri->parsed()) return cmd_riemann(common, rf, out);
    if (ca->parsed()) return cmd_calibrate(common, out);
    if (po->parsed()) return cmd_potential(common, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const io::IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIoError;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace crowd::cli
