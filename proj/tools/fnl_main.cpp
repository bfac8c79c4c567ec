// fnl: funnel estimates for scalar conservation laws.
//
// Single binary exposing the solver, funnel propagation, dependence and
// support estimates, the confinement pipeline and the geometry utilities.
// Config comes from a JSON file plus --set overrides; every run writes
// report.json (deterministic except the "timing" field), series.csv and
// raster files into the output directory.  Exit 0 on pass, 2 when a check
// fails, 1 on errors.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fnl/confinement.hpp"
#include "fnl/estimates.hpp"
#include "fnl/raster_io.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fnl;

namespace {

struct RunContext {
  json cfg;
  fs::path out;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

[[noreturn]] void config_error(const std::string& what) {
  throw PreconditionError("config: " + what);
}

const json& need(const json& j, const char* key) {
  if (!j.contains(key)) config_error(std::string("missing required key \"") + key + "\"");
  return j.at(key);
}

double need_num(const json& j, const char* key) {
  const json& v = need(j, key);
  if (!v.is_number()) config_error(std::string("key \"") + key + "\" must be a number");
  return v.get<double>();
}

json load_config(const std::string& path, const std::vector<std::string>& sets) {
  json cfg = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config file " + path);
    try {
      in >> cfg;
    } catch (const json::exception& e) {
      config_error("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!cfg.is_object()) config_error("config file must hold a JSON object");
  }
  for (const std::string& kv : sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) config_error("--set expects key=value, got \"" + kv + "\"");
    const std::string keypath = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;  // bare strings allowed without quotes
    }
    json* node = &cfg;
    size_t pos = 0;
    while (true) {
      const size_t dot = keypath.find('.', pos);
      const std::string part = keypath.substr(pos, dot - pos);
      if (part.empty()) config_error("--set key \"" + keypath + "\" has an empty segment");
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &(*node)[part];
      if (!node->is_object() && !node->is_null()) *node = json::object();
      pos = dot + 1;
    }
  }
  return cfg;
}

Grid make_grid(const json& cfg) {
  const int dim = cfg.value("dim", 1);
  if (dim != 1 && dim != 2) config_error("key \"dim\" must be 1 or 2");
  const int cells = cfg.value("cells", 256);
  if (cells < 8) config_error("key \"cells\" must be at least 8");
  double lo = -2, hi = 2;
  if (cfg.contains("domain")) {
    const json& d = cfg.at("domain");
    if (!d.is_array() || d.size() != 2) config_error("key \"domain\" must be [lo, hi]");
    lo = d[0].get<double>();
    hi = d[1].get<double>();
    if (!(lo < hi)) config_error("key \"domain\" needs lo < hi");
  }
  return dim == 1 ? Grid::line(lo, hi, cells) : Grid::box(lo, hi, cells);
}

double grid_halfwidth(const Grid& g) {
  double hw = 0;
  for (int ax = 0; ax < g.dim; ++ax) {
    hw = std::max(hw, std::abs(g.origin[ax]));
    hw = std::max(hw, std::abs(g.origin[ax] + g.spacing * g.extents[ax]));
  }
  return hw;
}

FluxModel make_flux(const json& cfg, const Grid& grid) {
  if (!cfg.contains("flux")) config_error("missing required key \"flux\"");
  const std::string name = cfg.at("flux").get<std::string>();
  const double umax = cfg.value("umax", 1.0);
  FluxModel m;
  if (name == "burgers")
    m = FluxModel::burgers(umax);
  else if (name == "advection")
    m = FluxModel::advection(cfg.value("c", 1.0));
  else if (name == "advection2")
    m = FluxModel::advection2({cfg.value("cx", 1.0), cfg.value("cy", 0.0)});
  else if (name == "sine_drift_burgers")
    m = FluxModel::sine_drift_burgers(cfg.value("amp", 0.5), umax);
  else if (name == "rotation")
    m = FluxModel::rotation(cfg.value("omega", 1.0), grid_halfwidth(grid), umax);
  else
    config_error("key \"flux\" must be one of burgers|advection|advection2|"
                 "sine_drift_burgers|rotation, got \"" + name + "\"");
  if (m.dim != grid.dim)
    config_error("key \"flux\" (" + name + ") is " + std::to_string(m.dim) +
                 "D but the grid is " + std::to_string(grid.dim) + "D");
  return m;
}

Vec2 point_from(const json& j, const char* key, int dim) {
  const json& v = need(j, key);
  if (v.is_number()) {
    if (dim != 1) config_error(std::string("key \"") + key + "\" must be [x, y] on a 2D grid");
    return {v.get<double>(), 0};
  }
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    config_error(std::string("key \"") + key + "\" must have " + std::to_string(dim) +
                 " coordinates");
  Vec2 p{v[0].get<double>(), 0};
  if (dim == 2) p[1] = v[1].get<double>();
  return p;
}

Field make_initial(const json& cfg, const Grid& grid) {
  const json& j = need(cfg, "initial");
  const std::string kind = need(j, "kind").get<std::string>();
  Field u(grid, 0.0);
  if (kind == "box") {
    const Vec2 c = point_from(j, "center", grid.dim);
    const double hw = need_num(j, "halfwidth");
    const double height = j.value("height", 1.0);
    for (int i = 0; i < grid.cell_count(); ++i) {
      const Vec2 p = grid.center(i);
      bool in = std::abs(p[0] - c[0]) <= hw;
      if (grid.dim == 2) in = in && std::abs(p[1] - c[1]) <= hw;
      u.values[i] = in ? height : 0.0;
    }
  } else if (kind == "bump") {
    const Vec2 c = point_from(j, "center", grid.dim);
    const double r = need_num(j, "radius");
    const double height = j.value("height", 1.0);
    for (int i = 0; i < grid.cell_count(); ++i) {
      const double d = norm(grid.center(i) - c);
      u.values[i] = d < r ? height * 0.5 * (1 + std::cos(M_PI * d / r)) : 0.0;
    }
  } else if (kind == "shock") {
    if (grid.dim != 1) config_error("initial kind \"shock\" is 1D only");
    const double x0 = j.value("x0", 0.0);
    const double left = need_num(j, "left"), right = need_num(j, "right");
    for (int i = 0; i < grid.cell_count(); ++i)
      u.values[i] = grid.center(i)[0] < x0 ? left : right;
  } else if (kind == "raster") {
    Raster r = load_values(need(j, "path").get<std::string>());
    if (!(r.grid == grid)) config_error("initial raster grid does not match the config grid");
    u.values = r.values;
  } else {
    config_error("initial kind must be box|bump|shock|raster, got \"" + kind + "\"");
  }
  return u;
}

GridSet make_set(const json& cfg, const char* key, const Grid& grid) {
  const json& j = need(cfg, key);
  const std::string kind = need(j, "kind").get<std::string>();
  if (kind == "ball") {
    const Vec2 c = point_from(j, "center", grid.dim);
    return ball_set(grid, c, need_num(j, "radius"));
  }
  if (kind == "point") {
    const Vec2 c = point_from(j, "center", grid.dim);
    GridSet s(grid);
    s.mask[grid.locate(c)] = 1;
    return s;
  }
  if (kind == "box") {
    const Vec2 c = point_from(j, "center", grid.dim);
    const double hw = need_num(j, "halfwidth");
    GridSet s(grid);
    for (int i = 0; i < grid.cell_count(); ++i) {
      const Vec2 p = grid.center(i);
      bool in = std::abs(p[0] - c[0]) <= hw;
      if (grid.dim == 2) in = in && std::abs(p[1] - c[1]) <= hw;
      s.mask[i] = in ? 1 : 0;
    }
    return s;
  }
  if (kind == "raster") {
    GridSet s = load_mask(need(j, "path").get<std::string>());
    if (!(s.grid == grid)) config_error(std::string("key \"") + key +
                                        "\": raster grid does not match the config grid");
    return s;
  }
  config_error(std::string("key \"") + key + "\": kind must be ball|point|box|raster");
}

void add_check(json& report, const std::string& name, bool pass, double value,
               double threshold) {
  report["checks"].push_back(
      {{"name", name}, {"pass", pass}, {"value", value}, {"threshold", threshold}});
}

void write_csv(const RunContext& ctx, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(ctx.out / "series.csv");
  for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  char buf[40];
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i]);
      out << (i ? "," : "") << buf;
    }
    out << "\n";
  }
}

void save_slice(const RunContext& ctx, const GridSet& s, const std::string& name) {
  fs::create_directories(ctx.out / "rasters");
  save_mask(s, (ctx.out / "rasters" / name).string());
}

int finish(RunContext& ctx, json& report) {
  bool pass = true;
  for (const json& c : report["checks"]) pass = pass && c.at("pass").get<bool>();
  report["pass"] = pass;
  report["inputs"] = ctx.cfg;

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  report["timing"] = {{"timestamp", stamp}, {"runtime_seconds", secs}};

  std::ofstream out(ctx.out / "report.json");
  out << report.dump(2) << "\n";

  for (const json& c : report["checks"])
    std::printf("%-6s %s = %.6g (threshold %.6g)\n",
                c.at("pass").get<bool>() ? "ok" : "FAIL", c.at("name").get<std::string>().c_str(),
                c.at("value").get<double>(), c.at("threshold").get<double>());
  std::printf("%s: %s (%.2fs) -> %s\n", report.at("command").get<std::string>().c_str(),
              pass ? "pass" : "CHECK FAILED", secs, (ctx.out / "report.json").c_str());
  return pass ? 0 : 2;
}

json grid_json(const Grid& g) {
  return {{"dim", g.dim},
          {"cells", g.extents[0]},
          {"spacing", g.spacing},
          {"domain", {g.origin[0], g.origin[0] + g.spacing * g.extents[0]}}};
}

// ---------------------------------------------------------------- solve ----

int run_solve(RunContext& ctx) {
  const Grid grid = make_grid(ctx.cfg);
  const FluxModel flux = make_flux(ctx.cfg, grid);
  const Field u0 = make_initial(ctx.cfg, grid);
  const double T = ctx.cfg.value("T", 1.0);
  SchemeConfig sc;
  sc.cfl = ctx.cfg.value("cfl", 0.45);
  sc.max_snapshots = ctx.cfg.value("snapshots", 33);

  const Trajectory traj = solve(flux, u0, T, sc);

  double lo = u0.values[0], hi = u0.values[0];
  for (double v : u0.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const BoundsEnvelope env = BoundsEnvelope::exponential(lo, hi, flux.lip_x, grid.dim);
  const double tol = ctx.cfg.value("bounds_tol", 1e-8);
  const BoundsReport bounds = verify_bounds(traj, env, tol);

  std::vector<std::vector<double>> rows;
  for (const Field& f : traj.fields) {
    double fmin = f.values[0], fmax = f.values[0];
    for (double v : f.values) {
      fmin = std::min(fmin, v);
      fmax = std::max(fmax, v);
    }
    std::vector<double> row{f.time, total_mass(f), fmin, fmax};
    if (grid.dim == 1) row.push_back(total_variation(f));
    rows.push_back(row);
  }
  write_csv(ctx, grid.dim == 1 ? std::vector<std::string>{"time", "mass", "min", "max", "tv"}
                               : std::vector<std::string>{"time", "mass", "min", "max"},
            rows);

  fs::create_directories(ctx.out / "rasters");
  const int dumps = std::min<int>(ctx.cfg.value("max_raster_dumps", 9),
                                  static_cast<int>(traj.fields.size()));
  for (int k = 0; k < dumps; ++k) {
    const size_t i = dumps == 1 ? 0 : k * (traj.fields.size() - 1) / (dumps - 1);
    char name[32];
    std::snprintf(name, sizeof name, "u_%04zu.fnlr", i);
    save_values(Raster(grid, traj.fields[i].values), (ctx.out / "rasters" / name).string());
  }

  json report{{"command", "solve"}, {"checks", json::array()}};
  report["results"] = {{"steps", traj.steps_taken},
                       {"worst_cfl_used", traj.worst_cfl_used},
                       {"final_mass", total_mass(traj.final())},
                       {"grid", grid_json(grid)}};
  add_check(report, "extrema_within_envelope", bounds.pass, bounds.worst_violation, tol);
  return finish(ctx, report);
}

// --------------------------------------------------------------- funnel ----

int run_funnel(RunContext& ctx) {
  const Grid grid = make_grid(ctx.cfg);
  const GridSet seed = make_set(ctx.cfg, "seed", grid);
  const std::string dir = ctx.cfg.value("direction", "forward");
  if (dir != "forward" && dir != "backward")
    config_error("key \"direction\" must be forward|backward");
  const Direction direction = dir == "forward" ? Direction::Forward : Direction::Backward;
  const double tau0 = ctx.cfg.value("tau0", 0.0);
  const double tau = ctx.cfg.value("tau", 1.0);
  if (!(tau0 < tau)) config_error("keys \"tau0\" < \"tau\" required");

  const json& jf = need(ctx.cfg, "field");
  const std::string kind = need(jf, "kind").get<std::string>();
  std::unique_ptr<VelocityProvider> provider;
  FluxModel flux;
  BoundsEnvelope env = BoundsEnvelope::constant(0, 1);
  if (kind == "ball") {
    provider = std::make_unique<IsotropicProvider>(need_num(jf, "c"), grid.dim);
  } else if (kind == "constant") {
    provider = std::make_unique<SingletonProvider>(point_from(jf, "v", grid.dim), grid.dim);
  } else if (kind == "flux") {
    flux = make_flux(jf, grid);
    env = BoundsEnvelope::exponential(need_num(jf, "a0"), need_num(jf, "b0"), flux.lip_x,
                                      grid.dim);
    provider = std::make_unique<FluxProvider>(flux, env, ctx.cfg.value("nsamp", 64));
  } else {
    config_error("field kind must be ball|constant|flux");
  }

  double dt = ctx.cfg.value("dt", 0.0);
  if (dt <= 0) dt = grid.spacing / std::max(provider->speed_bound(), 1e-12);
  const Funnel funnel = propagate_funnel(*provider, seed, tau0, tau, dt, direction);

  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < funnel.times.size(); ++i)
    rows.push_back({funnel.times[i], double(funnel.slices[i].count()),
                    measure(funnel.slices[i]), set_diameter(funnel.slices[i])});
  write_csv(ctx, {"time", "cells", "measure", "diameter"}, rows);

  if (ctx.cfg.value("save_funnel", false)) save_funnel(funnel, (ctx.out / "funnel").string());
  save_slice(ctx, funnel.slices.front(), "slice_first.fnlr");
  save_slice(ctx, funnel.slices.back(), "slice_last.fnlr");

  json report{{"command", "funnel"}, {"checks", json::array()}};
  report["results"] = {{"slices", funnel.times.size()},
                       {"dt", funnel.dt()},
                       {"final_measure", measure(funnel.slices.back())},
                       {"final_diameter", set_diameter(funnel.slices.back())},
                       {"grid", grid_json(grid)}};

  if (ctx.cfg.value("residual", false)) {
    const ResidualStats rs = proximal_residual(funnel, *provider);
    report["results"]["residual"] = {{"evaluated", rs.evaluated}, {"skipped", rs.skipped},
                                     {"median", rs.median},       {"mean", rs.mean},
                                     {"p90", rs.p90},             {"max", rs.max}};
    add_check(report, "lateral_residual_median", rs.median <= ctx.cfg.value("residual_tol", 0.1),
              rs.median, ctx.cfg.value("residual_tol", 0.1));
  }
  return finish(ctx, report);
}

// ------------------------------------------------------------------ dod ----

int run_dod(RunContext& ctx) {
  const Grid grid = make_grid(ctx.cfg);
  const FluxModel flux = make_flux(ctx.cfg, grid);
  const double a0 = ctx.cfg.value("a0", 0.0);
  const double b0 = ctx.cfg.value("b0", 1.0);
  const Vec2 x = point_from(ctx.cfg, "x", grid.dim);
  const double t = need_num(ctx.cfg, "t");
  EstimateConfig ec;
  ec.nsamp = ctx.cfg.value("nsamp", 64);

  const DodEstimate est = domain_of_dependence(flux, a0, b0, x, t, grid, ec);
  save_slice(ctx, est.set, "dod.fnlr");

  double worst = 0;  // distance of estimate cells beyond the coarse ball
  for (int i = 0; i < grid.cell_count(); ++i)
    if (est.set.mask[i]) worst = std::max(worst, norm(grid.center(i) - x) - est.ball_radius);

  std::vector<std::vector<double>> rows{
      {t, double(est.set.count()), measure(est.set), est.ball_radius}};
  write_csv(ctx, {"t", "cells", "measure", "ball_radius"}, rows);

  json report{{"command", "dod"}, {"checks", json::array()}};
  report["results"] = {{"cells", est.set.count()},
                       {"measure", measure(est.set)},
                       {"diameter", set_diameter(est.set)},
                       {"ball_radius", est.ball_radius},
                       {"grid", grid_json(grid)}};
  add_check(report, "inside_speed_ball", worst <= 2 * grid.spacing, worst, 2 * grid.spacing);
  return finish(ctx, report);
}

// ------------------------------------------------------------- contract ----

std::pair<Field, Field> contract_pair(const json& cfg, const Grid& grid) {
  const std::string kind =
      cfg.contains("pair") ? need(cfg.at("pair"), "kind").get<std::string>() : "regression";
  auto bump = [&](Vec2 c, double r, double height) {
    Field u(grid, 0.0);
    for (int i = 0; i < grid.cell_count(); ++i) {
      const double d = norm(grid.center(i) - c);
      u.values[i] = d < r ? height * 0.5 * (1 + std::cos(M_PI * d / r)) : 0.0;
    }
    return u;
  };
  if (kind == "regression")
    return {bump({-0.3, 0}, 0.4, 1.0), bump({-0.1, 0}, 0.5, 0.8)};
  if (kind == "random") {
    std::mt19937 rng(cfg.at("pair").value("seed", 0u));
    std::uniform_real_distribution<double> center(-0.5, 0.5), radius(0.25, 0.6),
        height(0.4, 1.0);
    return {bump({center(rng), 0}, radius(rng), height(rng)),
            bump({center(rng), 0}, radius(rng), height(rng))};
  }
  config_error("key \"pair.kind\" must be regression|random");
}

int run_contract(RunContext& ctx) {
  const Grid grid = make_grid(ctx.cfg);
  const FluxModel flux = make_flux(ctx.cfg, grid);
  const double tau0 = ctx.cfg.value("tau0", 0.0);
  const double tau = ctx.cfg.value("tau", 0.5);
  auto [u0, ubar0] = contract_pair(ctx.cfg, grid);

  GridSet k = ctx.cfg.contains("k") ? make_set(ctx.cfg, "k", grid)
                                    : ball_set(grid, {0.2, 0}, 0.4);
  EstimateConfig ec;
  ec.nsamp = ctx.cfg.value("nsamp", 64);

  const ContractionReport rep = contraction_check(flux, u0, ubar0, k, tau0, tau, ec);
  save_slice(ctx, rep.backward_set, "backward_set.fnlr");
  save_slice(ctx, k, "k.fnlr");
  if (ctx.cfg.value("save_funnel", false))
    save_funnel(rep.funnel, (ctx.out / "funnel").string());

  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < rep.funnel.times.size(); ++i)
    rows.push_back({rep.funnel.times[i], double(rep.funnel.slices[i].count()),
                    measure(rep.funnel.slices[i])});
  write_csv(ctx, {"time", "cells", "measure"}, rows);

  const double tol = ctx.cfg.value("slack_tol_cells", 2.0) * grid.spacing;
  json report{{"command", "contract"}, {"checks", json::array()}};
  report["results"] = {{"lhs", rep.lhs},
                       {"rhs", rep.rhs},
                       {"slack", rep.slack},
                       {"spacing", rep.spacing},
                       {"grid", grid_json(grid)}};
  add_check(report, "slack_above_neg_tol", rep.slack >= -tol, rep.slack, -tol);
  return finish(ctx, report);
}

// -------------------------------------------------------------- support ----

int run_support(RunContext& ctx) {
  const Grid grid = make_grid(ctx.cfg);
  const FluxModel flux = make_flux(ctx.cfg, grid);
  const Field u0 = make_initial(ctx.cfg, grid);
  const double T = ctx.cfg.value("T", 1.0);
  EstimateConfig ec;
  ec.nsamp = ctx.cfg.value("nsamp", 64);
  // Threshold at the scheme's smearing floor (a few percent of the data
  // sup-norm): a first-order march lays a diffusion tail ~sqrt(aT/h) cells
  // wide, and a threshold far below its amplitude measures that tail instead
  // of the support.
  ec.support_tol = ctx.cfg.value("support_tol", ec.support_tol);

  const SupportReport rep = support_envelope(flux, u0, T, ec);

  std::vector<std::vector<double>> rows;
  for (const auto& [t, p] : rep.per_time) rows.push_back({t, p});
  write_csv(ctx, {"time", "protrusion"}, rows);
  save_slice(ctx, rep.funnel.slices.back(), "envelope_last.fnlr");
  save_slice(ctx, support_of_field(Raster(grid, rep.trajectory.final().values), ec.support_tol),
             "support_last.fnlr");

  json report{{"command", "support"}, {"checks", json::array()}};
  report["results"] = {{"worst_protrusion", rep.worst_protrusion},
                       {"worst_time", rep.worst_time},
                       {"times_checked", rep.per_time.size()},
                       {"grid", grid_json(grid)}};
  add_check(report, "support_within_two_cells", rep.contained, rep.worst_protrusion,
            2 * grid.spacing);
  return finish(ctx, report);
}

// -------------------------------------------------------------- perturb ----

int run_perturb(RunContext& ctx) {
  const Grid grid = make_grid(ctx.cfg);
  const FluxModel flux = make_flux(ctx.cfg, grid);
  const Field u0 = make_initial(ctx.cfg, grid);
  const Vec2 x = point_from(ctx.cfg, "x", grid.dim);
  const double t = need_num(ctx.cfg, "t");
  const double eps = ctx.cfg.value("eps", 0.1);
  std::vector<double> offsets = ctx.cfg.value("offsets", std::vector<double>{0.3, 0.5, 0.7});
  if (offsets.empty()) config_error("key \"offsets\" must not be empty");
  const double tol = ctx.cfg.value("probe_tol", 1e-6);

  EstimateConfig ec;
  ec.nsamp = ctx.cfg.value("nsamp", 64);
  const DodEstimate est = domain_of_dependence(flux, 0.0, 1.0, x, t, grid, ec);
  const Raster dist = distance_field(est.set);
  const double w_halfwidth = ctx.cfg.value("w_halfwidth", 10 * grid.spacing);

  // Place the bump at increasing distances beyond the dependence estimate,
  // on the far side from the domain edge.
  std::vector<std::vector<double>> rows;
  json sweep = json::array();
  double prev = 1e300;
  bool monotone = true, below = true;
  for (double off : offsets) {
    // Find a cell at distance ~ off + w_halfwidth from the estimate.
    const double want = off + w_halfwidth;
    int best = -1;
    double best_err = 1e300;
    for (int i = 0; i < grid.cell_count(); ++i) {
      const double err = std::abs(dist.values[i] - want);
      if (err < best_err) {
        best_err = err;
        best = i;
      }
    }
    const Vec2 c = grid.center(best);
    Field w(grid, 0.0);
    for (int i = 0; i < grid.cell_count(); ++i) {
      const double d = norm(grid.center(i) - c);
      w.values[i] = d < w_halfwidth ? 0.5 * (1 + std::cos(M_PI * d / w_halfwidth)) : 0.0;
    }
    // Normalize: the cosine bump peaks at 1 only if a cell center hits c.
    double wmax = 0;
    for (double v : w.values) wmax = std::max(wmax, std::abs(v));
    for (double& v : w.values) v /= wmax;

    const PerturbationReport rep =
        perturbation_test(flux, u0, w, x, t, eps, ctx.cfg.value("probe_radius", 0.0), ec);
    rows.push_back({off, rep.clearance, rep.probe});
    sweep.push_back({{"offset", off}, {"clearance", rep.clearance}, {"probe", rep.probe}});
    monotone = monotone && rep.probe <= prev + 1e-14;
    below = below && rep.probe <= tol;
    prev = rep.probe;
  }
  write_csv(ctx, {"offset", "clearance", "probe"}, rows);
  save_slice(ctx, est.set, "dod.fnlr");

  json report{{"command", "perturb"}, {"checks", json::array()}};
  report["results"] = {{"sweep", sweep}, {"eps", eps}, {"grid", grid_json(grid)}};
  add_check(report, "probe_below_tol", below, rows.front()[2], tol);
  add_check(report, "probe_nonincreasing", monotone, rows.back()[2], rows.front()[2]);
  return finish(ctx, report);
}

// -------------------------------------------------------------- confine ----

ConfinementScenario scenario_from(const json& cfg) {
  if (!cfg.contains("scenario")) config_error("missing required key \"scenario\"");
  return ConfinementScenario::from_json(cfg.at("scenario"));
}

int run_confine_check(RunContext& ctx) {
  const ConfinementScenario sc = scenario_from(ctx.cfg);
  const int samples = ctx.cfg.value("samples", 101);
  const ConditionVerdict v = check_condition(sc, samples);

  std::vector<std::vector<double>> rows;
  auto psi = [&](double d) { return sc.psi(d); };
  for (int i = 0; i < samples; ++i) {
    const double rstar = sc.Rminus + (sc.Rplus - sc.Rminus) * i / double(samples - 1);
    rows.push_back({rstar, condition_lhs(psi, sc.n, sc.R, rstar)});
  }
  write_csv(ctx, {"rstar", "lhs"}, rows);

  json report{{"command", "confine-check"}, {"checks", json::array()}};
  report["results"] = {{"satisfied", v.satisfied},
                       {"margin", v.margin},
                       {"max_lhs", v.max_lhs},
                       {"worst_rstar", v.worst_rstar}};
  add_check(report, "condition_margin_positive", v.satisfied, v.margin, 0.0);
  return finish(ctx, report);
}

std::pair<Grid, GridSet> confine_grid_and_seed(const json& cfg, const ConfinementScenario& sc) {
  const double hw = sc.box_halfwidth > 0 ? sc.box_halfwidth : sc.Rplus + 1.0;
  const Grid grid = Grid::box(-hw, hw, sc.cells);
  GridSet k0 = cfg.contains("k0") ? make_set(cfg, "k0", grid)
                                  : ball_set(grid, {0, 0}, 0.9 * sc.Rminus);
  return {grid, k0};
}

int run_confine_simulate(RunContext& ctx) {
  const ConfinementScenario sc = scenario_from(ctx.cfg);
  auto [grid, k0] = confine_grid_and_seed(ctx.cfg, sc);
  const double omega = sc.omega > 0 ? sc.omega : default_control_rate(sc);
  const ControlPath control = rotating_control(sc.R, omega);

  const ConfinementResult res =
      simulate_confinement(sc, control, k0, sc.T, ctx.cfg.value("dt", 0.0));

  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < res.funnel.times.size(); ++i) {
    double rmax = 0;
    const GridSet& s = res.funnel.slices[i];
    for (int c = 0; c < grid.cell_count(); ++c)
      if (s.mask[c]) rmax = std::max(rmax, norm(grid.center(c)));
    rows.push_back({res.funnel.times[i], rmax, measure(s)});
  }
  write_csv(ctx, {"time", "max_radius", "measure"}, rows);
  save_slice(ctx, res.funnel.slices.back(), "support_final.fnlr");
  if (ctx.cfg.value("save_funnel", false))
    save_funnel(res.funnel, (ctx.out / "funnel").string());

  json report{{"command", "confine-simulate"}, {"checks", json::array()}};
  report["results"] = {{"max_radius", res.max_radius},
                       {"worst_time", res.worst_time},
                       {"condition_ok", res.condition_ok},
                       {"omega", omega},
                       {"grid", grid_json(grid)}};
  add_check(report, "confined_within_rplus", res.confined, res.max_radius,
            sc.Rplus + 2 * grid.spacing);
  return finish(ctx, report);
}

int run_confine_sweep(RunContext& ctx) {
  const ConfinementScenario sc = scenario_from(ctx.cfg);
  auto [grid, k0] = confine_grid_and_seed(ctx.cfg, sc);
  const double base = sc.omega > 0 ? sc.omega : default_control_rate(sc);
  std::vector<double> factors =
      ctx.cfg.value("omega_factors", std::vector<double>{0.5, 1.0, 2.0});
  if (factors.empty()) config_error("key \"omega_factors\" must not be empty");

  std::vector<std::vector<double>> rows;
  json runs = json::array();
  bool all_confined = true;
  for (double f : factors) {
    const double omega = base * f;
    const ConfinementResult res = simulate_confinement(sc, rotating_control(sc.R, omega), k0,
                                                       sc.T, ctx.cfg.value("dt", 0.0));
    rows.push_back({omega, res.max_radius, res.confined ? 1.0 : 0.0});
    runs.push_back({{"omega", omega},
                    {"max_radius", res.max_radius},
                    {"confined", res.confined}});
    all_confined = all_confined && res.confined;
  }
  write_csv(ctx, {"omega", "max_radius", "confined"}, rows);

  json report{{"command", "confine-sweep"}, {"checks", json::array()}};
  report["results"] = {{"runs", runs}, {"base_omega", base}, {"grid", grid_json(grid)}};
  double worst = 0;
  for (const auto& row : rows) worst = std::max(worst, row[1]);
  add_check(report, "all_rates_confined", all_confined, worst, sc.Rplus + 2 * grid.spacing);
  return finish(ctx, report);
}

// ----------------------------------------------------------------- geom ----

GridSet make_shape(const json& cfg, const Grid& grid) {
  const std::string shape = cfg.value("shape", "disk");
  if (shape == "disk")
    return ball_set(grid, {0, 0}, cfg.value("radius", 1.0));
  if (shape == "square") {
    GridSet s(grid);
    const double hw = cfg.value("radius", 1.0);
    for (int i = 0; i < grid.cell_count(); ++i) {
      const Vec2 p = grid.center(i);
      s.mask[i] = std::abs(p[0]) <= hw && std::abs(p[1]) <= hw;
    }
    return s;
  }
  if (shape == "annulus") {
    const double r0 = cfg.value("inner", 0.5), r1 = cfg.value("radius", 1.0);
    return set_difference(ball_set(grid, {0, 0}, r1), ball_set(grid, {0, 0}, r0));
  }
  config_error("key \"shape\" must be disk|square|annulus");
}

int run_geom_content(RunContext& ctx) {
  if (!ctx.cfg.contains("dim")) ctx.cfg["dim"] = 2;
  const Grid grid = make_grid(ctx.cfg);
  const GridSet a = make_shape(ctx.cfg, grid);
  // Default probe radii scale with the set: the dilation quotient's error is
  // O(spacing/r) + O(r), so r around 5..15% of the diameter balances both.
  std::vector<double> radii;
  if (ctx.cfg.contains("radii")) {
    radii = ctx.cfg.at("radii").get<std::vector<double>>();
  } else {
    const double d = set_diameter(a);
    radii = {0.05 * d, 0.075 * d, 0.1 * d, 0.15 * d};
  }
  const MinkowskiEstimate est = minkowski_content(a, radii);

  std::vector<std::vector<double>> rows;
  for (const auto& [r, q] : est.table) rows.push_back({r, q});
  write_csv(ctx, {"r", "quotient"}, rows);
  save_slice(ctx, a, "shape.fnlr");

  json report{{"command", "geom-content"}, {"checks", json::array()}};
  report["results"] = {{"content", est.content},
                       {"slope", est.slope},
                       {"measure", measure(a)},
                       {"grid", grid_json(grid)}};
  if (ctx.cfg.contains("exact")) {
    const double exact = need_num(ctx.cfg, "exact");
    const double rel = std::abs(est.content - exact) / std::abs(exact);
    add_check(report, "content_relative_error", rel <= ctx.cfg.value("tol_rel", 0.05), rel,
              ctx.cfg.value("tol_rel", 0.05));
  }
  return finish(ctx, report);
}

int run_geom_tubular(RunContext& ctx) {
  if (!ctx.cfg.contains("dim")) ctx.cfg["dim"] = 2;
  const Grid grid = make_grid(ctx.cfg);
  const GridSet a = make_shape(ctx.cfg, grid);
  const double r = ctx.cfg.value("r", 3 * grid.spacing);
  const double tol = ctx.cfg.value("tol", 2 * grid.spacing);
  const bool verdict = is_tubular(a, r, tol);

  write_csv(ctx, {"r", "tol", "tubular"}, {{r, tol, verdict ? 1.0 : 0.0}});
  save_slice(ctx, a, "shape.fnlr");

  json report{{"command", "geom-tubular"}, {"checks", json::array()}};
  report["results"] = {{"tubular", verdict}, {"r", r}, {"tol", tol}, {"grid", grid_json(grid)}};
  if (ctx.cfg.contains("expect")) {
    const bool expect = ctx.cfg.at("expect").get<bool>();
    add_check(report, "tubular_matches_expected", verdict == expect, verdict ? 1.0 : 0.0,
              expect ? 1.0 : 0.0);
  }
  return finish(ctx, report);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"funnel estimates for scalar conservation laws"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "JSON config file")->expected(1);
  app.add_option("--out", out_dir, "output directory (default: out)");
  app.add_option("--set", sets, "override a config key: --set key.path=value");

  CLI::App* c_solve = app.add_subcommand("solve", "march a conservation law");
  CLI::App* c_funnel = app.add_subcommand("funnel", "propagate an integral funnel");
  CLI::App* c_dod = app.add_subcommand("dod", "domain-of-dependence estimate at (x,t)");
  CLI::App* c_contract = app.add_subcommand("contract", "funnel comparison bound on a data pair");
  CLI::App* c_support = app.add_subcommand("support", "support containment check");
  CLI::App* c_perturb = app.add_subcommand("perturb", "far-perturbation influence test");
  CLI::App* c_confine = app.add_subcommand("confine", "confinement pipeline");
  CLI::App* cc_check = c_confine->add_subcommand("check", "evaluate the confinement condition");
  CLI::App* cc_sim = c_confine->add_subcommand("simulate", "propagate a controlled support");
  CLI::App* cc_sweep = c_confine->add_subcommand("sweep", "simulate over control rates");
  c_confine->require_subcommand(1);
  CLI::App* c_geom = app.add_subcommand("geom", "geometry utilities");
  CLI::App* cg_content = c_geom->add_subcommand("content", "outer Minkowski content");
  CLI::App* cg_tubular = c_geom->add_subcommand("tubular", "interior-ball check");
  c_geom->require_subcommand(1);

  // Accept --config/--out/--set after the subcommand name too.
  for (CLI::App* s : {c_solve, c_funnel, c_dod, c_contract, c_support, c_perturb, c_confine,
                      cc_check, cc_sim, cc_sweep, c_geom, cg_content, cg_tubular})
    s->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    RunContext ctx;
    ctx.cfg = load_config(config_path, sets);
    ctx.out = out_dir;
    fs::create_directories(ctx.out);

    if (c_solve->parsed()) return run_solve(ctx);
    if (c_funnel->parsed()) return run_funnel(ctx);
    if (c_dod->parsed()) return run_dod(ctx);
    if (c_contract->parsed()) return run_contract(ctx);
    if (c_support->parsed()) return run_support(ctx);
    if (c_confine->parsed()) {
      if (cc_check->parsed()) return run_confine_check(ctx);
      if (cc_sim->parsed()) return run_confine_simulate(ctx);
      if (cc_sweep->parsed()) return run_confine_sweep(ctx);
    }
    if (c_geom->parsed()) {
      if (cg_content->parsed()) return run_geom_content(ctx);
      if (cg_tubular->parsed()) return run_geom_tubular(ctx);
    }
    if (c_perturb->parsed()) return run_perturb(ctx);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  std::fprintf(stderr, "error: no subcommand\n");
  return 1;
}
