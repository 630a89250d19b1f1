#pragma once
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qdd/boundary.hpp"
#include "qdd/cost.hpp"
#include "qdd/doping.hpp"
#include "qdd/geometry.hpp"
#include "qdd/io.hpp"
#include "qdd/mesh.hpp"
#include "qdd/optimizer.hpp"
#include "qdd/state.hpp"

namespace qdd {

// tracking-cost settings as written in the file; the target may be given
// outright or as a factor on the reference current measured at run time
struct CostSpec {
  CostKind kind = CostKind::current_tracking;
  double gamma = 1.0;
  std::string contact = "drain";
  double target_current = std::numeric_limits<double>::quiet_NaN();
  double target_factor = 2.0;
  std::string target_density_file;
};

struct SweepSpec {
  int n_max = 5;
  double eps2_base = std::numeric_limits<double>::quiet_NaN();  // default: physics value
  bool warm_start = true;
  int grid = 80;
};

struct RunConfig {
  DeviceGeometry geometry = default_mesfet();
  double alpha_v = 1.0;   // prefactor on every applied contact voltage
  double delta_c = 1.0;   // intrinsic density scale in the contact data
  ModelParams params;
  std::string v_ext_file;
  SolverConfig solver;
  CostSpec cost;
  ArmijoConfig optimizer;
  SweepSpec sweep;
  std::string out_dir = "out";
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline double parse_num(const std::string& key, const std::string& v, int line) {
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0')
    throw config_error(key + ": not a number: '" + v + "'", line);
  return x;
}

inline int parse_int(const std::string& key, const std::string& v, int line) {
  double x = parse_num(key, v, line);
  int i = static_cast<int>(x);
  if (static_cast<double>(i) != x)
    throw config_error(key + ": not an integer: '" + v + "'", line);
  return i;
}

inline bool parse_bool(const std::string& key, const std::string& v, int line) {
  if (v == "true" || v == "on" || v == "1") return true;
  if (v == "false" || v == "off" || v == "0") return false;
  throw config_error(key + ": not a boolean: '" + v + "'", line);
}

inline ContactSpec parse_contact(const std::string& v, int line) {
  std::istringstream in(v);
  ContactSpec c;
  std::string edge, extra;
  if (!(in >> c.name >> edge >> c.lo >> c.hi >> c.U >> c.alpha) || (in >> extra))
    throw config_error(
        "geometry.contact: expected 'name edge lo hi voltage alpha'", line);
  try {
    c.edge = edge_from_name(edge);
  } catch (const geometry_error& e) {
    throw config_error(std::string("geometry.contact: ") + e.what(), line);
  }
  return c;
}

inline Rect parse_rect(const std::string& v, int line) {
  std::istringstream in(v);
  Rect r;
  std::string extra;
  if (!(in >> r.x0 >> r.x1 >> r.y0 >> r.y1) || (in >> extra))
    throw config_error("geometry.nplus: expected 'x0 x1 y0 y1'", line);
  return r;
}

}  // namespace detail

inline void validate_config(const RunConfig& rc) {
  validate(rc.geometry);
  if (!(rc.params.lambda2 > 0.0))
    throw config_error("physics.lambda2 must be > 0");
  if (!(rc.params.eps2 >= 0.0))
    throw config_error("physics.eps2 must be >= 0");
  if (!(rc.delta_c > 0.0)) throw config_error("physics.delta_c must be > 0");
  if (!(rc.alpha_v > 0.0)) throw config_error("physics.alpha_v must be > 0");
  if (!(rc.solver.nonlinear_tol > 0.0))
    throw config_error("solver.nonlinear_tol must be > 0");
  if (rc.solver.max_outer < 1) throw config_error("solver.max_outer must be >= 1");
  if (!(rc.solver.damping_floor > 0.0 && rc.solver.damping_floor <= 1.0))
    throw config_error("solver.damping_floor must be in (0, 1]");
  if (!(rc.solver.rho_floor > 0.0))
    throw config_error("solver.rho_floor must be > 0");
  if (!(rc.cost.gamma > 0.0)) throw config_error("cost.gamma must be > 0");
  if (!(rc.cost.target_factor > 0.0))
    throw config_error("cost.target_factor must be > 0");
  bool known = false;
  for (const auto& c : rc.geometry.contacts) known |= (c.name == rc.cost.contact);
  if (!known)
    throw config_error("cost.contact names an undeclared contact: " +
                       rc.cost.contact);
  if (!(rc.optimizer.c1 > 0.0 && rc.optimizer.c1 < 1.0))
    throw config_error("optimizer.c1 must be in (0, 1)");
  if (!(rc.optimizer.backtrack > 0.0 && rc.optimizer.backtrack < 1.0))
    throw config_error("optimizer.backtrack must be in (0, 1)");
  if (!(rc.optimizer.alpha0 > 0.0))
    throw config_error("optimizer.alpha0 must be > 0");
  if (rc.optimizer.max_backtracks < 1)
    throw config_error("optimizer.max_backtracks must be >= 1");
  if (!(rc.optimizer.grad_tol >= 0.0))
    throw config_error("optimizer.grad_tol must be >= 0");
  if (rc.optimizer.max_iters < 0)
    throw config_error("optimizer.max_iters must be >= 0");
  if (rc.sweep.n_max < 0) throw config_error("sweep.n_max must be >= 0");
  if (!std::isnan(rc.sweep.eps2_base) && !(rc.sweep.eps2_base >= 0.0))
    throw config_error("sweep.eps2_base must be >= 0");
  if (rc.sweep.grid < 4) throw config_error("sweep.grid must be >= 4");
}

// flat sectioned key=value text; '#' comments; 'contact' and 'nplus' repeat,
// and their first occurrence replaces the built-in defaults
inline RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  RunConfig rc;
  std::string section, line;
  int lineno = 0;
  bool contacts_cleared = false, nplus_cleared = false;

  while (std::getline(in, line)) {
    ++lineno;
    std::string s = detail::trim(line);
    size_t hash = s.find('#');
    if (hash != std::string::npos) s = detail::trim(s.substr(0, hash));
    if (s.empty()) continue;

    if (s.front() == '[') {
      if (s.back() != ']')
        throw config_error("unterminated section header", lineno);
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section != "geometry" && section != "physics" && section != "solver" &&
          section != "cost" && section != "optimizer" && section != "sweep" &&
          section != "output")
        throw config_error("unknown section [" + section + "]", lineno);
      continue;
    }

    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw config_error("expected 'key = value'", lineno);
    std::string key = detail::trim(s.substr(0, eq));
    std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty() || val.empty())
      throw config_error("expected 'key = value'", lineno);
    if (section.empty())
      throw config_error("key '" + key + "' outside any section", lineno);
    std::string full = section + "." + key;

    auto num = [&] { return detail::parse_num(full, val, lineno); };
    auto integer = [&] { return detail::parse_int(full, val, lineno); };
    auto boolean = [&] { return detail::parse_bool(full, val, lineno); };

    if (section == "geometry") {
      if (key == "width") rc.geometry.width = num();
      else if (key == "height") rc.geometry.height = num();
      else if (key == "channel_doping") rc.geometry.channel_doping = num();
      else if (key == "nplus_doping") rc.geometry.nplus_doping = num();
      else if (key == "smoothing_cells") rc.geometry.smoothing_cells = num();
      else if (key == "contact") {
        if (!contacts_cleared) rc.geometry.contacts.clear();
        contacts_cleared = true;
        rc.geometry.contacts.push_back(detail::parse_contact(val, lineno));
      } else if (key == "nplus") {
        if (!nplus_cleared) rc.geometry.nplus.clear();
        nplus_cleared = true;
        rc.geometry.nplus.push_back(detail::parse_rect(val, lineno));
      } else throw config_error("unknown key " + full, lineno);
    } else if (section == "physics") {
      if (key == "lambda2") rc.params.lambda2 = num();
      else if (key == "eps2") rc.params.eps2 = num();
      else if (key == "delta_c") rc.delta_c = num();
      else if (key == "alpha_v") rc.alpha_v = num();
      else if (key == "enthalpy_cap") rc.params.enthalpy.cap = num();
      else if (key == "v_ext_file") rc.v_ext_file = val;
      else throw config_error("unknown key " + full, lineno);
    } else if (section == "solver") {
      if (key == "nonlinear_tol") rc.solver.nonlinear_tol = num();
      else if (key == "max_outer") rc.solver.max_outer = integer();
      else if (key == "damping_floor") rc.solver.damping_floor = num();
      else if (key == "newton_switch") rc.solver.newton_switch = num();
      else if (key == "max_newton") rc.solver.max_newton = integer();
      else if (key == "rho_floor") rc.solver.rho_floor = num();
      else if (key == "init_smoothing_cells") rc.solver.init_smoothing_cells = num();
      else if (key == "linear_tol") rc.solver.linear.tol = num();
      else if (key == "direct_limit") rc.solver.linear.direct_limit = integer();
      else if (key == "max_cg_iters") rc.solver.linear.max_cg_iters = integer();
      else if (key == "verbose") rc.solver.verbose = boolean();
      else throw config_error("unknown key " + full, lineno);
    } else if (section == "cost") {
      if (key == "kind") {
        if (val == "current") rc.cost.kind = CostKind::current_tracking;
        else if (val == "density") rc.cost.kind = CostKind::density_tracking;
        else throw config_error("cost.kind must be 'current' or 'density'", lineno);
      } else if (key == "gamma") rc.cost.gamma = num();
      else if (key == "contact") rc.cost.contact = val;
      else if (key == "target_current") rc.cost.target_current = num();
      else if (key == "target_factor") rc.cost.target_factor = num();
      else if (key == "target_density_file") rc.cost.target_density_file = val;
      else throw config_error("unknown key " + full, lineno);
    } else if (section == "optimizer") {
      if (key == "c1") rc.optimizer.c1 = num();
      else if (key == "backtrack") rc.optimizer.backtrack = num();
      else if (key == "alpha0") rc.optimizer.alpha0 = num();
      else if (key == "max_backtracks") rc.optimizer.max_backtracks = integer();
      else if (key == "grad_tol") rc.optimizer.grad_tol = num();
      else if (key == "max_iters") rc.optimizer.max_iters = integer();
      else throw config_error("unknown key " + full, lineno);
    } else if (section == "sweep") {
      if (key == "n_max") rc.sweep.n_max = integer();
      else if (key == "eps2_base") rc.sweep.eps2_base = num();
      else if (key == "warm_start") rc.sweep.warm_start = boolean();
      else if (key == "grid") rc.sweep.grid = integer();
      else throw config_error("unknown key " + full, lineno);
    } else {  // output
      if (key == "dir") rc.out_dir = val;
      else throw config_error("unknown key " + full, lineno);
    }
  }

  validate_config(rc);
  return rc;
}

// every effective setting in a fixed order, for summaries and run logs
inline std::vector<std::pair<std::string, std::string>> config_echo(
    const RunConfig& rc) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto put = [&](const std::string& k, const std::string& v) {
    kv.emplace_back("config." + k, v);
  };
  put("geometry.width", g17(rc.geometry.width));
  put("geometry.height", g17(rc.geometry.height));
  put("geometry.channel_doping", g17(rc.geometry.channel_doping));
  put("geometry.nplus_doping", g17(rc.geometry.nplus_doping));
  put("geometry.smoothing_cells", g17(rc.geometry.smoothing_cells));
  for (const auto& c : rc.geometry.contacts)
    put("geometry.contact." + c.name,
        std::string(edge_name(c.edge)) + " " + g17(c.lo) + " " + g17(c.hi) +
            " " + g17(c.U) + " " + g17(c.alpha));
  for (size_t i = 0; i < rc.geometry.nplus.size(); ++i) {
    const Rect& r = rc.geometry.nplus[i];
    put("geometry.nplus." + std::to_string(i), g17(r.x0) + " " + g17(r.x1) +
                                                   " " + g17(r.y0) + " " +
                                                   g17(r.y1));
  }
  put("physics.lambda2", g17(rc.params.lambda2));
  put("physics.eps2", g17(rc.params.eps2));
  put("physics.delta_c", g17(rc.delta_c));
  put("physics.alpha_v", g17(rc.alpha_v));
  put("physics.enthalpy_cap", g17(rc.params.enthalpy.cap));
  put("physics.v_ext_file", rc.v_ext_file.empty() ? "(none)" : rc.v_ext_file);
  put("solver.nonlinear_tol", g17(rc.solver.nonlinear_tol));
  put("solver.max_outer", std::to_string(rc.solver.max_outer));
  put("solver.damping_floor", g17(rc.solver.damping_floor));
  put("solver.newton_switch", g17(rc.solver.newton_switch));
  put("solver.max_newton", std::to_string(rc.solver.max_newton));
  put("solver.rho_floor", g17(rc.solver.rho_floor));
  put("solver.init_smoothing_cells", g17(rc.solver.init_smoothing_cells));
  put("solver.linear_tol", g17(rc.solver.linear.tol));
  put("solver.direct_limit", std::to_string(rc.solver.linear.direct_limit));
  put("solver.max_cg_iters", std::to_string(rc.solver.linear.max_cg_iters));
  put("solver.verbose", rc.solver.verbose ? "true" : "false");
  put("cost.kind", rc.cost.kind == CostKind::current_tracking ? "current"
                                                              : "density");
  put("cost.gamma", g17(rc.cost.gamma));
  put("cost.contact", rc.cost.contact);
  put("cost.target_current", std::isnan(rc.cost.target_current)
                                 ? "(from factor)"
                                 : g17(rc.cost.target_current));
  put("cost.target_factor", g17(rc.cost.target_factor));
  put("cost.target_density_file", rc.cost.target_density_file.empty()
                                      ? "(none)"
                                      : rc.cost.target_density_file);
  put("optimizer.c1", g17(rc.optimizer.c1));
  put("optimizer.backtrack", g17(rc.optimizer.backtrack));
  put("optimizer.alpha0", g17(rc.optimizer.alpha0));
  put("optimizer.max_backtracks", std::to_string(rc.optimizer.max_backtracks));
  put("optimizer.grad_tol", g17(rc.optimizer.grad_tol));
  put("optimizer.max_iters", std::to_string(rc.optimizer.max_iters));
  put("sweep.n_max", std::to_string(rc.sweep.n_max));
  put("sweep.eps2_base", std::isnan(rc.sweep.eps2_base)
                             ? "(physics.eps2)"
                             : g17(rc.sweep.eps2_base));
  put("sweep.warm_start", rc.sweep.warm_start ? "true" : "false");
  put("sweep.grid", std::to_string(rc.sweep.grid));
  put("output.dir", rc.out_dir);
  return kv;
}

// key table for --help
inline const char* config_help() {
  return
      "config file keys (defaults in parentheses):\n"
      "  [geometry] width (1), height (1), channel_doping (0.01),\n"
      "    nplus_doping (1), smoothing_cells (3),\n"
      "    contact = name edge lo hi voltage alpha   (repeatable; default\n"
      "      MESFET: source/gate/drain on the top edge),\n"
      "    nplus = x0 x1 y0 y1                       (repeatable)\n"
      "  [physics] lambda2 (0.0017), eps2 (1.88e-4), delta_c (1),\n"
      "    alpha_v (1; scales every contact voltage), enthalpy_cap (0 = off),\n"
      "    v_ext_file (none; x,y,value CSV on the run grid)\n"
      "  [solver] nonlinear_tol (1e-8), max_outer (500), damping_floor\n"
      "    (0.0625), newton_switch (1e-3), max_newton (60), rho_floor (1e-12),\n"
      "    init_smoothing_cells (2), linear_tol (1e-12), direct_limit (25600),\n"
      "    max_cg_iters (20000), verbose (false)\n"
      "  [cost] kind (current | density), gamma (1), contact (drain),\n"
      "    target_current (unset), target_factor (2; applied to the reference\n"
      "    current when target_current is unset), target_density_file (none)\n"
      "  [optimizer] c1 (1e-4), backtrack (0.5), alpha0 (1), max_backtracks\n"
      "    (30), grad_tol (1e-6), max_iters (100)\n"
      "  [sweep] n_max (5), eps2_base (physics.eps2), warm_start (true),\n"
      "    grid (80)\n"
      "  [output] dir (out)\n";
}

struct RunSetup {
  std::shared_ptr<const Mesh> mesh;
  ScalarField C;
  BoundaryData bc;
  ModelParams params;
};

inline RunSetup make_run_setup(const RunConfig& rc) {
  DeviceGeometry g = rc.geometry;
  for (auto& c : g.contacts) c.U *= rc.alpha_v;
  auto mesh = build_mesh(g, rc.sweep.grid, rc.sweep.grid);
  RunSetup s;
  s.mesh = mesh;
  s.C = reference_doping(mesh);
  s.bc = make_boundary_data(s.C, rc.delta_c);
  s.params = rc.params;
  if (!rc.v_ext_file.empty())
    s.params.V_ext = read_field_csv(rc.v_ext_file, mesh);
  return s;
}

inline CostConfig make_cost(const RunConfig& rc, const RunSetup& s,
                            double reference_current) {
  double target = std::isnan(rc.cost.target_current)
                      ? rc.cost.target_factor * reference_current
                      : rc.cost.target_current;
  if (rc.cost.kind == CostKind::current_tracking)
    return make_current_cost(s.C, target, rc.cost.gamma, rc.cost.contact,
                             rc.solver.linear);
  if (rc.cost.target_density_file.empty())
    throw config_error("cost.target_density_file is required for density tracking");
  ScalarField nd = read_field_csv(rc.cost.target_density_file, s.mesh);
  return make_density_cost(s.C, nd, rc.cost.gamma, rc.cost.contact,
                           rc.solver.linear);
}

}  // namespace qdd
