#include <filesystem>
#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "qdd/sweep.hpp"

using namespace qdd;
using namespace qdd::testing;
using Catch::Approx;

namespace {

std::string scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "qdd_test_sweep";
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CostConfig doubled_current_cost(const Setup& s, const ModelParams& p) {
  SolveResult ref = solve_state(s.C, s.bc, p, s.cfg);
  CostConfig probe = make_current_cost(s.C, 0.0);
  double I = observed_current(ref.state, probe);
  return make_current_cost(s.C, 2.0 * I, 1.0);
}

}  // namespace

TEST_CASE("degenerate ladder collapses onto the classical baseline") {
  Setup s = mesfet_setup(12);
  ModelParams pdd;
  pdd.eps2 = 0.0;
  CostConfig cost = doubled_current_cost(s, pdd);
  ArmijoConfig acfg;
  acfg.max_iters = 2;

  SweepReport rep =
      run_epsilon_sweep(s.C, s.bc, pdd, acfg, cost, s.cfg, 0, 0.0);
  REQUIRE(rep.rows.size() == 2);
  const SweepRow& base = rep.rows[0];
  const SweepRow& rung = rep.rows[1];
  CHECK(base.n == -1);
  CHECK(base.eps2 == 0.0);
  CHECK(base.ok);
  CHECK(base.dist_C == 0.0);
  CHECK(rung.n == 0);
  CHECK(rung.eps2 == 0.0);
  CHECK(rung.ok);
  CHECK(rung.dist_C == 0.0);
  CHECK(rung.dist_n == 0.0);
  CHECK(rung.dist_S == 0.0);
  CHECK(rung.cost_gap == 0.0);
  CHECK(rung.cost == base.cost);
}

TEST_CASE("rung failures leave the rest of the ladder standing") {
  Setup s = mesfet_setup(12);
  ModelParams p;
  CostConfig cost = doubled_current_cost(s, p);
  ArmijoConfig acfg;
  acfg.max_iters = 1;
  SolverConfig broken = s.cfg;
  broken.rho_floor = 0.5;  // no admissible quantum density iterate exists
  broken.max_outer = 40;

  SweepReport rep =
      run_epsilon_sweep(s.C, s.bc, p, acfg, cost, broken, 1, p.eps2);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.rows[0].ok);  // the classical baseline has no density iterate
  CHECK_FALSE(rep.rows[1].ok);
  CHECK_FALSE(rep.rows[2].ok);
  CHECK(!rep.rows[1].error.empty());
  CHECK(rep.rows[0].cost > 0.0);
}

TEST_CASE("coarse ladder marches toward the classical optimum") {
  Setup s = mesfet_setup(16);
  ModelParams p;
  CostConfig cost = doubled_current_cost(s, p);
  ArmijoConfig acfg;
  acfg.max_iters = 30;  // run every rung to its stationary point

  SweepReport rep =
      run_epsilon_sweep(s.C, s.bc, p, acfg, cost, s.cfg, 3, p.eps2);
  REQUIRE(rep.rows.size() == 5);
  for (const SweepRow& r : rep.rows) {
    CAPTURE(r.n);
    CHECK(r.ok);
  }
  for (size_t k = 1; k < rep.rows.size(); ++k) {
    CHECK(std::isfinite(rep.rows[k].dist_n));
    CHECK(rep.rows[k].dist_n >= 0.0);
  }
  const SweepRow& first = rep.rows[1];
  const SweepRow& last = rep.rows.back();
  CHECK(last.dist_C < first.dist_C);
  CHECK(last.dist_n < first.dist_n);
  CHECK(last.dist_S < first.dist_S);
  CHECK(last.cost_gap < first.cost_gap);
  // non-increasing below n = 1, up to a tolerance-level floor
  for (size_t k = 3; k < rep.rows.size(); ++k) {
    const SweepRow& a = rep.rows[k - 1];
    const SweepRow& b = rep.rows[k];
    CHECK(b.dist_C <= a.dist_C + 1e-9);
    CHECK(b.dist_n <= a.dist_n + 1e-9);
    CHECK(b.dist_S <= a.dist_S + 1e-9);
    CHECK(b.cost_gap <= a.cost_gap + 1e-9);
  }

  SECTION("emitted table matches the report and reruns byte for byte") {
    std::string dir_a = scratch_dir() + "/ladder_a";
    std::string dir_b = scratch_dir() + "/ladder_b";
    emit_results(rep, dir_a);
    emit_results(rep, dir_b);
    std::string text = slurp(dir_a + "/sweep.csv");
    CHECK(text == slurp(dir_b + "/sweep.csv"));
    REQUIRE(!text.empty());
    size_t lines = 0;
    for (char c : text) lines += (c == '\n');
    CHECK(lines == rep.rows.size() + 1);
    CHECK(text.rfind("n,eps2,cost,", 0) == 0);
    CHECK(text.find("\n-1,0,") != std::string::npos);
  }
}

TEST_CASE("config-driven ladder honors the degenerate contract") {
  std::string cfg_path = scratch_dir() + "/degenerate.cfg";
  {
    std::ofstream out(cfg_path);
    out << "[sweep]\ngrid = 10\nn_max = 0\neps2_base = 0\n"
           "[optimizer]\nmax_iters = 2\n";
  }
  SweepReport rep = run_epsilon_sweep(parse_config(cfg_path));
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[1].dist_C == 0.0);
  CHECK(rep.rows[1].dist_n == 0.0);
  CHECK(rep.rows[1].dist_S == 0.0);
  CHECK(rep.rows[1].cost_gap == 0.0);
}
