#include "helpers.hpp"

using namespace qdd;
using qdd::testing::channel_geometry;
using qdd::testing::strip_geometry;

TEST_CASE("3x3 strip mesh partitions nodes") {
  auto m = build_mesh(strip_geometry(), 3, 3);
  REQUIRE(m->n_nodes() == 9);
  int interior = 0, neumann = 0, dirichlet = 0;
  for (int n = 0; n < 9; ++n) {
    switch (m->kind[n]) {
      case NodeKind::interior: ++interior; break;
      case NodeKind::neumann: ++neumann; break;
      case NodeKind::dirichlet: ++dirichlet; break;
    }
  }
  CHECK(interior == 1);
  CHECK(dirichlet == 3);
  CHECK(neumann == 5);
  for (int j = 0; j < 3; ++j) CHECK(m->is_dirichlet(m->idx(0, j)));
}

TEST_CASE("node coordinates and volumes") {
  auto m = build_mesh(strip_geometry(), 5, 4);
  CHECK(m->hx == Catch::Approx(0.25));
  CHECK(m->hy == Catch::Approx(1.0 / 3.0));
  CHECK(m->x(2) == Catch::Approx(0.5));
  CHECK(m->y(3) == Catch::Approx(1.0));
  CHECK(m->idx(3, 2) == 2 * 5 + 3);
  double area = 0.0;
  for (double v : m->vol) area += v;
  CHECK(area == Catch::Approx(1.0).epsilon(1e-14));
  CHECK(m->vol[m->idx(0, 0)] == Catch::Approx(0.25 * m->hx * m->hy));
  CHECK(m->vol[m->idx(2, 0)] == Catch::Approx(0.5 * m->hx * m->hy));
  CHECK(m->vol[m->idx(2, 2)] == Catch::Approx(m->hx * m->hy));
}

TEST_CASE("default device claims three separated contact runs") {
  auto g = default_mesfet();
  auto m = build_mesh(g, 80, 80);

  auto run = [&](const std::string& name) {
    auto nodes = boundary_nodes(*m, name);
    REQUIRE(!nodes.empty());
    // all on the top row, consecutive in i
    int jtop = m->ny - 1;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      CHECK(nodes[k] / m->nx == jtop);
      if (k > 0) CHECK(nodes[k] == nodes[k - 1] + 1);
    }
    return nodes;
  };

  auto src = run("source");
  auto gate = run("gate");
  auto drn = run("drain");
  CHECK(src.size() == 12);
  CHECK(gate.size() == 12);
  CHECK(drn.size() == 12);

  // claimed spans contain the requested intervals' interior nodes only
  CHECK(m->x(src.back() % m->nx) <= 0.15 + 1e-12);
  CHECK(m->x(gate.front() % m->nx) >= 0.425 - 1e-12);
  CHECK(m->x(gate.back() % m->nx) <= 0.575 + 1e-12);
  CHECK(m->x(drn.front() % m->nx) >= 0.85 - 1e-12);

  // at least one free node between neighboring runs
  CHECK(gate.front() - src.back() >= 2);
  CHECK(drn.front() - gate.back() >= 2);

  CHECK(dirichlet_nodes(*m).size() == 36);
  CHECK(boundary_nodes(*m, "neumann").size() == 316 - 36);
}

TEST_CASE("every contact keeps at least two nodes on a coarse grid") {
  auto m = build_mesh(default_mesfet(), 10, 10);
  CHECK(boundary_nodes(*m, "source").size() >= 2);
  CHECK(boundary_nodes(*m, "gate").size() >= 2);
  CHECK(boundary_nodes(*m, "drain").size() >= 2);
}

TEST_CASE("contact labels round-trip through contact_index") {
  auto m = build_mesh(default_mesfet(), 20, 20);
  for (const std::string name : {"source", "gate", "drain"}) {
    int ci = m->contact_index(name);
    REQUIRE(ci >= 0);
    for (int n : boundary_nodes(*m, name)) CHECK(m->contact[n] == ci);
  }
}

TEST_CASE("refining the grid maps contact nodes onto themselves") {
  auto g = default_mesfet();
  auto coarse = build_mesh(g, 41, 41);
  auto fine = build_mesh(g, 81, 81);
  for (int j = 0; j < coarse->ny; ++j)
    for (int i = 0; i < coarse->nx; ++i) {
      int nc = coarse->idx(i, j);
      int nf = fine->idx(2 * i, 2 * j);
      CHECK(coarse->kind[nc] == fine->kind[nf]);
      CHECK(coarse->contact[nc] == fine->contact[nf]);
    }
}

TEST_CASE("touching contacts are rejected") {
  DeviceGeometry g;
  g.contacts = {{"source", Edge::top, 0.0, 0.5, 0.0, 1.0},
                {"drain", Edge::top, 0.5, 1.0, 0.0, 1.0}};
  CHECK_THROWS_AS(build_mesh(g, 5, 5), geometry_error);
}

TEST_CASE("boundary node selectors") {
  DeviceGeometry g;
  g.contacts = {{"source", Edge::top, 0.0, 0.2, 0.0, 1.0},
                {"drain", Edge::top, 0.8, 1.0, 0.0, 1.0}};
  auto m = build_mesh(g, 11, 11);
  CHECK(boundary_nodes(*m, "gate").empty());
  CHECK_THROWS_AS(boundary_nodes(*m, "bogus"), geometry_error);
  std::size_t total = boundary_nodes(*m, "neumann").size() +
                      dirichlet_nodes(*m).size();
  CHECK(total == 4 * 11 - 4);
}

TEST_CASE("degenerate grids are rejected") {
  CHECK_THROWS_AS(build_mesh(strip_geometry(), 2, 5), geometry_error);
  CHECK_THROWS_AS(build_mesh(strip_geometry(), 5, 2), geometry_error);
}

TEST_CASE("geometry validation catches bad devices") {
  DeviceGeometry g;
  CHECK_THROWS_AS(validate(g), geometry_error);  // no contacts

  g = default_mesfet();
  g.contacts[1].name = "source";
  CHECK_THROWS_AS(validate(g), geometry_error);  // duplicate name

  g = default_mesfet();
  g.contacts[0].lo = -0.1;
  CHECK_THROWS_AS(validate(g), geometry_error);  // span off the edge

  g = default_mesfet();
  g.nplus[0] = {0.5, 1.5, 0.8, 1.0};
  CHECK_THROWS_AS(validate(g), geometry_error);  // region off the device

  g = default_mesfet();
  g.channel_doping = 2.0;
  CHECK_THROWS_AS(validate(g), geometry_error);  // channel above plateau
}
