#include "helpers.hpp"
#include "qdd/boundary.hpp"
#include "qdd/doping.hpp"
#include "qdd/operators.hpp"

using namespace qdd;
using qdd::testing::equilibrium_geometry;

TEST_CASE("raw doping is a plateau over the implanted blocks") {
  auto m = build_mesh(default_mesfet(), 41, 41);
  ScalarField raw = raw_doping(m);
  auto at = [&](double x, double y) {
    return raw.v[m->idx(static_cast<int>(std::lround(x / m->hx)),
                        static_cast<int>(std::lround(y / m->hy)))];
  };
  CHECK(at(0.125, 0.9) == 1.0);
  CHECK(at(0.875, 0.9) == 1.0);
  CHECK(at(0.5, 0.9) == 0.01);
  CHECK(at(0.5, 0.2) == 0.01);
  CHECK(at(0.25, 0.8) == 1.0);  // block boundary belongs to the block
}

TEST_CASE("mollified doping keeps bounds, dose, and plateaus") {
  auto m = build_mesh(default_mesfet(), 81, 81);
  ScalarField raw = raw_doping(m);
  ScalarField C = reference_doping(m);

  CHECK(min_value(C) >= 0.01 - 1e-12);
  CHECK(max_value(C) <= 1.0 + 1e-12);

  ScalarField one(m, 1.0);
  CHECK(inner_vol(C, one) == Catch::Approx(inner_vol(raw, one)).epsilon(1e-10));

  auto at = [&](double x, double y) {
    return C.v[m->idx(static_cast<int>(std::lround(x / m->hx)),
                      static_cast<int>(std::lround(y / m->hy)))];
  };
  CHECK(at(0.125, 0.95) > 0.95);   // deep inside an implant
  CHECK(at(0.5, 0.1) < 0.012);     // deep inside the channel
  double mid = at(0.25, 0.9);      // on the implant edge: between the levels
  CHECK(mid > 0.1);
  CHECK(mid < 0.95);
}

TEST_CASE("smoothing length zero returns the raw profile") {
  auto g = default_mesfet();
  g.smoothing_cells = 0.0;
  auto m = build_mesh(g, 21, 21);
  CHECK(rel_l2(reference_doping(m), raw_doping(m)) == 0.0);
}

TEST_CASE("uniform device gives unit doping and zero boundary data") {
  auto m = build_mesh(equilibrium_geometry(), 41, 41);
  ScalarField C = reference_doping(m);
  ScalarField d = C;
  for (double& x : d.v) x -= 1.0;
  CHECK(norm_linf(d) < 1e-11);

  BoundaryData bc = make_boundary_data(C);
  for (int n : dirichlet_nodes(*m)) {
    CHECK(bc.rho.v[n] == Catch::Approx(1.0).margin(1e-11));
    CHECK(bc.V.v[n] == Catch::Approx(0.0).margin(1e-10));
    CHECK(bc.S.v[n] == Catch::Approx(0.0).margin(1e-10));
  }
}

TEST_CASE("boundary data on the default device") {
  auto m = build_mesh(default_mesfet(), 81, 81);
  ScalarField C = reference_doping(m);
  BoundaryData bc = make_boundary_data(C);

  // off-contact nodes carry no data
  for (int n : boundary_nodes(*m, "neumann")) {
    CHECK(bc.rho.v[n] == 0.0);
    CHECK(bc.V.v[n] == 0.0);
    CHECK(bc.S.v[n] == 0.0);
  }

  for (const auto& c : m->geom.contacts) {
    for (int n : boundary_nodes(*m, c.name)) {
      CHECK(bc.rho.v[n] ==
            Catch::Approx(c.alpha * std::sqrt(C.v[n])).epsilon(1e-14));
      // built-in parts of V and S cancel, the applied voltage adds twice
      CHECK(bc.V.v[n] + bc.S.v[n] == Catch::Approx(2.0 * c.U).margin(1e-12));
      CHECK(bc.V.v[n] - bc.S.v[n] ==
            Catch::Approx(-2.0 * std::log(bc.rho.v[n] * bc.rho.v[n]))
                .margin(1e-12));
    }
  }

  // the depleted gate sits two decades under the ohmic contacts
  int ng = boundary_nodes(*m, "gate").front();
  int ns = boundary_nodes(*m, "source").front();
  CHECK(bc.rho.v[ng] < 0.15 * bc.rho.v[ns]);
  CHECK(bc.V.v[ng] > 4.0);  // depletion raises the built-in barrier

  // applied voltages are ordered drain > gate > source
  int nd = boundary_nodes(*m, "drain").front();
  double Us = bc.V.v[ns] + bc.S.v[ns], Ug = bc.V.v[ng] + bc.S.v[ng],
         Ud = bc.V.v[nd] + bc.S.v[nd];
  CHECK(Us == Catch::Approx(2 * 0.00375).margin(1e-14));
  CHECK(Ug == Catch::Approx(2 * 0.0075).margin(1e-14));
  CHECK(Ud == Catch::Approx(2 * 0.015).margin(1e-14));
}

TEST_CASE("nonpositive doping at a contact is rejected") {
  auto m = build_mesh(default_mesfet(), 21, 21);
  ScalarField C(m, 1.0);
  C.v[boundary_nodes(*m, "gate").front()] = 0.0;
  CHECK_THROWS_AS(make_boundary_data(C), positivity_error);
}
