#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "translator/dirichlet.hpp"

#include "support.hpp"

using namespace translator;

namespace {

SuiteOptions<> fast_options() {
  SuiteOptions<> opt;
  opt.lambda_steps = 4;
  return opt;
}

}  // namespace

TEST_CASE("rectangle height approaches the arc limit monotonically in L") {
  const double target = -std::log(std::cos(1.0));
  double prev = 0;
  for (double L : {2.0, 4.0, 8.0}) {
    auto [u, rep] = solve_rectangle(L, 1.0, 1.0 / 32, fast_options());
    CHECK(rep.max_value > prev);
    CHECK(rep.max_value < target);
    prev = rep.max_value;
  }
  CHECK(std::abs(prev - target) <= 0.02);
}

TEST_CASE("audit_rectangle passes on a genuine solve") {
  auto opt = fast_options();
  auto [u, rep] = solve_rectangle(4.0, 1.0, 1.0 / 32, opt);
  auto audit = audit_rectangle(u, opt);
  REQUIRE(audit.checks.size() == 6);
  for (const auto& c : audit.checks) {
    INFO(c.id, " measured=", c.measured, " tol=", c.tolerance);
    CHECK(c.pass);
  }
  // every id appears exactly once
  for (const char* id : {"SIGN_X", "SIGN_Y", "EDGE_MONOTONE", "W_ARGMAX", "W_STABLE",
                         "TRACE_APEX"}) {
    int count = 0;
    for (const auto& c : audit.checks)
      if (c.id == id) ++count;
    CHECK(count == 1);
  }
}

TEST_CASE("audit discriminates a non-translator with the right symmetries") {
  const double L = 2.0, b = 1.0;
  auto m = testsupport::rect_mask(L, b, 1.0 / 16);
  auto fake = sample_field<double>(m, [&](const Vec3<>& x) {
    return std::cos(kPi * x[0] / (2 * L)) * std::cos(kPi * x[1] / (2 * b));
  });
  const auto g = gradient(fake);
  auto sx = detail::sign_check("SIGN_X", fake, g, 0);
  auto sy = detail::sign_check("SIGN_Y", fake, g, 1);
  CHECK(sx.pass);
  CHECK(sy.pass);
  const auto spec = apex_spectrum(fake);
  CHECK(std::abs(spec.trace() + 1.0) > 0.05);  // TRACE_APEX would fail
}

TEST_CASE("w on the grim reaper restricted to |y|<=1 has no interior local max") {
  // (pi/2 - y) sec y is strictly decreasing on (-1, 1): the discrete argmax
  // of w must sit on the lower edge of the scanned band, never strictly
  // inside.
  auto m = testsupport::rect_mask(1.0, 1.0, 1.0 / 64);
  auto f = sample_surface(ClosedFormSurface<>::grim_reaper(), m);
  AffineWeight<> eta;
  eta.constant = kPi / 2;
  eta.linear << 0.0, -1.0, 0.0;
  auto audit = eta_v_max_audit(f, eta);
  CHECK(audit.pass);
}

TEST_CASE("ellipsoid audit: disk") {
  Eigen::VectorXd a(2);
  a << 0.5, 0.5;
  auto opt = fast_options();
  auto [u, rep] = solve_ellipsoid<double>(a, 1.0, 1.0 / 32, opt);
  auto audit = audit_ellipsoid(u);
  REQUIRE(audit.checks.size() == 4);
  for (const auto& c : audit.checks) {
    INFO(c.id, " measured=", c.measured, " tol=", c.tolerance);
    CHECK(c.pass);
  }
  const auto spec = apex_spectrum(u);
  CHECK(std::abs(spec.axis_curvatures[0] - 0.5) <= 0.02);
  CHECK(std::abs(spec.axis_curvatures[1] - 0.5) <= 0.02);
}

TEST_CASE("ellipsoid audit: eccentric") {
  Eigen::VectorXd a(2);
  a << 0.75, 0.25;
  auto opt = fast_options();
  auto [u, rep] = solve_ellipsoid<double>(a, 1.0, 1.0 / 32, opt);
  auto audit = audit_ellipsoid(u, 0.8);
  for (const auto& c : audit.checks) {
    INFO(c.id, " measured=", c.measured, " tol=", c.tolerance, " note=", c.note);
    CHECK(c.pass);
  }
  // low point lands on the x1 axis
  const auto& low = audit.check("LOW_POINT");
  CHECK(std::abs(low.worst_location[0]) >= 0.8 - 1.0 / 16);
  CHECK(std::abs(low.worst_location[1]) <= 2.0 / 32 + 1e-12);
  // strict curvature order
  const auto& order = audit.check("ORDER");
  CHECK(order.measured > 0.0);
}

TEST_CASE("slab audit at n=1 reduces to the rectangle case") {
  // E((1), R) x [-b, b] is the rectangle [-R, R] x [-b, b]; the slab grid
  // pads the curved axis by one cell, so compare at shared positions.
  Eigen::VectorXd a(1);
  a << 1.0;
  auto opt = fast_options();
  auto [us, reps] = solve_slab<double>(a, 2.0, 1.0, 1.0 / 16, opt);
  auto [ur, repr] = solve_rectangle(2.0, 1.0, 1.0 / 16, opt);
  const auto& gs = us.mask->grid;
  const auto& gr = ur.mask->grid;
  const int shift = (gs.nodes[0] - gr.nodes[0]) / 2;
  double worst = 0;
  for (NodeIndex id : ur.mask->interior) {
    MultiIndex mi = gr.unflatten(id);
    mi[0] += shift;
    worst = std::max(worst, std::abs(ur[id] - us[gs.flatten(mi)]));
  }
  CHECK(worst <= 1e-8);
  auto audit = audit_slab(us, opt);
  REQUIRE(audit.checks.size() == 4);
  for (const auto& c : audit.checks) {
    INFO(c.id, " measured=", c.measured, " tol=", c.tolerance);
    CHECK(c.pass);
  }
}

TEST_CASE("slab audit in three dimensions") {
  Eigen::VectorXd a(2);
  a << 0.6, 0.4;
  auto opt = fast_options();
  auto [u, rep] = solve_slab<double>(a, 1.5, 1.0, 1.0 / 12, opt);
  CHECK(rep.converged);
  CHECK(u.min_interior() > 0.0);
  auto audit = audit_slab(u, opt);
  for (const auto& c : audit.checks) {
    INFO(c.id, " measured=", c.measured, " tol=", c.tolerance, " note=", c.note);
    CHECK(c.pass);
  }
  const auto spec = apex_spectrum(u);
  CHECK(std::abs(spec.trace() + 1.0) <= 0.05);
}

TEST_CASE("slab with equal lateral coefficients has vanishing rotational derivative") {
  Eigen::VectorXd a(2);
  a << 0.5, 0.5;
  auto opt = fast_options();
  auto [u, rep] = solve_slab<double>(a, 1.2, 1.0, 1.0 / 12, opt);
  auto audit = audit_slab(u, opt);
  CHECK(audit.check("ROT_SIGN").pass);

  // The discrete system is exactly swap-symmetric in the lateral axes, so
  // the computed field is too (up to solver roundoff).
  const auto& g = u.mask->grid;
  REQUIRE(g.nodes[0] == g.nodes[1]);
  double worst = 0;
  for (NodeIndex id : u.mask->interior) {
    const MultiIndex mi = g.unflatten(id);
    worst = std::max(worst,
                     std::abs(u[id] - u[g.flatten(MultiIndex{mi[1], mi[0], mi[2]})]));
  }
  CHECK(worst <= 1e-7);
}

TEST_CASE("audit verdicts are stable under grid refinement") {
  auto opt = fast_options();
  for (double h : {1.0 / 16, 1.0 / 32}) {
    auto [u, rep] = solve_rectangle(4.0, 1.0, h, opt);
    auto audit = audit_rectangle(u, opt);
    for (const auto& c : audit.checks) {
      INFO("h=", h, " ", c.id);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("height dichotomy across the critical width") {
  auto opt = fast_options();
  // narrow strip: heights settle
  auto [u1, r1] = solve_rectangle(4.0, 1.0, 1.0 / 16, opt);
  auto [u2, r2] = solve_rectangle(8.0, 1.0, 1.0 / 16, opt);
  CHECK(r2.max_value > r1.max_value);
  CHECK(r2.max_value - r1.max_value <= 0.02);
  // wide strip: heights keep climbing
  auto [w1, s1] = solve_rectangle(4.0, 2.0, 1.0 / 16, opt);
  auto [w2, s2] = solve_rectangle(8.0, 2.0, 1.0 / 16, opt);
  CHECK(s2.max_value - s1.max_value >= 0.15);
  CHECK(s2.max_value > 1.2 * s1.max_value);
}
