#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "translator/closed_forms.hpp"
#include "translator/grid.hpp"
#include "translator/operators.hpp"

using namespace translator;

namespace {

std::shared_ptr<const DomainMask<>> rect_mask(double L, double b, double h) {
  Domain<> dom = Rectangle<>{L, b};
  return std::make_shared<const DomainMask<>>(build_domain(dom, fit_grid(dom, h)));
}

std::shared_ptr<const DomainMask<>> disk_mask(double a1, double a2, double R, double h) {
  Ellipsoid<> e;
  e.n = 2;
  e.coeff << a1, a2, 0.0;
  e.radius = R;
  Domain<> dom = e;
  return std::make_shared<const DomainMask<>>(build_domain(dom, fit_grid(dom, h)));
}

}  // namespace

TEST_CASE("node-aligned rectangle mask: edges boundary-adjacent, fractions 1") {
  auto g = GridSpec<>::box(2, Vec3<>{-1, -1, 0}, Vec3<>{1, 1, 0}, MultiIndex{9, 9, 1});
  Domain<> dom = Rectangle<>{1.0, 1.0};
  auto m = build_domain(dom, g);
  int interior = 0, boundary = 0;
  for (NodeIndex id = 0; id < m.total(); ++id) {
    const MultiIndex mi = g.unflatten(id);
    const bool edge = mi[0] == 0 || mi[0] == 8 || mi[1] == 0 || mi[1] == 8;
    if (edge) {
      REQUIRE(m.cls(id) == NodeClass::boundary);
      CHECK(m.on_boundary[size_t(id)] == 1);
      ++boundary;
      for (int d = 0; d < 2; ++d) CHECK(m.fraction[size_t(id)][d] == doctest::Approx(1.0));
    } else {
      CHECK(m.cls(id) == NodeClass::interior);
      ++interior;
    }
  }
  CHECK(interior == 49);
  CHECK(boundary == 32);  // the full edge ring, corners included
}

TEST_CASE("disk mask area converges to 2*pi") {
  const double h = 1.0 / 32;
  auto m = disk_mask(0.5, 0.5, 1.0, h);
  const double area = double(m->interior.size()) * h * h;
  CHECK(area == doctest::Approx(2 * kPi).epsilon(0.05));
}

TEST_CASE("ellipse mask semi-axes") {
  const double h = 1.0 / 32;
  auto m = disk_mask(0.75, 0.25, 1.0, h);
  const double ax = 2.0 / std::sqrt(3.0), ay = 2.0;
  double max_x = 0, max_y = 0;
  for (NodeIndex id : m->interior) {
    const auto x = m->grid.position(id);
    max_x = std::max(max_x, std::abs(x[0]));
    max_y = std::max(max_y, std::abs(x[1]));
  }
  CHECK(std::abs(max_x - ax) <= h);
  CHECK(std::abs(max_y - ay) <= h);
}

TEST_CASE("mask invariants: interior neighbors never exterior, fractions in (0,1]") {
  auto m = disk_mask(0.75, 0.25, 1.0, 1.0 / 16);
  for (NodeIndex id : m->interior) {
    const MultiIndex mi = m->grid.unflatten(id);
    for (int d = 0; d < 2; ++d)
      for (int s = -1; s <= 1; s += 2) {
        const NodeIndex q = m->neighbor(mi, d, s);
        REQUIRE(q >= 0);
        CHECK(m->cls(q) != NodeClass::exterior);
        if (m->cls(q) == NodeClass::boundary) {
          CHECK(m->fraction[size_t(q)][d] > 0.0);
          CHECK(m->fraction[size_t(q)][d] <= 1.0);
        }
      }
  }
}

TEST_CASE("descriptor agrees with node classes") {
  auto m = disk_mask(0.5, 0.5, 1.0, 1.0 / 16);
  for (NodeIndex id = 0; id < m->total(); ++id) {
    const bool in = domain_inside(m->domain, m->grid.position(id));
    CHECK(in == (m->cls(id) == NodeClass::interior));
  }
}

TEST_CASE("configuration errors") {
  Domain<> dom = Rectangle<>{4.0, 1.0};
  auto small = GridSpec<>::box(2, Vec3<>{-2, -1, 0}, Vec3<>{2, 1, 0}, MultiIndex{9, 9, 1});
  CHECK_THROWS_AS(build_domain(dom, small), ConfigError);

  Ellipsoid<> bad;
  bad.n = 2;
  bad.coeff << 0.5, 0.0, 0.0;
  bad.radius = 1.0;
  CHECK_THROWS_AS(validate_domain(Domain<>(bad)), ConfigError);
}

TEST_CASE("mask interior volume is stable under refinement") {
  double prev_gap = -1;
  const double exact = 2 * kPi;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    auto m = disk_mask(0.5, 0.5, 1.0, h);
    const double area = double(m->interior.size()) * h * h;
    const double gap = std::abs(area - exact);
    CHECK(gap <= 6.0 * h);  // O(h) boundary ring
    if (prev_gap > 0) CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("gradient: zero and linear fields exact") {
  auto m = rect_mask(1.0, 1.0, 0.125);
  auto zero = sample_field<double>(m, [](const Vec3<>&) { return 0.0; });
  auto gz = gradient(zero);
  CHECK(gz.abs().maxCoeff() == 0.0);

  auto lin = sample_field<double>(m, [](const Vec3<>& x) { return x[0]; });
  auto gl = gradient(lin);
  for (NodeIndex id : m->interior) {
    CHECK(gl(Eigen::Index(id), 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gl(Eigen::Index(id), 1) == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("hessian: quadratic exactness") {
  auto m = rect_mask(1.0, 1.0, 0.125);
  auto quad = sample_field<double>(m, [](const Vec3<>& x) { return x[0] * x[0] - x[1] * x[1]; });
  auto H = hessian(quad);
  auto cross = sample_field<double>(m, [](const Vec3<>& x) { return x[0] * x[1]; });
  auto Hc = hessian(cross);
  for (NodeIndex id : m->interior) {
    if (in_collar(*m, id, 1)) continue;  // regular nodes only
    CHECK(H(Eigen::Index(id), 0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(H(Eigen::Index(id), 1) == doctest::Approx(-2.0).epsilon(1e-10));
    CHECK(Hc(Eigen::Index(id), 3) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("linear and quadratic exactness at random regular nodes (ellipse mask)") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  auto m = disk_mask(0.5, 0.5, 1.0, 1.0 / 16);
  for (int trial = 0; trial < 5; ++trial) {
    const double c0 = coef(rng), cx = coef(rng), cy = coef(rng);
    const double axx = coef(rng), ayy = coef(rng), axy = coef(rng);
    auto f = sample_field<double>(m, [&](const Vec3<>& x) {
      return c0 + cx * x[0] + cy * x[1] + axx * x[0] * x[0] / 2 + ayy * x[1] * x[1] / 2 +
             axy * x[0] * x[1];
    });
    auto g = gradient(f);
    auto H = hessian(f);
    for (NodeIndex id : m->interior) {
      if (in_collar(*m, id, 1)) continue;
      const auto x = m->grid.position(id);
      CHECK(g(Eigen::Index(id), 0) == doctest::Approx(cx + axx * x[0] + axy * x[1]).epsilon(1e-9));
      CHECK(g(Eigen::Index(id), 1) == doctest::Approx(cy + ayy * x[1] + axy * x[0]).epsilon(1e-9));
      CHECK(H(Eigen::Index(id), 0) == doctest::Approx(axx).epsilon(1e-8));
      CHECK(H(Eigen::Index(id), 1) == doctest::Approx(ayy).epsilon(1e-8));
      CHECK(H(Eigen::Index(id), 3) == doctest::Approx(axy).epsilon(1e-8));
    }
  }
}

namespace {

// Max error of a derivative of the grim reaper sample against its analytic
// value, interior nodes only.
double reaper_dy_error(double h) {
  auto m = rect_mask(1.0, 1.0, h);
  auto surf = ClosedFormSurface<>::grim_reaper();
  auto f = sample_surface(surf, m);
  auto g = gradient(f);
  double worst = 0;
  for (NodeIndex id : m->interior) {
    const auto x = m->grid.position(id);
    worst = std::max(worst, std::abs(g(Eigen::Index(id), 1) - (-std::tan(x[1]))));
  }
  return worst;
}

double reaper_dyy_error(double h) {
  auto m = rect_mask(1.0, 1.0, h);
  auto f = sample_surface(ClosedFormSurface<>::grim_reaper(), m);
  auto H = hessian(f);
  double worst = 0;
  for (NodeIndex id : m->interior) {
    const auto x = m->grid.position(id);
    const double sec = 1.0 / std::cos(x[1]);
    worst = std::max(worst, std::abs(H(Eigen::Index(id), 1) - (-sec * sec)));
  }
  return worst;
}

}  // namespace

TEST_CASE("gradient and hessian converge at second order (Richardson)") {
  const double r1 = reaper_dy_error(1.0 / 32) / reaper_dy_error(1.0 / 64);
  CHECK(r1 >= 3.4);
  CHECK(r1 <= 4.6);
  const double r2 = reaper_dyy_error(1.0 / 32) / reaper_dyy_error(1.0 / 64);
  CHECK(r2 >= 3.4);
  CHECK(r2 <= 4.6);
}

TEST_CASE("octant reduction round-trips symmetric fields") {
  auto m = rect_mask(1.0, 1.0, 0.125);
  auto f = sample_field<double>(
      m, [](const Vec3<>& x) { return std::cos(x[0]) * (1.0 - x[1] * x[1]); });
  SymmetryFlags flags = SymmetryFlags::all_even(2);
  auto reduced = reduce_to_octant(f, flags);
  auto back = reflect_full(reduced);
  REQUIRE(back.total() == f.total());
  CHECK((back.values - f.values).abs().maxCoeff() <= 1e-15);
}

TEST_CASE("octant reduction of an odd field reflects to |x|") {
  auto m = rect_mask(1.0, 1.0, 0.25);
  auto f = sample_field<double>(m, [](const Vec3<>& x) { return x[0]; });
  SymmetryFlags fx;
  fx.even[0] = true;
  auto back = reflect_full(reduce_to_octant(f, fx));
  for (NodeIndex id = 0; id < back.total(); ++id) {
    if (back.mask->is_exterior(id)) continue;
    const auto x = back.mask->grid.position(id);
    CHECK(back[id] == doctest::Approx(std::abs(x[0])).epsilon(1e-14));
  }
}

TEST_CASE("core types work in single precision") {
  Domain<float> dom = Rectangle<float>{1.0f, 1.0f};
  auto m = std::make_shared<const DomainMask<float>>(
      build_domain(dom, fit_grid<float>(dom, 0.125f)));
  auto f = sample_field<float>(m, [](const Vec3<float>& x) { return x[0] * x[1]; });
  auto H = hessian(f);
  for (NodeIndex id : m->interior) {
    if (in_collar(*m, id, 1)) continue;
    CHECK(H(Eigen::Index(id), 3) == doctest::Approx(1.0f).epsilon(1e-4));
  }
  auto arc = ClosedFormSurface<float>::arc(1.0f);
  CHECK(eval(arc, Vec3<float>{0, 0, 0}).value ==
        doctest::Approx(0.615626f).epsilon(1e-5));
}

TEST_CASE("even flag on an asymmetric extent is rejected") {
  auto g = GridSpec<>::box(2, Vec3<>{-1, -1, 0}, Vec3<>{2, 1, 0}, MultiIndex{7, 9, 1});
  Domain<> dom = Rectangle<>{1.0, 1.0};
  auto mask = std::make_shared<const DomainMask<>>(build_domain(dom, g));
  auto f = sample_field<double>(mask, [](const Vec3<>&) { return 1.0; });
  SymmetryFlags fx;
  fx.even[0] = true;
  CHECK_THROWS_AS(reduce_to_octant(f, fx), ConfigError);
}
