#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "translator/geometry.hpp"
#include "translator/pde.hpp"

namespace translator {

// One named audit check: pass/fail with the measured quantity, the tolerance
// it was held to, and where the worst violation (or extremum) sits.
template <typename Scalar = double>
struct CheckResult {
  std::string id;
  bool pass = false;
  Scalar measured = 0;
  Scalar tolerance = 0;
  Vec3<Scalar> worst_location = Vec3<Scalar>::Zero();
  std::string note;
};

template <typename Scalar = double>
struct AuditReport {
  std::vector<CheckResult<Scalar>> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const CheckResult<Scalar>& check(const std::string& id) const {
    for (const auto& c : checks)
      if (c.id == id) return c;
    throw UsageError("no audit check named " + id);
  }
};

template <typename Scalar = double>
struct SuiteOptions {
  int lambda_steps = 16;
  NewtonSettings<Scalar> newton;
};

// ---------------------------------------------------------------------------
// Solves on the three domain classes.  All are even in every coordinate, so
// the octant reduction is always applied.

template <typename Scalar>
std::pair<ScalarField<Scalar>, SolveReport<Scalar>> solve_rectangle(
    Scalar L, Scalar b, Scalar h, const SuiteOptions<Scalar>& opt = {}) {
  Domain<Scalar> dom = Rectangle<Scalar>{L, b};
  auto mask = std::make_shared<const DomainMask<Scalar>>(build_domain(dom, fit_grid(dom, h)));
  return solve_dirichlet(mask, ContinuationSchedule<Scalar>::uniform(opt.lambda_steps),
                         opt.newton, SymmetryFlags::all_even(2));
}

template <typename Scalar>
std::pair<ScalarField<Scalar>, SolveReport<Scalar>> solve_ellipsoid(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& a, Scalar R, Scalar h,
    const SuiteOptions<Scalar>& opt = {}) {
  Ellipsoid<Scalar> e;
  e.n = int(a.size());
  Scalar sum = 0;
  for (int d = 0; d < e.n; ++d) {
    e.coeff[d] = a[d];
    sum += a[d];
  }
  if (std::abs(double(sum - 1)) > 1e-12)
    throw ConfigError("ellipsoid coefficients must sum to 1");
  e.radius = R;
  Domain<Scalar> dom = e;
  auto mask = std::make_shared<const DomainMask<Scalar>>(build_domain(dom, fit_grid(dom, h)));
  return solve_dirichlet(mask, ContinuationSchedule<Scalar>::uniform(opt.lambda_steps),
                         opt.newton, SymmetryFlags::all_even(e.n));
}

template <typename Scalar>
std::pair<ScalarField<Scalar>, SolveReport<Scalar>> solve_slab(
    const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& a, Scalar R, Scalar b,
    Scalar h, const SuiteOptions<Scalar>& opt = {}) {
  EllipsoidSlab<Scalar> s;
  s.cross_section.n = int(a.size());
  Scalar sum = 0;
  for (int d = 0; d < s.cross_section.n; ++d) {
    s.cross_section.coeff[d] = a[d];
    sum += a[d];
  }
  if (std::abs(double(sum - 1)) > 1e-12)
    throw ConfigError("ellipsoid coefficients must sum to 1");
  s.cross_section.radius = R;
  s.half_width = b;
  Domain<Scalar> dom = s;
  auto mask = std::make_shared<const DomainMask<Scalar>>(build_domain(dom, fit_grid(dom, h)));
  return solve_dirichlet(mask, ContinuationSchedule<Scalar>::uniform(opt.lambda_steps),
                         opt.newton, SymmetryFlags::all_even(s.cross_section.n + 1));
}

// ---------------------------------------------------------------------------
// Audit helpers.

namespace detail {

template <typename Scalar>
Scalar grad_scale(const DomainMask<Scalar>& m,
                  const Eigen::Array<Scalar, Eigen::Dynamic, 3>& g) {
  Scalar s = 0;
  for (NodeIndex id : m.interior) s = std::max(s, g.row(Eigen::Index(id)).abs().maxCoeff());
  return s;
}

// Coordinate-sign check: derivative component `axis` must oppose the sign of
// x[axis] at interior nodes with |x[axis]| > h, a one-cell collar excluded.
template <typename Scalar>
CheckResult<Scalar> sign_check(const std::string& id, const ScalarField<Scalar>& f,
                               const Eigen::Array<Scalar, Eigen::Dynamic, 3>& g, int axis) {
  const auto& m = *f.mask;
  const Scalar h = m.grid.spacing[axis];
  const Scalar slack = Scalar(1e-8) * (1 + grad_scale(m, g));
  CheckResult<Scalar> out;
  out.id = id;
  out.tolerance = slack;
  out.pass = true;
  Scalar worst = 0;
  for (NodeIndex id_ : m.interior) {
    if (in_collar(m, id_, 1)) continue;
    const Vec3<Scalar> x = m.grid.position(id_);
    if (std::abs(x[axis]) <= h * (1 + Scalar(1e-12))) continue;
    const Scalar signed_slope = g(Eigen::Index(id_), axis) * (x[axis] > 0 ? 1 : -1);
    if (signed_slope > worst) {
      worst = signed_slope;
      out.worst_location = x;
    }
  }
  out.measured = worst;  // most positive value of sign(x) * du/dx
  out.pass = worst <= slack;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rectangle audit.

template <typename Scalar>
AuditReport<Scalar> audit_rectangle(const ScalarField<Scalar>& f,
                                    const SuiteOptions<Scalar>& opt = {}) {
  const auto& m = *f.mask;
  const auto* rect = std::get_if<Rectangle<Scalar>>(&m.domain);
  if (!rect) throw UsageError("audit_rectangle needs a rectangle-domain field");
  const Scalar L = rect->half_length, b = rect->half_width;
  const Scalar hx = m.grid.spacing[0], hy = m.grid.spacing[1];
  AuditReport<Scalar> rep;
  const auto g = gradient(f);

  rep.checks.push_back(detail::sign_check("SIGN_X", f, g, 0));
  rep.checks.push_back(detail::sign_check("SIGN_Y", f, g, 1));

  // |Du| along the column one cell in from the x = L edge, as a function of
  // |y|: decreasing toward the corners.
  {
    CheckResult<Scalar> c;
    c.id = "EDGE_MONOTONE";
    const Scalar slack = Scalar(1e-6) * (1 + detail::grad_scale(m, g));
    c.tolerance = slack;
    c.pass = true;
    const int i = m.grid.nodes[0] - 2;
    const int jc = (m.grid.nodes[1] - 1) / 2;
    Scalar worst = 0;
    for (int dir = -1; dir <= 1; dir += 2) {
      Scalar prev = -1;
      for (int j = jc; j >= 1 && j <= m.grid.nodes[1] - 2; j += dir) {
        const NodeIndex id = m.grid.flatten(MultiIndex{i, j, 0});
        if (!m.is_interior(id)) break;
        const Scalar mag = g.row(Eigen::Index(id)).matrix().norm();
        if (prev >= 0 && mag - prev > worst) {
          worst = mag - prev;
          c.worst_location = m.grid.position(id);
        }
        prev = mag;
      }
    }
    c.measured = worst;
    c.pass = worst <= slack;
    rep.checks.push_back(c);
  }

  // w = (b - |y|) sqrt(1 + |Du|^2): the maximum must sit on the centerline.
  Scalar wmax = 0;
  {
    CheckResult<Scalar> c;
    c.id = "W_ARGMAX";
    c.tolerance = hy * (1 + Scalar(1e-12));
    Vec3<Scalar> arg = Vec3<Scalar>::Zero();
    for (NodeIndex id : m.interior) {
      const Vec3<Scalar> x = m.grid.position(id);
      const Scalar v = std::sqrt(1 + g.row(Eigen::Index(id)).square().sum());
      const Scalar w = (b - std::abs(x[1])) * v;
      if (w > wmax) {
        wmax = w;
        arg = x;
      }
    }
    c.measured = std::abs(arg[1]);
    c.worst_location = arg;
    c.pass = c.measured <= c.tolerance;
    rep.checks.push_back(c);
  }

  // Stability of max w when the rectangle doubles in length.
  {
    CheckResult<Scalar> c;
    c.id = "W_STABLE";
    c.tolerance = Scalar(0.10);
    auto [f2, rep2] = solve_rectangle(2 * L, b, hx, opt);
    const auto g2 = gradient(f2);
    Scalar wmax2 = 0;
    for (NodeIndex id : f2.mask->interior) {
      const Vec3<Scalar> x = f2.mask->grid.position(id);
      const Scalar v = std::sqrt(1 + g2.row(Eigen::Index(id)).square().sum());
      wmax2 = std::max(wmax2, (b - std::abs(x[1])) * v);
    }
    c.measured = std::abs(wmax2 - wmax) / wmax;
    c.pass = c.measured <= c.tolerance;
    c.note = "max w: L=" + std::to_string(double(wmax)) + ", 2L=" + std::to_string(double(wmax2));
    rep.checks.push_back(c);
  }

  // The trace identity at the interior maximum.
  {
    CheckResult<Scalar> c;
    c.id = "TRACE_APEX";
    c.tolerance = Scalar(0.05);
    const auto spec = apex_spectrum(f);
    c.measured = std::abs(spec.trace() + 1);
    c.worst_location = spec.node_position;
    c.pass = c.measured <= c.tolerance;
    rep.checks.push_back(c);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Ellipsoid audit.

template <typename Scalar>
AuditReport<Scalar> audit_ellipsoid(const ScalarField<Scalar>& f, Scalar rho = Scalar(-1)) {
  const auto& m = *f.mask;
  const auto* ell = std::get_if<Ellipsoid<Scalar>>(&m.domain);
  if (!ell) throw UsageError("audit_ellipsoid needs an ellipsoid-domain field");
  const int n = ell->n;
  AuditReport<Scalar> rep;
  const auto g = gradient(f);
  const Scalar h = m.grid.spacing.head(n).maxCoeff();
  const Scalar gscale = detail::grad_scale(m, g);
  const auto spec = apex_spectrum(f);

  // Rotational derivative (x_i d_j - x_j d_i) u versus the sign of x_i x_j
  // for each strictly ordered coefficient pair; identically zero for ties.
  {
    CheckResult<Scalar> c;
    c.id = "ROT_SIGN";
    c.pass = true;
    const Scalar slack = 10 * h * h * (1 + gscale * gscale);
    c.tolerance = slack;
    Scalar worst = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const Scalar ai = ell->coeff[i], aj = ell->coeff[j];
        if (std::abs(double(ai - aj)) <= 1e-12) {
          // tie: rotational derivative should vanish to truncation order
          for (NodeIndex id : m.interior) {
            if (in_collar(m, id, 1)) continue;
            const Vec3<Scalar> x = m.grid.position(id);
            const Scalar rot = x[i] * g(Eigen::Index(id), j) - x[j] * g(Eigen::Index(id), i);
            if (std::abs(rot) - slack > worst) {
              worst = std::abs(rot) - slack;
              c.worst_location = x;
            }
          }
        } else if (ai > aj) {
          // (x_i d_j - x_j d_i) u carries the sign of x_i x_j
          for (NodeIndex id : m.interior) {
            if (in_collar(m, id, 1)) continue;
            const Vec3<Scalar> x = m.grid.position(id);
            if (std::abs(x[i] * x[j]) <= h * h) continue;
            const Scalar rot = x[i] * g(Eigen::Index(id), j) - x[j] * g(Eigen::Index(id), i);
            const Scalar signed_rot = rot * (x[i] * x[j] > 0 ? 1 : -1);
            if (-signed_rot - slack > worst) {
              worst = -signed_rot - slack;
              c.worst_location = x;
            }
          }
        }
      }
    c.measured = worst;
    c.pass = worst <= 0;
    rep.checks.push_back(c);
  }

  // Apex curvature order matches the coefficient order; measured value is
  // the smallest margin k_i - k_j over the strictly ordered pairs.
  {
    CheckResult<Scalar> c;
    c.id = "ORDER";
    c.tolerance = Scalar(0.02);  // tie tolerance
    c.pass = true;
    c.measured = std::numeric_limits<Scalar>::infinity();
    bool any_strict = false;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const Scalar ai = ell->coeff[i], aj = ell->coeff[j];
        const Scalar ki = spec.axis_curvatures[i], kj = spec.axis_curvatures[j];
        if (std::abs(double(ai - aj)) <= 1e-12) {
          if (std::abs(ki - kj) > c.tolerance) c.pass = false;
        } else if (ai > aj) {
          any_strict = true;
          c.measured = std::min(c.measured, ki - kj);
          if (!(ki > kj)) c.pass = false;
        }
      }
    if (!any_strict) c.measured = 0;
    rep.checks.push_back(c);
  }

  // Extended by zero outside the ellipsoid, the minimum of u over the sphere
  // |x| = rho is attained along the largest-curvature axis.
  {
    CheckResult<Scalar> c;
    c.id = "LOW_POINT";
    int axis = 0;
    for (int d = 1; d < n; ++d)
      if (ell->coeff[d] > ell->coeff[axis]) axis = d;
    if (rho <= 0) rho = Scalar(0.8) * ell->semi_axis(axis);
    c.tolerance = 2 * h;
    Scalar vmin = std::numeric_limits<Scalar>::infinity();
    Vec3<Scalar> argmin = Vec3<Scalar>::Zero();
    Scalar axis_min = std::numeric_limits<Scalar>::infinity();
    const NodeIndex total = m.total();
    for (NodeIndex id = 0; id < total; ++id) {
      const Vec3<Scalar> x = m.grid.position(id);
      Scalar r = 0;
      for (int d = 0; d < n; ++d) r += x[d] * x[d];
      r = std::sqrt(r);
      if (std::abs(r - rho) > h / 2) continue;
      const Scalar val = m.is_interior(id) ? f[id] : Scalar(0);
      if (val < vmin) {
        vmin = val;
        argmin = x;
      }
      Scalar axis_dist2 = 0;
      for (int d = 0; d < n; ++d)
        if (d != axis) axis_dist2 += x[d] * x[d];
      if (std::sqrt(axis_dist2) <= 2 * h) axis_min = std::min(axis_min, val);
    }
    Scalar axis_dist2 = 0;
    for (int d = 0; d < n; ++d)
      if (d != axis) axis_dist2 += argmin[d] * argmin[d];
    c.measured = std::sqrt(axis_dist2);
    c.worst_location = argmin;
    // Value-based tie fallback: rotationally symmetric solves tie along the
    // whole annulus to truncation accuracy.
    const Scalar value_slack = 10 * h * h * (1 + std::abs(spec.value));
    c.pass = c.measured <= c.tolerance || vmin >= axis_min - value_slack;
    c.note = "rho = " + std::to_string(double(rho));
    rep.checks.push_back(c);
  }

  // Invariance under a 45-degree rotation for tied coefficient pairs.
  {
    CheckResult<Scalar> c;
    c.id = "ROT_INV";
    c.pass = true;
    Scalar umax = 0;
    for (NodeIndex id : m.interior) umax = std::max(umax, std::abs(f[id]));
    const Scalar tol = 10 * h * h * (1 + umax);
    c.tolerance = tol;
    Scalar worst = 0;
    bool any_tie = false;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (std::abs(double(ell->coeff[i] - ell->coeff[j])) > 1e-12) continue;
        any_tie = true;
        const Scalar cth = std::cos(Scalar(kPi / 4)), sth = std::sin(Scalar(kPi / 4));
        for (NodeIndex id : m.interior) {
          if (in_collar(m, id, 2)) continue;
          const Vec3<Scalar> x = m.grid.position(id);
          Vec3<Scalar> y = x;
          y[i] = cth * x[i] - sth * x[j];
          y[j] = sth * x[i] + cth * x[j];
          // bilinear (dim 2) / trilinear (dim 3) interpolation at y
          MultiIndex base;
          Vec3<Scalar> t = Vec3<Scalar>::Zero();
          bool ok = true;
          for (int d = 0; d < n; ++d) {
            const Scalar s = (y[d] - m.grid.lo[d]) / m.grid.spacing[d];
            base[d] = int(std::floor(s));
            t[d] = s - Scalar(base[d]);
            if (base[d] < 0 || base[d] + 1 >= m.grid.nodes[d]) ok = false;
          }
          for (int d = n; d < 3; ++d) base[d] = 0;
          if (!ok) continue;
          Scalar interp = 0;
          bool usable = true;
          for (int corner = 0; corner < (1 << n) && usable; ++corner) {
            MultiIndex q = base;
            Scalar wgt = 1;
            for (int d = 0; d < n; ++d) {
              const int bit = (corner >> d) & 1;
              q[d] += bit;
              wgt *= bit ? t[d] : 1 - t[d];
            }
            const NodeIndex qid = m.grid.flatten(q);
            if (m.is_exterior(qid)) {
              usable = false;
              break;
            }
            interp += wgt * f[qid];
          }
          if (!usable) continue;
          const Scalar gap = std::abs(interp - f[id]);
          if (gap > worst) {
            worst = gap;
            c.worst_location = x;
          }
        }
      }
    c.measured = worst;
    c.pass = !any_tie || worst <= tol;
    if (!any_tie) c.note = "no tied coefficient pairs";
    rep.checks.push_back(c);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Ellipsoid-slab audit.

template <typename Scalar>
AuditReport<Scalar> audit_slab(const ScalarField<Scalar>& f,
                               const SuiteOptions<Scalar>& opt = {}) {
  const auto& m = *f.mask;
  const auto* slab = std::get_if<EllipsoidSlab<Scalar>>(&m.domain);
  if (!slab) throw UsageError("audit_slab needs an ellipsoid-slab-domain field");
  const int n = slab->cross_section.n;
  const int dim = n + 1;
  const Scalar b = slab->half_width;
  AuditReport<Scalar> rep;
  const auto g = gradient(f);
  const Scalar h = m.grid.spacing.head(dim).maxCoeff();
  const Scalar gscale = detail::grad_scale(m, g);

  // Every derivative component opposes its coordinate, slab axis included.
  {
    CheckResult<Scalar> c;
    c.id = "SIGN_ALL";
    const Scalar slack = Scalar(1e-8) * (1 + gscale);
    c.tolerance = slack;
    Scalar worst = 0;
    for (int axis = 0; axis < dim; ++axis) {
      auto part = detail::sign_check("part", f, g, axis);
      if (part.measured > worst) {
        worst = part.measured;
        c.worst_location = part.worst_location;
      }
    }
    c.measured = worst;
    c.pass = worst <= slack;
    rep.checks.push_back(c);
  }

  // Lateral-boundary slope magnitude decreasing in |s| along each vertical
  // column adjacent to the ellipsoid wall.
  {
    CheckResult<Scalar> c;
    c.id = "EDGE_S_MONOTONE";
    const Scalar slack = Scalar(1e-6) * (1 + gscale);
    c.tolerance = slack;
    Scalar worst = 0;
    const int jc = (m.grid.nodes[n] - 1) / 2;
    const NodeIndex total = m.total();
    for (NodeIndex id = 0; id < total; ++id) {
      if (!m.is_interior(id)) continue;
      const MultiIndex mi = m.grid.unflatten(id);
      if (mi[n] != jc) continue;
      // columns whose lateral neighborhood touches the wall
      bool near_wall = false;
      for (int d = 0; d < n && !near_wall; ++d)
        for (int s = -1; s <= 1 && !near_wall; s += 2) {
          const NodeIndex q = m.neighbor(mi, d, s);
          if (q >= 0 && m.cls(q) == NodeClass::boundary) near_wall = true;
        }
      if (!near_wall) continue;
      for (int dir = -1; dir <= 1; dir += 2) {
        Scalar prev = -1;
        for (int j = jc; j >= 1 && j <= m.grid.nodes[n] - 2; j += dir) {
          MultiIndex q = mi;
          q[n] = j;
          const NodeIndex qid = m.grid.flatten(q);
          if (!m.is_interior(qid) || in_collar(m, qid, 1)) break;
          const Scalar mag = g.row(Eigen::Index(qid)).matrix().norm();
          if (prev >= 0 && mag - prev > worst) {
            worst = mag - prev;
            c.worst_location = m.grid.position(qid);
          }
          prev = mag;
        }
      }
    }
    c.measured = worst;
    c.pass = worst <= slack;
    rep.checks.push_back(c);
  }

  // w = (b - |s|) sqrt(1 + |Du|^2) bounded: stable when the cross-section
  // radius doubles.
  {
    CheckResult<Scalar> c;
    c.id = "W_SLAB";
    c.tolerance = Scalar(0.15);
    const auto slab_wmax = [b](const ScalarField<Scalar>& fld, int slab_axis) {
      const auto gg = gradient(fld);
      Scalar w = 0;
      for (NodeIndex id : fld.mask->interior) {
        const Vec3<Scalar> x = fld.mask->grid.position(id);
        const Scalar v = std::sqrt(1 + gg.row(Eigen::Index(id)).square().sum());
        w = std::max(w, (b - std::abs(x[slab_axis])) * v);
      }
      return w;
    };
    const Scalar w1 = slab_wmax(f, n);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> a(n);
    for (int d = 0; d < n; ++d) a[d] = slab->cross_section.coeff[d];
    auto [f2, rep2] =
        solve_slab<Scalar>(a, 2 * slab->cross_section.radius, b, m.grid.spacing[0], opt);
    const Scalar w2 = slab_wmax(f2, n);
    c.measured = std::abs(w2 - w1) / w1;
    c.pass = c.measured <= c.tolerance;
    c.note = "max w: R=" + std::to_string(double(w1)) + ", 2R=" + std::to_string(double(w2));
    rep.checks.push_back(c);
  }

  // Rotational derivative in the lateral coordinates, as for ellipsoids.
  {
    CheckResult<Scalar> c;
    c.id = "ROT_SIGN";
    const Scalar slack = 10 * h * h * (1 + gscale * gscale);
    c.tolerance = slack;
    Scalar worst = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (i == j) continue;
        const Scalar ai = slab->cross_section.coeff[i], aj = slab->cross_section.coeff[j];
        if (std::abs(double(ai - aj)) <= 1e-12) {
          for (NodeIndex id : m.interior) {
            if (in_collar(m, id, 1)) continue;
            const Vec3<Scalar> x = m.grid.position(id);
            const Scalar rot = x[i] * g(Eigen::Index(id), j) - x[j] * g(Eigen::Index(id), i);
            if (std::abs(rot) - slack > worst) {
              worst = std::abs(rot) - slack;
              c.worst_location = x;
            }
          }
        } else if (ai > aj) {
          for (NodeIndex id : m.interior) {
            if (in_collar(m, id, 1)) continue;
            const Vec3<Scalar> x = m.grid.position(id);
            if (std::abs(x[i] * x[j]) <= h * h) continue;
            const Scalar rot = x[i] * g(Eigen::Index(id), j) - x[j] * g(Eigen::Index(id), i);
            const Scalar signed_rot = rot * (x[i] * x[j] > 0 ? 1 : -1);
            if (-signed_rot - slack > worst) {
              worst = -signed_rot - slack;
              c.worst_location = x;
            }
          }
        }
      }
    c.measured = worst;
    c.pass = worst <= 0;
    rep.checks.push_back(c);
  }
  return rep;
}

}  // namespace translator
