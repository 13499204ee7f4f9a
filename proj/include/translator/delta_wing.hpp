#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "translator/dirichlet.hpp"
#include "translator/geometry.hpp"
#include "translator/pde.hpp"

namespace translator {

// Tilt angle of the grim reaper family occupying a strip of half-width b:
// the width relation b = pi/(2 cos theta) inverted.
template <typename Scalar>
Scalar tilt_angle(Scalar b) {
  if (!(b >= Scalar(kPi / 2))) throw DomainError("tilt angle needs b >= pi/2");
  return std::acos(std::min(Scalar(1), Scalar(kPi / 2) / b));
}

// Failure of the two-scale limit certificate; carries the measured gap.
struct ScheduleError : AccuracyError {
  double gap;
  ScheduleError(const std::string& msg, double measured_gap)
      : AccuracyError(msg), gap(measured_gap) {}
};

// A complete strictly convex translator over the strip R x (-b, b),
// realized as the normalized limit of long-rectangle Dirichlet solves.
template <typename Scalar = double>
struct DeltaWing {
  Scalar b = 0;
  ScalarField<Scalar> field;  // u - u(0,0) on the largest rectangle solved
  std::vector<Scalar> l_schedule;
  Scalar cauchy_gap = 0;           // certificate on the common half window
  Scalar certified_half_length = 0;  // L_1 / 2
  Scalar theta_hat = 0;            // tilt extracted from the centerline slope
  Scalar k_small = 0, k_large = 0; // normalized apex curvature pair (sum 1)
  ApexSpectrum<Scalar> apex;
  std::vector<SolveReport<Scalar>> reports;
};

namespace detail {

// Embed a field on [-L1,L1]x[-b,b] into the zero field on [-L2,L2]x[-b,b]
// (same spacing, L2 > L1).
template <typename Scalar>
ScalarField<Scalar> embed_in_longer(const ScalarField<Scalar>& f,
                                    std::shared_ptr<const DomainMask<Scalar>> target) {
  ScalarField<Scalar> out(target);
  const auto& gs = f.mask->grid;
  const auto& gt = target->grid;
  const int shift = (gt.nodes[0] - gs.nodes[0]) / 2;
  const NodeIndex total = f.total();
  for (NodeIndex id = 0; id < total; ++id) {
    if (f.mask->is_exterior(id)) continue;
    MultiIndex mi = gs.unflatten(id);
    mi[0] += shift;
    if (!target->is_exterior(gt.flatten(mi))) out[gt.flatten(mi)] = f[id];
  }
  return out;
}

// Warm seed for the next rectangle in the L-schedule.  The solution height
// grows by about tan(theta) * (L2 - L1), so a plain embedding leaves the
// damped Newton to inflate the whole bulk through the stiff boundary layer
// (hundreds of creeping line-searched steps).  Pre-inflate instead: add the
// predicted tent-shaped spine growth, shaped in y by the previous solution's
// own centre profile.
template <typename Scalar>
ScalarField<Scalar> wing_warm_seed(const ScalarField<Scalar>& prev, Scalar b, Scalar L_prev,
                                   std::shared_ptr<const DomainMask<Scalar>> target,
                                   Scalar L_next) {
  ScalarField<Scalar> out = embed_in_longer(prev, target);
  const auto& gp = prev.mask->grid;
  const auto& gt = target->grid;
  const Scalar tan_theta = std::tan(tilt_angle(b));
  const Scalar height_prev = prev.at_origin();
  const Scalar height_next = height_prev + tan_theta * (L_next - L_prev);
  const int ic_prev = (gp.nodes[0] - 1) / 2;
  const int shift = (gt.nodes[0] - gp.nodes[0]) / 2;
  const NodeIndex total = gt.total();
  for (NodeIndex id = 0; id < total; ++id) {
    if (target->is_exterior(id)) continue;
    const MultiIndex mi = gt.unflatten(id);
    const Vec3<Scalar> x = gt.position(mi);
    // previous spine value at this |x| (0 beyond the old rectangle)
    const int ip = mi[0] - shift;
    const Scalar spine_prev =
        (ip >= 0 && ip < gp.nodes[0])
            ? prev[gp.flatten(MultiIndex{ip, (gp.nodes[1] - 1) / 2, 0})]
            : Scalar(0);
    const Scalar tent = tan_theta * (L_next - std::abs(x[0]));
    const Scalar lift = std::max(Scalar(0), std::min(height_next - spine_prev, tent));
    // y-shape from the previous centre column (same y-grid)
    const Scalar profile =
        prev[gp.flatten(MultiIndex{ic_prev, mi[1], 0})] / height_prev;
    out[id] += lift * std::max(Scalar(0), profile);
  }
  return out;
}

template <typename Scalar>
Scalar centerline_slope(const ScalarField<Scalar>& f,
                        const Eigen::Array<Scalar, Eigen::Dynamic, 3>& g, Scalar x_station) {
  const auto& grid = f.mask->grid;
  const int jc = (grid.nodes[1] - 1) / 2;
  const int i = int(std::lround(double((x_station - grid.lo[0]) / grid.spacing[0])));
  const NodeIndex id = grid.flatten(MultiIndex{i, jc, 0});
  if (!f.mask->is_interior(id)) throw UsageError("slope station outside the interior");
  return g(Eigen::Index(id), 0);
}

}  // namespace detail

// Build the wing over R x (-b, b): solve the rectangle family along the
// increasing L-schedule (each solve warm-starting the next), normalize by
// the apex height, and certify the limit by the gap between the last two
// normalized solves on the window |x| <= L_1/2.
template <typename Scalar>
DeltaWing<Scalar> construct(Scalar b, Scalar h, std::vector<Scalar> l_schedule,
                            Scalar cauchy_tol = Scalar(1e-3),
                            const SuiteOptions<Scalar>& opt = {}) {
  if (!(b > Scalar(kPi / 2) + Scalar(1e-3)))
    throw ConfigError("delta wings need strip half-width b > pi/2");
  if (l_schedule.size() < 2) throw ConfigError("L-schedule needs at least two entries");
  for (std::size_t k = 1; k < l_schedule.size(); ++k)
    if (!(l_schedule[k] > l_schedule[k - 1]))
      throw ConfigError("L-schedule must be increasing");

  DeltaWing<Scalar> wing;
  wing.b = b;
  wing.l_schedule = l_schedule;

  ScalarField<Scalar> prev_norm;  // previous normalized solve
  ScalarField<Scalar> current;
  for (std::size_t k = 0; k < l_schedule.size(); ++k) {
    Domain<Scalar> dom = Rectangle<Scalar>{l_schedule[k], b};
    auto mask =
        std::make_shared<const DomainMask<Scalar>>(build_domain(dom, fit_grid(dom, h)));
    const ScalarField<Scalar>* warm = nullptr;
    ScalarField<Scalar> seed;
    if (k > 0) {
      seed = detail::wing_warm_seed(current, b, l_schedule[k - 1], mask, l_schedule[k]);
      warm = &seed;
    }
    auto [u, report] =
        solve_dirichlet(mask, ContinuationSchedule<Scalar>::uniform(opt.lambda_steps),
                        opt.newton, SymmetryFlags::all_even(2), warm);
    wing.reports.push_back(std::move(report));
    current = std::move(u);

    ScalarField<Scalar> normalized = current;
    normalized.values -= current.at_origin();
    if (k > 0) {
      // Cauchy certificate: every successive pair of normalized solves must
      // agree on the common window |x| <= L_1 / 2.
      const Scalar window = l_schedule[0] / 2;
      Scalar gap = 0;
      const auto& gp = prev_norm.mask->grid;
      const auto& gc = normalized.mask->grid;
      const int shift = (gc.nodes[0] - gp.nodes[0]) / 2;
      for (NodeIndex id : prev_norm.mask->interior) {
        MultiIndex mi = gp.unflatten(id);
        const Vec3<Scalar> x = gp.position(mi);
        if (std::abs(x[0]) > window) continue;
        mi[0] += shift;
        gap = std::max(gap, std::abs(normalized[gc.flatten(mi)] - prev_norm[id]));
      }
      wing.cauchy_gap = gap;
      wing.certified_half_length = window;
      if (gap > cauchy_tol)
        throw ScheduleError("L-schedule too short: normalized solves differ by " +
                                std::to_string(double(gap)) + " on the common window",
                            double(gap));
    }
    if (k + 1 == l_schedule.size())
      wing.field = std::move(normalized);
    else
      prev_norm = std::move(normalized);
  }

  wing.apex = apex_spectrum(wing.field);
  const Scalar ksum = wing.apex.curvatures[0] + wing.apex.curvatures[1];
  wing.k_small = std::min(wing.apex.curvatures[0], wing.apex.curvatures[1]) / ksum;
  wing.k_large = std::max(wing.apex.curvatures[0], wing.apex.curvatures[1]) / ksum;

  const auto g = gradient(wing.field);
  const Scalar l_max = l_schedule.back();
  const Scalar far_slope = detail::centerline_slope(wing.field, g, 3 * l_max / 4);
  wing.theta_hat = std::atan(std::abs(far_slope));
  return wing;
}

// Measured centerline slope against the tilt of the asymptotic grim reaper.
template <typename Scalar = double>
struct SlopeCheck {
  Scalar at_half = 0, at_three_quarters = 0;  // du/dx (x, 0) at the stations
  Scalar expected = 0;                        // -tan(theta(b))
  bool monotone = false;
  bool antisymmetric = false;
  bool pass = false;
};

template <typename Scalar>
SlopeCheck<Scalar> asymptotic_slope_check(const DeltaWing<Scalar>& wing,
                                          Scalar rel_tol = Scalar(0.05)) {
  const Scalar l_max = wing.l_schedule.back();
  const auto g = gradient(wing.field);
  SlopeCheck<Scalar> out;
  out.at_half = detail::centerline_slope(wing.field, g, l_max / 2);
  out.at_three_quarters = detail::centerline_slope(wing.field, g, 3 * l_max / 4);
  out.expected = std::tan(tilt_angle(wing.b));
  const Scalar mirror = detail::centerline_slope(wing.field, g, -3 * l_max / 4);
  out.antisymmetric = std::abs(mirror + out.at_three_quarters) <= Scalar(1e-8);
  out.monotone = std::abs(out.at_three_quarters) > std::abs(out.at_half);
  const Scalar rel = std::abs(out.at_three_quarters + out.expected) / out.expected;
  out.pass = rel <= rel_tol && out.monotone;
  return out;
}

// Fraction of window-interior nodes with discrete Gauss curvature above the
// roundoff threshold; the wing is strictly convex, so this should be ~1.
template <typename Scalar = double>
struct ConvexityCheck {
  Scalar fraction = 0;
  Scalar threshold = 0;
  NodeIndex counted = 0;
  bool pass = false;
};

template <typename Scalar>
ConvexityCheck<Scalar> convexity_check(const ScalarField<Scalar>& f,
                                       Scalar window_half_length = 0) {
  const auto& m = *f.mask;
  const auto K = gauss_curvature(f);
  Scalar umax = 0;
  for (NodeIndex id : m.interior) umax = std::max(umax, std::abs(f[id]));
  const Scalar hmin = m.grid.spacing.head(m.grid.dim).minCoeff();
  ConvexityCheck<Scalar> out;
  out.threshold = Scalar(1e-10) * (1 + umax) / (hmin * hmin);
  NodeIndex positive = 0;
  for (NodeIndex id : m.interior) {
    if (in_collar(m, id, 2)) continue;
    if (window_half_length > 0 &&
        std::abs(m.grid.position(id)[0]) > window_half_length)
      continue;
    ++out.counted;
    if (K[Eigen::Index(id)] > out.threshold) ++positive;
  }
  out.fraction = out.counted ? Scalar(positive) / Scalar(out.counted) : Scalar(0);
  out.pass = out.fraction >= Scalar(0.99);
  return out;
}

template <typename Scalar>
ConvexityCheck<Scalar> convexity_check(const DeltaWing<Scalar>& wing) {
  return convexity_check(wing.field);
}

// Spine comparison: after matching height and gradient at the origin, the
// narrower wing stays strictly above the wider one along y = 0.
template <typename Scalar = double>
struct SpineComparison {
  bool pass = false;
  bool degenerate = false;  // equal widths: nothing to compare
  Scalar min_margin = 0;
  Scalar at_x = 0;
};

template <typename Scalar>
SpineComparison<Scalar> spine_comparison(const DeltaWing<Scalar>& narrow,
                                         const DeltaWing<Scalar>& wide) {
  SpineComparison<Scalar> out;
  if (std::abs(double(narrow.b - wide.b)) <= 1e-12) {
    out.degenerate = true;
    out.pass = true;
    return out;
  }
  if (narrow.b > wide.b) throw UsageError("spine comparison expects b_small < b_large");
  const auto& gn = narrow.field.mask->grid;
  const auto& gw = wide.field.mask->grid;
  const Scalar window =
      std::min(narrow.certified_half_length, wide.certified_half_length);
  const int jn = (gn.nodes[1] - 1) / 2;
  const int jw = (gw.nodes[1] - 1) / 2;
  out.min_margin = std::numeric_limits<Scalar>::infinity();
  out.pass = true;
  for (int i = 0; i < gn.nodes[0]; ++i) {
    const Vec3<Scalar> x = gn.position(MultiIndex{i, jn, 0});
    if (std::abs(x[0]) < gn.spacing[0] / 2 || std::abs(x[0]) > window) continue;
    const int iw = int(std::lround(double((x[0] - gw.lo[0]) / gw.spacing[0])));
    const Scalar margin = narrow.field[gn.flatten(MultiIndex{i, jn, 0})] -
                          wide.field[gw.flatten(MultiIndex{iw, jw, 0})];
    if (margin < out.min_margin) {
      out.min_margin = margin;
      out.at_x = x[0];
    }
    if (!(margin > 0)) out.pass = false;
  }
  return out;
}

template <typename Scalar>
SpineComparison<Scalar> spine_comparison(Scalar b_small, Scalar b_large, Scalar h,
                                         const std::vector<Scalar>& l_schedule,
                                         Scalar cauchy_tol = Scalar(5e-2),
                                         const SuiteOptions<Scalar>& opt = {}) {
  const auto narrow = construct(b_small, h, l_schedule, cauchy_tol, opt);
  const auto wide = construct(b_large, h, l_schedule, cauchy_tol, opt);
  return spine_comparison(narrow, wide);
}

// Max-norm distance of wings at widths b and b - delta on a fixed window,
// with the narrower wing interpolated onto the wider wing's nodes.
template <typename Scalar>
Scalar continuity_in_b(const DeltaWing<Scalar>& wing, const DeltaWing<Scalar>& nearby,
                       Scalar window_x, Scalar window_y) {
  const auto& ga = wing.field.mask->grid;
  const auto& gb = nearby.field.mask->grid;
  Scalar gap = 0;
  for (NodeIndex id : wing.field.mask->interior) {
    const Vec3<Scalar> x = ga.position(id);
    if (std::abs(x[0]) > window_x || std::abs(x[1]) > window_y) continue;
    // bilinear interpolation of the nearby wing at x
    Scalar sx = (x[0] - gb.lo[0]) / gb.spacing[0];
    Scalar sy = (x[1] - gb.lo[1]) / gb.spacing[1];
    const int i0 = std::min(int(std::floor(sx)), gb.nodes[0] - 2);
    const int j0 = std::min(int(std::floor(sy)), gb.nodes[1] - 2);
    const Scalar tx = sx - Scalar(i0), ty = sy - Scalar(j0);
    Scalar interp = 0;
    bool usable = true;
    for (int corner = 0; corner < 4 && usable; ++corner) {
      const int di = corner & 1, dj = (corner >> 1) & 1;
      const NodeIndex q = gb.flatten(MultiIndex{i0 + di, j0 + dj, 0});
      if (nearby.field.mask->is_exterior(q)) usable = false;
      interp += (di ? tx : 1 - tx) * (dj ? ty : 1 - ty) * nearby.field[q];
    }
    if (!usable) continue;
    gap = std::max(gap, std::abs(interp - wing.field[id]));
  }
  return gap;
}

template <typename Scalar>
Scalar continuity_in_b(Scalar b, Scalar delta, Scalar h, const std::vector<Scalar>& l_schedule,
                       Scalar cauchy_tol = Scalar(5e-2), const SuiteOptions<Scalar>& opt = {}) {
  if (!(b - delta > Scalar(kPi / 2))) throw ConfigError("b - delta must stay above pi/2");
  if (delta == Scalar(0)) return 0;
  const auto wing = construct(b, h, l_schedule, cauchy_tol, opt);
  const auto nearby = construct(b - delta, h, l_schedule, cauchy_tol, opt);
  const Scalar window_y = Scalar(0.6) * (b - delta);
  return continuity_in_b(wing, nearby, Scalar(2), window_y);
}

// Gradient-range bound: the first slope component of a wing stays strictly
// inside the +-tan(theta) range of its asymptotic tilted reapers.
template <typename Scalar = double>
struct GaussImageBound {
  Scalar max_first_slope = 0;
  Scalar bound = 0;
  bool pass = false;
  Vec3<Scalar> worst_location = Vec3<Scalar>::Zero();
};

template <typename Scalar>
GaussImageBound<Scalar> gauss_image_bounds(const ScalarField<Scalar>& f, Scalar tan_theta,
                                           Scalar window_half_length = 0) {
  const auto& m = *f.mask;
  const auto g = gradient(f);
  GaussImageBound<Scalar> out;
  out.bound = tan_theta * Scalar(1.02);
  for (NodeIndex id : m.interior) {
    // Shortened boundary arms on sampled fields carry data for a shifted
    // location; keep the scan one cell inside.
    if (in_collar(m, id, 1)) continue;
    if (window_half_length > 0 &&
        std::abs(m.grid.position(id)[0]) > window_half_length)
      continue;
    const Scalar s = std::abs(g(Eigen::Index(id), 0));
    if (s > out.max_first_slope) {
      out.max_first_slope = s;
      out.worst_location = m.grid.position(id);
    }
  }
  out.pass = out.max_first_slope < out.bound;
  return out;
}

template <typename Scalar>
GaussImageBound<Scalar> gauss_image_bounds(const DeltaWing<Scalar>& wing) {
  return gauss_image_bounds(wing.field, std::tan(tilt_angle(wing.b)));
}

}  // namespace translator
