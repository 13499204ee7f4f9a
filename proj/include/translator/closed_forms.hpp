#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "translator/grid.hpp"

namespace translator {

inline constexpr double kPi = 3.14159265358979323846;

// Radial profile of the bowl soliton in R^{n+1}:
//   u''/(1+u'^2) + (n-1) u'/r = -1,   u(0) = 0, u'(0) = 0.
// Samples live at r_j = j*dr; slopes are stored so evaluation can use a
// Hermite cubic between samples.
template <typename Scalar = double>
struct BowlProfile {
  int n = 2;
  Scalar dr = Scalar(1e-3);
  std::vector<Scalar> u, du;

  Scalar r_max() const { return dr * Scalar(u.size() - 1); }

  Scalar slope_ode(Scalar r, Scalar p) const {
    return -(1 + p * p) * (1 + Scalar(n - 1) * p / r);
  }

  // Hermite cubic interpolation of (value, slope); curvature comes from the
  // ODE itself rather than from differentiating the cubic.
  void eval(Scalar r, Scalar* value, Scalar* slope, Scalar* curvature) const;
};

namespace detail {

template <typename Scalar>
void rk4_step(const BowlProfile<Scalar>& pr, Scalar r, Scalar step, Scalar& u, Scalar& p) {
  const auto f = [&](Scalar rr, Scalar pp) { return pr.slope_ode(rr, pp); };
  const Scalar k1u = p, k1p = f(r, p);
  const Scalar k2u = p + step / 2 * k1p, k2p = f(r + step / 2, p + step / 2 * k1p);
  const Scalar k3u = p + step / 2 * k2p, k3p = f(r + step / 2, p + step / 2 * k2p);
  const Scalar k4u = p + step * k3p, k4p = f(r + step, p + step * k3p);
  u += step / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
  p += step / 6 * (k1p + 2 * k2p + 2 * k3p + k4p);
}

// Integrate with a fixed sample step; sub_steps RK4 stages per sample.
template <typename Scalar>
void integrate_bowl(BowlProfile<Scalar>& pr, Scalar r_max, int sub_steps) {
  const int samples = int(std::lround(double(r_max / pr.dr)));
  pr.u.assign(std::size_t(samples) + 1, Scalar(0));
  pr.du.assign(std::size_t(samples) + 1, Scalar(0));

  // Two-term series start at eps = dr/10 avoids the removable p/r singularity.
  const Scalar c2 = Scalar(-1) / (2 * pr.n);
  const Scalar c4 = Scalar(-1) / (Scalar(pr.n) * pr.n * (4 * pr.n + 8));
  const Scalar eps = pr.dr / 10;
  Scalar r = eps;
  Scalar u = c2 * eps * eps + c4 * eps * eps * eps * eps;
  Scalar p = 2 * c2 * eps + 4 * c4 * eps * eps * eps;

  // First interval [eps, dr], then uniform steps landing on the samples.
  for (int k = 0; k < sub_steps; ++k) {
    const Scalar step = (pr.dr - eps) / sub_steps;
    rk4_step(pr, r, step, u, p);
    r += step;
  }
  if (samples >= 1) {
    pr.u[1] = u;
    pr.du[1] = p;
  }
  for (int j = 1; j < samples; ++j) {
    for (int k = 0; k < sub_steps; ++k) {
      const Scalar step = pr.dr / sub_steps;
      rk4_step(pr, r, step, u, p);
      r += step;
    }
    pr.u[std::size_t(j) + 1] = u;
    pr.du[std::size_t(j) + 1] = p;
  }
}

}  // namespace detail

template <typename Scalar>
void BowlProfile<Scalar>::eval(Scalar r, Scalar* value, Scalar* slope,
                               Scalar* curvature) const {
  if (r < 0 || r > r_max() + Scalar(1e-12))
    throw DomainError("bowl profile evaluated beyond its integrated range");
  const Scalar c2 = Scalar(-1) / (2 * n);
  if (r < dr / 4) {
    // Series region: quartic term is below roundoff here.
    if (value) *value = c2 * r * r;
    if (slope) *slope = 2 * c2 * r;
    if (curvature) *curvature = 2 * c2;
    return;
  }
  const std::size_t j = std::min(u.size() - 2, std::size_t(r / dr));
  const Scalar t = (r - Scalar(j) * dr) / dr;
  const Scalar h00 = (1 + 2 * t) * (1 - t) * (1 - t);
  const Scalar h10 = t * (1 - t) * (1 - t);
  const Scalar h01 = t * t * (3 - 2 * t);
  const Scalar h11 = t * t * (t - 1);
  const Scalar val = h00 * u[j] + h10 * dr * du[j] + h01 * u[j + 1] + h11 * dr * du[j + 1];
  const Scalar dh00 = 6 * t * (t - 1), dh10 = (1 - t) * (1 - 3 * t);
  const Scalar dh01 = -dh00, dh11 = t * (3 * t - 2);
  const Scalar slp = (dh00 * u[j] + dh01 * u[j + 1]) / dr + dh10 * du[j] + dh11 * du[j + 1];
  if (value) *value = val;
  if (slope) *slope = slp;
  if (curvature) *curvature = slope_ode(r, slp);
}

template <typename Scalar = double>
BowlProfile<Scalar> bowl_profile(int n, Scalar r_max, Scalar dr, Scalar tol = Scalar(1e-8)) {
  if (n < 1 || n > 3) throw ConfigError("bowl dimension must be 1, 2 or 3");
  if (!(r_max > 0) || !(dr > 0)) throw ConfigError("bowl profile needs r_max > 0 and dr > 0");
  BowlProfile<Scalar> coarse;
  coarse.n = n;
  coarse.dr = dr;
  detail::integrate_bowl(coarse, r_max, 1);
  BowlProfile<Scalar> fine;
  fine.n = n;
  fine.dr = dr;
  detail::integrate_bowl(fine, r_max, 2);
  Scalar worst = 0;
  for (std::size_t j = 0; j < coarse.u.size(); ++j)
    worst = std::max(worst, std::abs(coarse.u[j] - fine.u[j]) / (1 + std::abs(fine.u[j])));
  if (worst > tol)
    throw AccuracyError("bowl profile step too large for the requested tolerance");
  for (std::size_t j = 1; j < fine.du.size(); ++j) {
    if (!(fine.u[j] < fine.u[j - 1]))
      throw AccuracyError("bowl profile lost monotonicity of u");
    if (!(fine.du[j] < fine.du[j - 1]))
      throw AccuracyError("bowl profile lost monotonicity of the slope");
  }
  return fine;
}

// ---------------------------------------------------------------------------
// Closed-form reference surfaces.

enum class SurfaceFamily { grim_reaper, tilted, arc, plane, bowl };

template <typename Scalar = double>
struct ClosedFormSurface {
  SurfaceFamily family = SurfaceFamily::grim_reaper;
  Scalar theta = 0;           // tilted: tilt angle, |theta| < pi/2
  Scalar arc_half_width = 0;  // arc: b < pi/2
  Scalar level = 0;           // plane: height
  std::shared_ptr<const BowlProfile<Scalar>> profile;  // bowl

  static ClosedFormSurface grim_reaper() { return {}; }

  static ClosedFormSurface tilted(Scalar theta) {
    if (!(std::abs(theta) < kPi / 2)) throw ConfigError("tilt angle must lie in (-pi/2, pi/2)");
    ClosedFormSurface s;
    s.family = SurfaceFamily::tilted;
    s.theta = theta;
    return s;
  }

  static ClosedFormSurface arc(Scalar b) {
    if (!(b > 0 && b < kPi / 2)) throw ConfigError("arc half-width must lie in (0, pi/2)");
    ClosedFormSurface s;
    s.family = SurfaceFamily::arc;
    s.arc_half_width = b;
    return s;
  }

  static ClosedFormSurface plane(Scalar level = 0) {
    ClosedFormSurface s;
    s.family = SurfaceFamily::plane;
    s.level = level;
    return s;
  }

  static ClosedFormSurface bowl(int n, Scalar r_max, Scalar dr = Scalar(2e-4)) {
    ClosedFormSurface s;
    s.family = SurfaceFamily::bowl;
    s.profile = std::make_shared<const BowlProfile<Scalar>>(bowl_profile(n, r_max, dr));
    return s;
  }

  // Half-width of the natural strip domain, +inf where unbounded in y.
  Scalar strip_half_width() const {
    switch (family) {
      case SurfaceFamily::grim_reaper:
        return Scalar(kPi / 2);
      case SurfaceFamily::tilted:
        return Scalar(kPi / 2) / std::cos(theta);
      case SurfaceFamily::arc:
        return arc_half_width;
      default:
        return std::numeric_limits<Scalar>::infinity();
    }
  }
};

template <typename Scalar = double>
struct SurfaceJet {
  Scalar value = 0;
  Vec3<Scalar> gradient = Vec3<Scalar>::Zero();
  Eigen::Matrix<Scalar, 3, 3> hessian = Eigen::Matrix<Scalar, 3, 3>::Zero();
};

template <typename Scalar>
SurfaceJet<Scalar> eval(const ClosedFormSurface<Scalar>& s, const Vec3<Scalar>& x) {
  SurfaceJet<Scalar> jet;
  switch (s.family) {
    case SurfaceFamily::grim_reaper:
    case SurfaceFamily::tilted: {
      const Scalar theta = (s.family == SurfaceFamily::tilted) ? s.theta : Scalar(0);
      const Scalar c = std::cos(theta);
      if (!(std::abs(x[1]) < Scalar(kPi / 2) / c))
        throw DomainError("point outside the strip of the grim reaper family");
      const Scalar yc = x[1] * c;
      jet.value = std::log(std::cos(yc)) / (c * c) + x[0] * std::tan(theta);
      jet.gradient[0] = std::tan(theta);
      jet.gradient[1] = -std::tan(yc) / c;
      const Scalar sec = 1 / std::cos(yc);
      jet.hessian(1, 1) = -sec * sec;
      return jet;
    }
    case SurfaceFamily::arc: {
      const Scalar b = s.arc_half_width;
      if (std::abs(x[1]) > b + Scalar(1e-12))
        throw DomainError("point outside the arc interval [-b, b]");
      const Scalar y = std::min(std::max(x[1], -b), b);
      jet.value = std::log(std::cos(y)) - std::log(std::cos(b));
      jet.gradient[1] = -std::tan(y);
      const Scalar sec = 1 / std::cos(y);
      jet.hessian(1, 1) = -sec * sec;
      return jet;
    }
    case SurfaceFamily::plane:
      jet.value = s.level;
      return jet;
    case SurfaceFamily::bowl: {
      const auto& pr = *s.profile;
      Scalar r2 = 0;
      for (int d = 0; d < pr.n; ++d) r2 += x[d] * x[d];
      const Scalar r = std::sqrt(r2);
      Scalar value, slope, curv;
      pr.eval(r, &value, &slope, &curv);
      jet.value = value;
      if (r < pr.dr / 4) {
        for (int d = 0; d < pr.n; ++d) {
          jet.gradient[d] = curv * x[d];
          jet.hessian(d, d) = curv;
        }
        return jet;
      }
      for (int d = 0; d < pr.n; ++d) jet.gradient[d] = slope * x[d] / r;
      for (int a = 0; a < pr.n; ++a)
        for (int b = 0; b < pr.n; ++b) {
          const Scalar proj = x[a] * x[b] / r2;
          jet.hessian(a, b) = curv * proj + slope / r * ((a == b ? 1 : 0) - proj);
        }
      return jet;
    }
  }
  throw UsageError("unknown surface family");
}

template <typename Scalar>
ScalarField<Scalar> sample_surface(const ClosedFormSurface<Scalar>& s,
                                   std::shared_ptr<const DomainMask<Scalar>> mask) {
  return sample_field<Scalar>(std::move(mask),
                              [&](const Vec3<Scalar>& x) { return eval(s, x).value; });
}

}  // namespace translator
