#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "translator/dirichlet.hpp"
#include "translator/geometry.hpp"

namespace translator {

// A point of the standard simplex: nonnegative entries summing to 1.
template <typename Scalar = double>
struct SimplexPoint {
  int n = 2;
  Vec3<Scalar> entries = Vec3<Scalar>::Zero();

  static SimplexPoint of(std::initializer_list<Scalar> values) {
    return of(std::vector<Scalar>(values));
  }
  static SimplexPoint of(const std::vector<Scalar>& values) {
    if (values.empty() || values.size() > 3)
      throw ConfigError("simplex points need 1 to 3 entries");
    SimplexPoint p;
    p.n = int(values.size());
    Scalar sum = 0;
    for (int d = 0; d < p.n; ++d) {
      if (values[std::size_t(d)] < 0) throw ConfigError("simplex entries must be nonnegative");
      p.entries[d] = values[std::size_t(d)];
      sum += values[std::size_t(d)];
    }
    if (std::abs(double(sum - 1)) > 1e-12) throw ConfigError("simplex entries must sum to 1");
    return p;
  }
  Scalar operator[](int d) const { return entries[d]; }
};

struct CalibrationError : AccuracyError {
  explicit CalibrationError(const std::string& msg) : AccuracyError(msg) {}
};

template <typename Scalar = double>
struct InversionError : AccuracyError {
  SimplexPoint<Scalar> best;
  Scalar best_gap;
  InversionError(const std::string& msg, SimplexPoint<Scalar> iterate, Scalar gap)
      : AccuracyError(msg), best(std::move(iterate)), best_gap(gap) {}
};

template <typename Scalar = double>
struct FMapResult {
  SimplexPoint<Scalar> a;
  Scalar lambda = 0;       // prescribed apex height
  Scalar radius = 0;       // calibrated R
  SimplexPoint<Scalar> k;  // apex principal curvatures by axis
  ApexSpectrum<Scalar> apex;
  bool monotone_in_radius = true;  // runtime check on u(0) vs R
  Scalar apex_height = 0;          // achieved u(0)
};

namespace detail {

template <typename Scalar>
Scalar apex_height_for_radius(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a, Scalar R,
                              Scalar h, const SuiteOptions<Scalar>& opt,
                              ScalarField<Scalar>* field_out = nullptr) {
  try {
    auto [u, report] = solve_ellipsoid<Scalar>(a, R, h, opt);
    const Scalar height = u.at_origin();
    if (field_out) *field_out = std::move(u);
    return height;
  } catch (const SolverError<Scalar>&) {
    // No bounded solution this wide (one-dimensional widths beyond pi/2):
    // treat as above any finite target.
    return std::numeric_limits<Scalar>::infinity();
  }
}

}  // namespace detail

// Choose R so that the ellipsoid solve has apex height lambda (within 1%).
// u(0) is observed to increase with R; the small-height limit u(0) ~ R^2/2
// seeds the bracket.  The monotonicity observation is checked at runtime and
// a scan fallback engages if it ever fails.
template <typename Scalar>
Scalar calibrate_R(const SimplexPoint<Scalar>& a, Scalar lambda, Scalar h,
                   const SuiteOptions<Scalar>& opt = {}, bool* monotone_ok = nullptr,
                   Scalar* achieved = nullptr, ScalarField<Scalar>* field_out = nullptr) {
  if (!(lambda > 0)) throw ConfigError("calibration target must be positive");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> av(a.n);
  for (int d = 0; d < a.n; ++d) {
    if (!(a[d] > 0))
      throw ConfigError("calibration needs strictly positive entries; dimension-reduce first");
    av[d] = a[d];
  }
  const Scalar r_max = Scalar(64);
  const Scalar rel_tol = Scalar(0.01);

  std::vector<std::pair<Scalar, Scalar>> samples;  // (R, u(0))
  const auto probe = [&](Scalar R) {
    const Scalar height = detail::apex_height_for_radius(av, R, h, opt);
    samples.emplace_back(R, height);
    return height;
  };

  Scalar lo = std::sqrt(2 * lambda), hi = lo;
  Scalar f_lo = probe(lo), f_hi = f_lo;
  int guard = 0;
  while (f_lo > lambda) {
    hi = lo;
    f_hi = f_lo;
    lo /= 2;
    f_lo = probe(lo);
    if (++guard > 60) throw CalibrationError("bracket search failed from below");
  }
  guard = 0;
  while (f_hi < lambda) {
    lo = hi;
    f_lo = f_hi;
    hi *= Scalar(1.5);
    if (hi > r_max) throw CalibrationError("bracket expansion exceeded the radius cap");
    f_hi = probe(hi);
    if (++guard > 60) throw CalibrationError("bracket search failed from above");
  }

  // Runtime monotonicity check over everything sampled so far.
  bool monotone = true;
  {
    auto sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i].second < sorted[i - 1].second - Scalar(1e-12)) monotone = false;
  }
  if (!monotone) {
    // Scan fallback: rebracket by sampling densely between the extremes.
    Scalar best_lo = lo, best_hi = hi;
    for (int k = 0; k <= 16; ++k) {
      const Scalar R = lo + (hi - lo) * Scalar(k) / 16;
      const Scalar v = probe(R);
      if (v < lambda) best_lo = R;
      if (v > lambda && R < best_hi) best_hi = R;
    }
    lo = best_lo;
    hi = best_hi;
  }
  if (monotone_ok) *monotone_ok = monotone;

  Scalar mid = (lo + hi) / 2, f_mid = 0;
  for (int it = 0; it < 60; ++it) {
    mid = (lo + hi) / 2;
    f_mid = probe(mid);
    if (std::abs(f_mid - lambda) <= rel_tol * lambda) break;
    if (f_mid < lambda)
      lo = mid;
    else
      hi = mid;
  }
  if (std::abs(f_mid - lambda) > rel_tol * lambda)
    throw CalibrationError("bisection failed to reach the apex-height target");
  if (achieved) *achieved = f_mid;
  if (field_out)
    detail::apex_height_for_radius(av, mid, h, opt, field_out);
  return mid;
}

// The coefficient-to-curvature map: calibrated ellipsoid solve, apex
// principal curvatures read off axis by axis.  Zero coefficients are
// dimension-reduced (the solution is translation-invariant there, so the
// matching curvatures vanish and faces map to faces).
template <typename Scalar>
FMapResult<Scalar> f_map(const SimplexPoint<Scalar>& a, Scalar lambda, Scalar h,
                         const SuiteOptions<Scalar>& opt = {}) {
  FMapResult<Scalar> out;
  out.a = a;
  out.lambda = lambda;

  std::vector<int> active;
  for (int d = 0; d < a.n; ++d)
    if (a[d] > 0) active.push_back(d);
  if (active.empty()) throw ConfigError("simplex point has no positive entries");

  std::vector<Scalar> reduced(active.size(), Scalar(0));
  for (std::size_t i = 0; i < active.size(); ++i) reduced[i] = a[active[std::size_t(i)]];
  const auto ar = SimplexPoint<Scalar>::of(reduced);

  ScalarField<Scalar> field;
  out.radius = calibrate_R(ar, lambda, h, opt, &out.monotone_in_radius, &out.apex_height,
                           &field);
  out.apex = apex_spectrum(field);

  out.k.n = a.n;
  for (std::size_t i = 0; i < active.size(); ++i)
    out.k.entries[active[i]] = out.apex.axis_curvatures[int(i)];
  // renormalize onto the simplex (the raw sum is 1 up to the trace tolerance)
  const Scalar sum = out.k.entries.sum();
  out.k.entries /= sum;
  return out;
}

// Invert the map: find a with F(a) close to the target curvature vector.
// Ties in the target are imposed as equality constraints; the rest reduces
// to a bisection in the two-entry case and a simplex-edge compass search in
// the three-entry case (the map is only known to be continuous).
template <typename Scalar>
std::pair<SimplexPoint<Scalar>, FMapResult<Scalar>> invert_f(
    const SimplexPoint<Scalar>& k_target, Scalar lambda, Scalar h, Scalar tol,
    const SuiteOptions<Scalar>& opt = {}) {
  const int n = k_target.n;
  const auto error_of = [&](const FMapResult<Scalar>& r) {
    Scalar e = 0;
    for (int d = 0; d < n; ++d) e = std::max(e, std::abs(r.k[d] - k_target[d]));
    return e;
  };

  // All-equal targets are fixed by symmetry; nothing to search.
  bool all_equal = true;
  for (int d = 1; d < n; ++d)
    if (std::abs(double(k_target[d] - k_target[0])) > 1e-12) all_equal = false;
  if (all_equal) {
    std::vector<Scalar> uniform(static_cast<std::size_t>(n), Scalar(1) / Scalar(n));
    auto a = SimplexPoint<Scalar>::of(uniform);
    auto result = f_map(a, lambda, h, opt);
    return {a, std::move(result)};
  }

  if (n == 2) {
    // k sorted descending matches a sorted descending (order preservation):
    // bisection on the larger entry.
    const bool swap = k_target[1] > k_target[0];
    const Scalar k1 = swap ? k_target[1] : k_target[0];
    Scalar lo = Scalar(0.5), hi = Scalar(1) - Scalar(1e-3);
    SimplexPoint<Scalar> best;
    FMapResult<Scalar> best_result;
    Scalar best_err = std::numeric_limits<Scalar>::infinity();
    for (int it = 0; it < 30; ++it) {
      const Scalar a1 = (lo + hi) / 2;
      auto a = swap ? SimplexPoint<Scalar>::of({1 - a1, a1})
                    : SimplexPoint<Scalar>::of({a1, 1 - a1});
      auto result = f_map(a, lambda, h, opt);
      const Scalar err = error_of(result);
      if (err < best_err) {
        best_err = err;
        best = a;
        best_result = result;
      }
      if (err <= tol) return {best, std::move(best_result)};
      const Scalar f1 = swap ? result.k[1] : result.k[0];
      if (f1 < k1)
        lo = a1;
      else
        hi = a1;
    }
    throw InversionError<Scalar>("bisection stagnated above the tolerance", best, best_err);
  }

  // n == 3: compass search along simplex edge directions.  Tied target
  // entries move as one block (the solution inherits the tie), so the
  // directions transfer mass between tie groups of the target.
  std::vector<std::vector<int>> groups;
  for (int d = 0; d < n; ++d) {
    bool placed = false;
    for (auto& grp : groups)
      if (std::abs(double(k_target[grp.front()] - k_target[d])) <= 1e-12) {
        grp.push_back(d);
        placed = true;
      }
    if (!placed) groups.push_back({d});
  }

  std::vector<Scalar> start(static_cast<std::size_t>(n));
  for (int d = 0; d < n; ++d) start[std::size_t(d)] = std::max(k_target[d], Scalar(1e-3));
  Scalar ssum = std::accumulate(start.begin(), start.end(), Scalar(0));
  for (auto& v : start) v /= ssum;
  auto a = SimplexPoint<Scalar>::of(start);
  auto result = f_map(a, lambda, h, opt);
  Scalar err = error_of(result);
  Scalar step = Scalar(0.1);
  int evals = 1;
  const int max_evals = 80;
  while (err > tol && evals < max_evals && step > Scalar(1e-4)) {
    bool improved = false;
    for (std::size_t gi = 0; gi < groups.size() && !improved; ++gi)
      for (std::size_t gj = 0; gj < groups.size() && !improved; ++gj) {
        if (gi == gj) continue;
        Vec3<Scalar> trial = a.entries;
        bool feasible = true;
        for (int i : groups[gi]) {
          trial[i] += step / Scalar(groups[gi].size());
          feasible = feasible && trial[i] < 1;
        }
        for (int j : groups[gj]) {
          trial[j] -= step / Scalar(groups[gj].size());
          feasible = feasible && trial[j] > 0;
        }
        if (!feasible) continue;
        std::vector<Scalar> tv(static_cast<std::size_t>(n));
        for (int d = 0; d < n; ++d) tv[std::size_t(d)] = trial[d];
        auto cand = SimplexPoint<Scalar>::of(tv);
        auto cand_result = f_map(cand, lambda, h, opt);
        ++evals;
        const Scalar cand_err = error_of(cand_result);
        if (cand_err < err) {
          a = cand;
          result = std::move(cand_result);
          err = cand_err;
          improved = true;
        }
      }
    if (!improved) step /= 2;
  }
  if (err > tol)
    throw InversionError<Scalar>("compass search stagnated above the tolerance", a, err);
  return {a, std::move(result)};
}

// Slab variant: the first-n apex curvatures of the ellipsoid-slab solve,
// normalized onto the simplex; the full spectrum rides along.
template <typename Scalar = double>
struct SlabFMapResult {
  SimplexPoint<Scalar> k;          // normalized lateral curvatures
  ApexSpectrum<Scalar> apex;       // full (n+1)-spectrum
  Scalar lateral_sum = 0;          // sum of the lateral curvatures before normalizing
};

template <typename Scalar>
SlabFMapResult<Scalar> slab_f_map(const SimplexPoint<Scalar>& a, Scalar b, Scalar R, Scalar h,
                                  const SuiteOptions<Scalar>& opt = {}) {
  if (!(b > Scalar(kPi / 2))) throw ConfigError("slab map needs b > pi/2");
  if (a.n + 1 > 3) throw ConfigError("slab map supports lateral dimension up to 2");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> av(a.n);
  for (int d = 0; d < a.n; ++d) {
    if (!(a[d] > 0))
      throw ConfigError("slab map needs strictly positive entries; dimension-reduce first");
    av[d] = a[d];
  }
  auto [u, report] = solve_slab<Scalar>(av, R, b, h, opt);
  SlabFMapResult<Scalar> out;
  out.apex = apex_spectrum(u);
  out.k.n = a.n;
  Scalar sum = 0;
  for (int d = 0; d < a.n; ++d) sum += out.apex.axis_curvatures[d];
  out.lateral_sum = sum;
  for (int d = 0; d < a.n; ++d) out.k.entries[d] = out.apex.axis_curvatures[d] / sum;
  return out;
}

}  // namespace translator
