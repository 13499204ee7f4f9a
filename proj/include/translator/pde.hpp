#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <utility>
#include <vector>

#include "translator/closed_forms.hpp"
#include "translator/grid.hpp"
#include "translator/operators.hpp"

namespace translator {

// Translator operator in nondivergence form, continued in the speed lambda:
//   N_lambda(u) = (1+|Du|^2) tr D^2u - Du.D^2u.Du + lambda (|Du|^2 + 1),
// so lambda = 0 is the minimal-surface operator and lambda = 1 the full
// translator equation.

template <typename Scalar = double>
struct NewtonSettings {
  Scalar tolerance = Scalar(1e-9);  // residual max-norm
  int max_iterations = 40;
  Scalar armijo = Scalar(1e-4);
  int max_backtracks = 30;
  Scalar linear_tolerance = Scalar(1e-9);  // Krylov solves (3D)
  bool check_positivity = true;
  bool check_bowl_barrier = false;
};

template <typename Scalar = double>
struct ContinuationSchedule {
  std::vector<Scalar> lambdas;  // strictly increasing, ending at 1
  int max_bisections = 10;      // adaptive bisection depth on Newton failure

  static ContinuationSchedule uniform(int steps) {
    if (steps < 1) throw ConfigError("continuation needs at least one step");
    ContinuationSchedule s;
    s.lambdas.reserve(std::size_t(steps));
    for (int k = 1; k <= steps; ++k) s.lambdas.push_back(Scalar(k) / Scalar(steps));
    return s;
  }

  void validate() const {
    if (lambdas.empty()) throw ConfigError("empty continuation schedule");
    Scalar prev = 0;
    for (Scalar l : lambdas) {
      if (!(l > prev || (l == 0 && prev == 0)))
        throw ConfigError("continuation schedule must be increasing in [0, 1]");
      prev = l;
    }
    if (std::abs(double(lambdas.back() - 1)) > 1e-14)
      throw ConfigError("continuation schedule must end at lambda = 1");
  }
};

template <typename Scalar = double>
struct LambdaStepTrace {
  Scalar lambda;
  int iterations = 0;
  std::vector<Scalar> residual_norms;  // per iterate, may be nonmonotone
};

template <typename Scalar = double>
struct SolveReport {
  std::vector<LambdaStepTrace<Scalar>> steps;
  Scalar final_residual = std::numeric_limits<Scalar>::quiet_NaN();
  Vec3<Scalar> max_location = Vec3<Scalar>::Zero();
  Scalar max_value = 0;
  double wall_time_s = 0;
  bool converged = false;
  bool at_roundoff_floor = false;  // iteration stalled in evaluation noise above tolerance
  bool positivity_ok = true;
  bool barrier_ok = true;
  bool near_critical_width = false;  // |b - pi/2| < 1e-3 on a strip-like domain
  int total_iterations() const {
    int n = 0;
    for (const auto& s : steps) n += s.iterations;
    return n;
  }
};

// Newton failed to converge; carries the partial trace.
template <typename Scalar = double>
struct SolverError : std::runtime_error {
  SolveReport<Scalar> report;
  SolverError(const std::string& msg, SolveReport<Scalar> rep)
      : std::runtime_error(msg), report(std::move(rep)) {}
};

namespace detail {

// Per-node stencil member list: node index plus the weights its value takes
// in each first / second derivative.  Mirrored arms are merged by node.
template <typename Scalar>
struct LocalStencil {
  static constexpr int kMax = 1 + 6 + 12;  // center + axis arms + diagonals (3D)
  int count = 0;
  NodeIndex node[kMax];
  Scalar d1[kMax][3];   // weight in grad_d
  Scalar d2[kMax][6];   // weight in hess (packed columns)

  int slot(NodeIndex id) {
    for (int k = 0; k < count; ++k)
      if (node[k] == id) return k;
    node[count] = id;
    for (int d = 0; d < 3; ++d) d1[count][d] = 0;
    for (int c = 0; c < 6; ++c) d2[count][c] = 0;
    return count++;
  }
};

template <typename Scalar>
void gather_stencil(const DomainMask<Scalar>& m, NodeIndex id, LocalStencil<Scalar>& st) {
  st.count = 0;
  const MultiIndex mi = m.grid.unflatten(id);
  const int dim = m.grid.dim;
  const int center = st.slot(id);
  for (int d = 0; d < dim; ++d) {
    const auto ax = axis_stencil(m, mi, d);
    st.d1[center][d] += ax.w1_center;
    st.d2[center][d] += ax.w2_center;
    const int l = st.slot(ax.left);
    st.d1[l][d] += ax.w1_left;
    st.d2[l][d] += ax.w2_left;
    const int r = st.slot(ax.right);
    st.d1[r][d] += ax.w1_right;
    st.d2[r][d] += ax.w2_right;
  }
  for (int da = 0; da < dim; ++da)
    for (int db = da + 1; db < dim; ++db) {
      const int col = hessian_packed_column(da, db);
      const auto cs = cross_stencil(m, mi, da, db);
      st.d2[st.slot(id)][col] += cs.w_center;
      for (int k = 0; k < cs.count; ++k) st.d2[st.slot(cs.node[k])][col] += cs.weight[k];
    }
}

}  // namespace detail

// Residual field of N_lambda at interior nodes (zero elsewhere).
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> residual(const ScalarField<Scalar>& f, Scalar lambda) {
  const auto& m = *f.mask;
  const int dim = m.grid.dim;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> res =
      Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(m.total());
  detail::LocalStencil<Scalar> st;
  for (NodeIndex id : m.interior) {
    detail::gather_stencil(m, id, st);
    Scalar g[3] = {0, 0, 0};
    Scalar H[6] = {0, 0, 0, 0, 0, 0};
    for (int k = 0; k < st.count; ++k) {
      const Scalar v = f[st.node[k]];
      for (int d = 0; d < dim; ++d) g[d] += st.d1[k][d] * v;
      for (int c = 0; c < 6; ++c) H[c] += st.d2[k][c] * v;
    }
    Scalar g2 = 0, trace = 0, quad = 0;
    for (int d = 0; d < dim; ++d) {
      g2 += g[d] * g[d];
      trace += H[d];
      quad += g[d] * g[d] * H[d];
    }
    for (int da = 0; da < dim; ++da)
      for (int db = da + 1; db < dim; ++db)
        quad += 2 * g[da] * g[db] * H[hessian_packed_column(da, db)];
    res[Eigen::Index(id)] = (1 + g2) * trace - quad + lambda * (g2 + 1);
  }
  return res;
}

// Jacobian of the residual with respect to the interior unknowns.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> linearize(const ScalarField<Scalar>& f, Scalar lambda) {
  const auto& m = *f.mask;
  const int dim = m.grid.dim;
  const Eigen::Index n = Eigen::Index(m.interior.size());
  std::vector<Eigen::Triplet<Scalar>> trips;
  trips.reserve(std::size_t(n) * (dim == 3 ? 19 : 9));
  detail::LocalStencil<Scalar> st;
  for (NodeIndex id : m.interior) {
    const NodeIndex row = m.interior_rank[std::size_t(id)];
    detail::gather_stencil(m, id, st);
    Scalar g[3] = {0, 0, 0};
    Scalar H[6] = {0, 0, 0, 0, 0, 0};
    for (int k = 0; k < st.count; ++k) {
      const Scalar v = f[st.node[k]];
      for (int d = 0; d < dim; ++d) g[d] += st.d1[k][d] * v;
      for (int c = 0; c < 6; ++c) H[c] += st.d2[k][c] * v;
    }
    Scalar g2 = 0, trace = 0;
    for (int d = 0; d < dim; ++d) {
      g2 += g[d] * g[d];
      trace += H[d];
    }
    // Hg = H.g (full symmetric product)
    Scalar Hg[3] = {0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      Hg[a] += H[a] * g[a];
      for (int b = 0; b < dim; ++b)
        if (b != a) Hg[a] += H[hessian_packed_column(a, b)] * g[b];
    }
    for (int k = 0; k < st.count; ++k) {
      const NodeIndex col = m.interior_rank[std::size_t(st.node[k])];
      if (col < 0) continue;  // boundary data is fixed
      Scalar dg_dot_g = 0, dtrace = 0, dquad = 0;
      for (int d = 0; d < dim; ++d) {
        dg_dot_g += st.d1[k][d] * g[d];
        dtrace += st.d2[k][d];
        dquad += g[d] * g[d] * st.d2[k][d];
      }
      for (int da = 0; da < dim; ++da)
        for (int db = da + 1; db < dim; ++db)
          dquad += 2 * g[da] * g[db] * st.d2[k][hessian_packed_column(da, db)];
      Scalar dquad_g = 0;  // derivative of the quadratic term through Du
      for (int d = 0; d < dim; ++d) dquad_g += 2 * st.d1[k][d] * Hg[d];
      const Scalar val = 2 * dg_dot_g * trace + (1 + g2) * dtrace - dquad - dquad_g +
                         lambda * 2 * dg_dot_g;
      trips.emplace_back(int(row), int(col), val);
    }
  }
  Eigen::SparseMatrix<Scalar> J(n, n);
  J.setFromTriplets(trips.begin(), trips.end());
  J.makeCompressed();
  return J;
}

namespace detail {

template <typename Scalar>
Scalar interior_residual_norm(const DomainMask<Scalar>& m,
                              const Eigen::Array<Scalar, Eigen::Dynamic, 1>& res) {
  Scalar worst = 0;
  for (NodeIndex id : m.interior) worst = std::max(worst, std::abs(res[Eigen::Index(id)]));
  return worst;
}

// Roundoff floor of the residual evaluation: machine epsilon times the
// largest absolute-term sum of the operator.  Below (a small multiple of)
// this level the residual is evaluation noise and Newton cannot make
// progress in double precision.
template <typename Scalar>
Scalar residual_noise_floor(const ScalarField<Scalar>& f, Scalar lambda) {
  const auto& m = *f.mask;
  const int dim = m.grid.dim;
  Scalar worst = 0;
  LocalStencil<Scalar> st;
  for (NodeIndex id : m.interior) {
    gather_stencil(m, id, st);
    Scalar g[3] = {0, 0, 0};
    Scalar habs[6] = {0, 0, 0, 0, 0, 0};
    for (int k = 0; k < st.count; ++k) {
      const Scalar v = f[st.node[k]];
      for (int d = 0; d < dim; ++d) g[d] += st.d1[k][d] * v;
      for (int c = 0; c < 6; ++c) habs[c] += std::abs(st.d2[k][c] * v);
    }
    Scalar g2 = 0;
    for (int d = 0; d < dim; ++d) g2 += g[d] * g[d];
    Scalar mag = lambda * (g2 + 1);
    for (int d = 0; d < dim; ++d) mag += (1 + g2) * habs[d] + g[d] * g[d] * habs[d];
    for (int da = 0; da < dim; ++da)
      for (int db = da + 1; db < dim; ++db)
        mag += 2 * std::abs(g[da] * g[db]) * habs[hessian_packed_column(da, db)];
    worst = std::max(worst, mag);
  }
  return std::numeric_limits<Scalar>::epsilon() * worst;
}

template <typename Scalar>
struct LinearSolver {
  bool use_direct;
  Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
  Eigen::BiCGSTAB<Eigen::SparseMatrix<Scalar>, Eigen::IncompleteLUT<Scalar>> krylov;
  bool pattern_ready = false;

  explicit LinearSolver(int dim) : use_direct(dim <= 2) {
    if (!use_direct) {
      krylov.preconditioner().setDroptol(Scalar(1e-3));
      krylov.preconditioner().setFillfactor(6);
    }
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solve(const Eigen::SparseMatrix<Scalar>& J,
                                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& rhs,
                                                 Scalar rel_tol) {
    if (use_direct) {
      if (!pattern_ready) {
        lu.analyzePattern(J);
        pattern_ready = true;
      }
      lu.factorize(J);
      if (lu.info() != Eigen::Success) throw AccuracyError("sparse factorization failed");
      return lu.solve(rhs);
    }
    krylov.setTolerance(rel_tol);
    krylov.setMaxIterations(2000);
    krylov.compute(J);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x = krylov.solve(rhs);
    if (krylov.info() != Eigen::Success && krylov.error() > 100 * rel_tol)
      throw AccuracyError("Krylov linear solve did not converge");
    return x;
  }
};

enum class NewtonOutcome { converged, at_floor, failed };

// One damped-Newton run at fixed lambda.  On failure the field holds the
// last accepted state.  `at_floor` means the iteration reached the roundoff
// floor of the residual evaluation before the requested tolerance.
template <typename Scalar>
NewtonOutcome newton_at_lambda(ScalarField<Scalar>& u, Scalar lambda,
                               const NewtonSettings<Scalar>& cfg, LinearSolver<Scalar>& linear,
                               LambdaStepTrace<Scalar>& trace) {
  const auto& m = *u.mask;
  auto res = residual(u, lambda);
  Scalar norm = interior_residual_norm(m, res);
  trace.residual_norms.push_back(norm);
  int slow_steps = 0;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (norm <= cfg.tolerance) return NewtonOutcome::converged;
    const auto J = linearize(u, lambda);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs(m.interior.size());
    for (std::size_t k = 0; k < m.interior.size(); ++k)
      rhs[Eigen::Index(k)] = -res[Eigen::Index(m.interior[k])];
    // Inexact-Newton forcing: loose Krylov solves far from the solution,
    // tightening to the configured floor as the residual drops.
    const Scalar rel =
        std::min(Scalar(1e-3), std::max(cfg.linear_tolerance, Scalar(0.01) * norm));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> step = linear.solve(J, rhs, rel);

    Scalar alpha = 1;
    bool accepted = false;
    ScalarField<Scalar> candidate = u;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      for (std::size_t k = 0; k < m.interior.size(); ++k)
        candidate[m.interior[k]] = u[m.interior[k]] + alpha * step[Eigen::Index(k)];
      auto cres = residual(candidate, lambda);
      const Scalar cnorm = interior_residual_norm(m, cres);
      if (cnorm <= (1 - cfg.armijo * alpha) * norm) {
        const bool slow = cnorm > Scalar(0.9) * norm;
        u = candidate;
        res.swap(cres);
        norm = cnorm;
        accepted = true;
        slow_steps = slow ? slow_steps + 1 : 0;
        break;
      }
      alpha /= 2;
    }
    trace.iterations = it + 1;
    trace.residual_norms.push_back(norm);
    if (!accepted || slow_steps >= 5) {
      // Stalled in evaluation noise, or genuinely creeping far from the
      // solution; the caller bisects the continuation step in the latter case.
      if (norm <= std::min(Scalar(1e-4), 64 * residual_noise_floor(u, lambda)))
        return NewtonOutcome::at_floor;
      return NewtonOutcome::failed;
    }
  }
  if (norm <= cfg.tolerance) return NewtonOutcome::converged;
  return norm <= std::min(Scalar(1e-4), 64 * residual_noise_floor(u, lambda))
             ? NewtonOutcome::at_floor
             : NewtonOutcome::failed;
}

template <typename Scalar>
bool strip_half_width_of(const Domain<Scalar>& dom, Scalar* b) {
  if (const auto* r = std::get_if<Rectangle<Scalar>>(&dom)) {
    *b = r->half_width;
    return true;
  }
  if (const auto* s = std::get_if<EllipsoidSlab<Scalar>>(&dom)) {
    *b = s->half_width;
    return true;
  }
  return false;
}

template <typename Scalar>
void check_bowl_barrier(const ScalarField<Scalar>& u, SolveReport<Scalar>& report) {
  const auto& m = *u.mask;
  const Vec3<Scalar> half = domain_half_extent(m.domain);
  Scalar rho2 = 0;
  for (int d = 0; d < m.grid.dim; ++d) rho2 += half[d] * half[d];
  const Scalar rho = std::sqrt(rho2);
  const auto profile = bowl_profile<Scalar>(m.grid.dim, rho * Scalar(1.01), Scalar(1e-2),
                                            Scalar(1e-4));
  Scalar at_rho;
  profile.eval(rho, &at_rho, nullptr, nullptr);
  for (NodeIndex id : m.interior) {
    const Vec3<Scalar> x = m.grid.position(id);
    Scalar r = 0;
    for (int d = 0; d < m.grid.dim; ++d) r += x[d] * x[d];
    r = std::sqrt(r);
    Scalar bowl_val;
    profile.eval(r, &bowl_val, nullptr, nullptr);
    if (u[id] > bowl_val - at_rho + Scalar(1e-6)) {
      report.barrier_ok = false;
      return;
    }
  }
}

}  // namespace detail

// Dirichlet solve with zero boundary data by continuation in lambda from the
// zero field.  Even symmetries are exploited by solving on the reduced
// octant and reflecting back.  An optional warm start (on the same full
// grid) is tried directly at lambda = 1 before falling back to the schedule.
template <typename Scalar>
std::pair<ScalarField<Scalar>, SolveReport<Scalar>> solve_dirichlet(
    std::shared_ptr<const DomainMask<Scalar>> mask, const ContinuationSchedule<Scalar>& schedule,
    const NewtonSettings<Scalar>& settings, SymmetryFlags symmetry = {},
    const ScalarField<Scalar>* warm_start = nullptr) {
  schedule.validate();
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport<Scalar> report;
  {
    Scalar b;
    if (detail::strip_half_width_of(mask->domain, &b))
      report.near_critical_width = std::abs(double(b - kPi / 2)) < 1e-3;
  }

  // Reduce to the flagged octant (no-op mask reuse when nothing is flagged).
  std::shared_ptr<const DomainMask<Scalar>> work_mask = mask;
  ScalarField<Scalar> u;
  if (symmetry.any()) {
    ScalarField<Scalar> zero(mask);
    u = reduce_to_octant(zero, symmetry);
    work_mask = u.mask;
  } else {
    u = ScalarField<Scalar>(mask);
  }

  detail::LinearSolver<Scalar> linear(work_mask->grid.dim);

  bool solved = false;
  if (warm_start) {
    ScalarField<Scalar> guess =
        symmetry.any() ? reduce_to_octant(*warm_start, symmetry) : *warm_start;
    LambdaStepTrace<Scalar> trace;
    trace.lambda = 1;
    const auto outcome = detail::newton_at_lambda(guess, Scalar(1), settings, linear, trace);
    if (outcome != detail::NewtonOutcome::failed) {
      u = guess;
      report.steps.push_back(std::move(trace));
      report.at_roundoff_floor = outcome == detail::NewtonOutcome::at_floor;
      solved = true;
    }
  }

  if (!solved) {
    for (NodeIndex id = 0; id < u.total(); ++id) u[id] = 0;
    std::vector<Scalar> pending(schedule.lambdas.rbegin(), schedule.lambdas.rend());
    Scalar reached = 0;
    int bisections = 0;
    // Secant predictor state across accepted continuation steps.
    ScalarField<Scalar> prev = u;
    Scalar prev_lambda = 0;
    bool have_prev = false;
    while (!pending.empty()) {
      const Scalar target = pending.back();
      LambdaStepTrace<Scalar> trace;
      trace.lambda = target;
      ScalarField<Scalar> attempt = u;
      if (have_prev && reached > prev_lambda) {
        const Scalar ratio = (target - reached) / (reached - prev_lambda);
        attempt.values = u.values + ratio * (u.values - prev.values);
      }
      auto outcome = detail::newton_at_lambda(attempt, target, settings, linear, trace);
      if (outcome == detail::NewtonOutcome::failed && have_prev) {
        // Retry from the unextrapolated state before bisecting.
        trace.residual_norms.clear();
        trace.iterations = 0;
        attempt = u;
        outcome = detail::newton_at_lambda(attempt, target, settings, linear, trace);
      }
      if (outcome != detail::NewtonOutcome::failed) {
        prev = u;
        prev_lambda = reached;
        have_prev = true;
        u = attempt;
        reached = target;
        report.steps.push_back(std::move(trace));
        if (target >= Scalar(1) - Scalar(1e-12))
          report.at_roundoff_floor = outcome == detail::NewtonOutcome::at_floor;
        pending.pop_back();
        continue;
      }
      report.steps.push_back(std::move(trace));
      if (++bisections > schedule.max_bisections) {
        report.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        throw SolverError<Scalar>("Newton diverged during continuation", report);
      }
      pending.push_back((reached + target) / 2);
    }
  }

  ScalarField<Scalar> full = symmetry.any() ? reflect_full(u) : u;
  if (symmetry.any() && !mask->reduced.any()) full.mask = mask;  // identical layout

  const auto res = residual(full, Scalar(1));
  report.final_residual = detail::interior_residual_norm(*full.mask, res);
  const Scalar accept =
      std::max(settings.tolerance * Scalar(1.01),
               64 * detail::residual_noise_floor(full, Scalar(1)));
  report.converged = report.final_residual <= accept;
  report.at_roundoff_floor = report.final_residual > settings.tolerance * Scalar(1.01);
  NodeIndex argmax;
  report.max_value = full.max_interior(&argmax);
  report.max_location = full.mask->grid.position(argmax);

  if (settings.check_positivity) {
    const Scalar floor = -std::max(Scalar(1e-12), 10 * settings.tolerance);
    if (full.min_interior() < floor) {
      report.positivity_ok = false;
      report.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      throw SolverError<Scalar>("converged solution violates interior positivity", report);
    }
  }
  if (settings.check_bowl_barrier) {
    detail::check_bowl_barrier(full, report);
    if (!report.barrier_ok) {
      report.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      throw SolverError<Scalar>("solution exceeds the bowl upper barrier", report);
    }
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(full), std::move(report)};
}

// Discrete translator residual of a sampled closed form.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> residual_of_closed_form(
    const ClosedFormSurface<Scalar>& surface, std::shared_ptr<const DomainMask<Scalar>> mask) {
  const auto f = sample_surface(surface, std::move(mask));
  return residual(f, Scalar(1));
}

}  // namespace translator
