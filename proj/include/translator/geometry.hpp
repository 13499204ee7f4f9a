#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "translator/grid.hpp"
#include "translator/operators.hpp"

namespace translator {

// Slope function v = sqrt(1 + |Du|^2) at interior nodes (1 elsewhere).
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> slope_v(const ScalarField<Scalar>& f) {
  const auto g = gradient(f);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> v =
      Eigen::Array<Scalar, Eigen::Dynamic, 1>::Ones(f.total());
  for (NodeIndex id : f.mask->interior)
    v[Eigen::Index(id)] = std::sqrt(1 + g.row(Eigen::Index(id)).square().sum());
  return v;
}

// Gauss-Kronecker curvature of the graph: det(D^2 u) / (1+|Du|^2)^{(dim+2)/2}.
// In two variables this is det(D^2 u) / (1+|Du|^2)^2.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> gauss_curvature(const ScalarField<Scalar>& f) {
  const int dim = f.dim();
  const auto g = gradient(f);
  const auto H = hessian(f);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> K =
      Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(f.total());
  for (NodeIndex id : f.mask->interior) {
    const auto A = hessian_at(H, id, dim);
    Scalar det = 1;
    if (dim == 1)
      det = A(0, 0);
    else if (dim == 2)
      det = A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
    else
      det = A.template topLeftCorner<3, 3>().determinant();
    const Scalar v2 = 1 + g.row(Eigen::Index(id)).square().sum();
    K[Eigen::Index(id)] = det / std::pow(v2, Scalar(dim + 2) / 2);
  }
  return K;
}

// Divergence-form residual div(Du / v) + 1/v via face fluxes on the staggered
// midpoints.  An independent discretization path from the nondivergence
// operator; agrees with it to O(h^2) on smooth translators.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 1> mean_curvature_residual(const ScalarField<Scalar>& f) {
  const auto& m = *f.mask;
  const int dim = m.grid.dim;
  const auto g = gradient(f);
  Eigen::Array<Scalar, Eigen::Dynamic, 1> res =
      Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(f.total());

  // Flux through the face between p and its (possibly shortened) neighbor
  // along axis d.  Transverse slope components are averaged from the node
  // gradients where both are interior, else taken one-sided.
  const auto face_flux = [&](NodeIndex p, const MultiIndex& mi, int d, int sign,
                             Scalar* arm) -> Scalar {
    const NodeIndex q = m.neighbor(mi, d, sign);
    const Scalar h = m.grid.spacing[d];
    const Scalar a = (m.cls(q) == NodeClass::boundary) ? m.fraction[std::size_t(q)][d] * h : h;
    *arm = a;
    const Scalar normal_slope = Scalar(sign) * (f[q] - f[p]) / a;
    Scalar trans2 = 0;
    for (int e = 0; e < dim; ++e) {
      if (e == d) continue;
      const Scalar ge = m.is_interior(q)
                            ? (g(Eigen::Index(p), e) + g(Eigen::Index(q), e)) / 2
                            : g(Eigen::Index(p), e);
      trans2 += ge * ge;
    }
    const Scalar v = std::sqrt(1 + normal_slope * normal_slope + trans2);
    return normal_slope / v;
  };

  for (NodeIndex id : m.interior) {
    const MultiIndex mi = m.grid.unflatten(id);
    Scalar div = 0;
    for (int d = 0; d < dim; ++d) {
      Scalar arm_plus, arm_minus;
      const Scalar flux_plus = face_flux(id, mi, d, +1, &arm_plus);
      const Scalar flux_minus = face_flux(id, mi, d, -1, &arm_minus);
      div += (flux_plus - flux_minus) / ((arm_plus + arm_minus) / 2);
    }
    const Scalar v = std::sqrt(1 + g.row(Eigen::Index(id)).square().sum());
    res[Eigen::Index(id)] = div + 1 / v;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Apex spectrum: interior maximum refined by one quadratic fit over the
// 3^dim-node neighborhood.

template <typename Scalar = double>
struct ApexSpectrum {
  NodeIndex node = -1;
  Vec3<Scalar> node_position = Vec3<Scalar>::Zero();
  Vec3<Scalar> refined_position = Vec3<Scalar>::Zero();
  Vec3<Scalar> gradient = Vec3<Scalar>::Zero();     // fitted gradient at the node
  Eigen::Matrix<Scalar, 3, 3> hess = Eigen::Matrix<Scalar, 3, 3>::Zero();
  Vec3<Scalar> eigenvalues = Vec3<Scalar>::Zero();  // descending magnitude
  Vec3<Scalar> curvatures = Vec3<Scalar>::Zero();   // k_i = -eigenvalue_i
  Vec3<Scalar> axis_curvatures = Vec3<Scalar>::Zero();  // -hess(d, d)
  Scalar value = 0;
  Scalar trace() const { return hess(0, 0) + hess(1, 1) + hess(2, 2); }
  Scalar max_off_diagonal() const {
    Scalar w = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) w = std::max(w, std::abs(hess(a, b)));
    return w;
  }
};

template <typename Scalar>
ApexSpectrum<Scalar> apex_spectrum(const ScalarField<Scalar>& f) {
  const auto& m = *f.mask;
  const int dim = m.grid.dim;
  ApexSpectrum<Scalar> spec;
  spec.value = f.max_interior(&spec.node);
  if (spec.node < 0 || in_collar(m, spec.node, 2))
    throw UsageError("interior maximum sits on the boundary collar");
  spec.node_position = m.grid.position(spec.node);

  // Least-squares quadratic model over the 3^dim neighborhood.
  const MultiIndex mi = m.grid.unflatten(spec.node);
  const int n_terms = 1 + dim + dim * (dim + 1) / 2;
  const int n_pts = (dim == 1) ? 3 : (dim == 2) ? 9 : 27;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A(n_pts, n_terms);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> b(n_pts);
  int row = 0;
  MultiIndex off = MultiIndex::Zero();
  const auto visit = [&](auto&& self, int axis) -> void {
    if (axis == dim) {
      MultiIndex q = mi;
      for (int d = 0; d < dim; ++d) q[d] += off[d];
      for (int d = 0; d < dim; ++d)
        if (q[d] < 0 && m.reduced.even[d]) q[d] = -q[d];
      const NodeIndex idq = m.grid.flatten(q);
      Vec3<Scalar> dx = Vec3<Scalar>::Zero();
      for (int d = 0; d < dim; ++d) dx[d] = Scalar(off[d]) * m.grid.spacing[d];
      int c = 0;
      A(row, c++) = 1;
      for (int d = 0; d < dim; ++d) A(row, c++) = dx[d];
      for (int da = 0; da < dim; ++da)
        for (int db = da; db < dim; ++db)
          A(row, c++) = (da == db) ? dx[da] * dx[da] / 2 : dx[da] * dx[db];
      b[row] = f[idq];
      ++row;
      return;
    }
    for (int k = -1; k <= 1; ++k) {
      off[axis] = k;
      self(self, axis + 1);
    }
    off[axis] = 0;
  };
  visit(visit, 0);

  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coef =
      A.colPivHouseholderQr().solve(b);
  int c = 1;
  for (int d = 0; d < dim; ++d) spec.gradient[d] = coef[c++];
  for (int da = 0; da < dim; ++da)
    for (int db = da; db < dim; ++db) {
      spec.hess(da, db) = coef[c];
      spec.hess(db, da) = coef[c];
      ++c;
    }

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> es(
      spec.hess.template topLeftCorner(dim, dim));
  std::vector<Scalar> ev(es.eigenvalues().data(), es.eigenvalues().data() + dim);
  std::sort(ev.begin(), ev.end(),
            [](Scalar a, Scalar b) { return std::abs(a) > std::abs(b); });
  for (int d = 0; d < dim; ++d) {
    spec.eigenvalues[d] = ev[std::size_t(d)];
    spec.curvatures[d] = -ev[std::size_t(d)];
    spec.axis_curvatures[d] = -spec.hess(d, d);
  }

  // Refined apex: one Newton step of the quadratic model.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gd(dim);
  for (int d = 0; d < dim; ++d) gd[d] = spec.gradient[d];
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> shift =
      spec.hess.template topLeftCorner(dim, dim).fullPivLu().solve(gd);
  spec.refined_position = spec.node_position;
  for (int d = 0; d < dim; ++d) spec.refined_position[d] -= shift[d];
  return spec;
}

// ---------------------------------------------------------------------------
// Discrete audit of the eta*v interior maximum principle: for an affine,
// height-independent eta, eta*v admits no strict interior local maximum
// where eta > 0.

template <typename Scalar = double>
struct AffineWeight {
  Scalar constant = 0;
  Vec3<Scalar> linear = Vec3<Scalar>::Zero();
  Scalar operator()(const Vec3<Scalar>& x) const {
    return constant + (linear * x).sum();
  }
};

template <typename Scalar = double>
struct EtaVAuditResult {
  bool pass = true;
  int violations = 0;
  Scalar worst_excess = 0;            // beyond the O(h^2) slack
  Vec3<Scalar> worst_location = Vec3<Scalar>::Zero();
  Scalar slack = 0;
  NodeIndex scanned = 0;
};

template <typename Scalar>
EtaVAuditResult<Scalar> eta_v_max_audit(const ScalarField<Scalar>& f,
                                        const AffineWeight<Scalar>& eta) {
  const auto& m = *f.mask;
  const int dim = m.grid.dim;
  const auto v = slope_v(f);
  Scalar vmax = 1;
  for (NodeIndex id : m.interior) vmax = std::max(vmax, v[Eigen::Index(id)]);
  Scalar h2 = 0;
  for (int d = 0; d < dim; ++d)
    h2 = std::max(h2, m.grid.spacing[d] * m.grid.spacing[d]);
  EtaVAuditResult<Scalar> out;
  out.slack = 10 * h2 * (1 + vmax * vmax);

  for (NodeIndex id : m.interior) {
    if (in_collar(m, id, 1)) continue;  // needs the full interior neighborhood
    const Vec3<Scalar> x = m.grid.position(id);
    const Scalar eta_here = eta(x);
    if (!(eta_here > 0)) continue;
    ++out.scanned;
    const Scalar center = eta_here * v[Eigen::Index(id)];
    const MultiIndex mi = m.grid.unflatten(id);
    Scalar weakest_margin = std::numeric_limits<Scalar>::infinity();
    MultiIndex off = MultiIndex::Zero();
    bool strict_max = true;
    const auto visit = [&](auto&& self, int axis) -> void {
      if (!strict_max) return;
      if (axis == dim) {
        if (off[0] == 0 && off[1] == 0 && off[2] == 0) return;
        MultiIndex q = mi;
        for (int d = 0; d < dim; ++d) {
          q[d] += off[d];
          if (q[d] < 0 && m.reduced.even[d]) q[d] = -q[d];
        }
        const NodeIndex idq = m.grid.flatten(q);
        const Scalar neigh = eta(m.grid.position(idq)) * v[Eigen::Index(idq)];
        weakest_margin = std::min(weakest_margin, center - neigh);
        if (center - neigh <= out.slack) strict_max = false;
        return;
      }
      for (int k = -1; k <= 1 && strict_max; ++k) {
        off[axis] = k;
        self(self, axis + 1);
      }
      off[axis] = 0;
    };
    visit(visit, 0);
    if (strict_max) {
      ++out.violations;
      if (weakest_margin - out.slack > out.worst_excess) {
        out.worst_excess = weakest_margin - out.slack;
        out.worst_location = x;
      }
    }
  }
  out.pass = out.violations == 0;
  return out;
}

}  // namespace translator
