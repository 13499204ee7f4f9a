#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>

#include "translator/grid.hpp"

namespace translator {

// Three-point stencil along one axis at an interior node.  Arms toward a
// boundary-adjacent neighbor are shortened to the analytic crossing
// (Shortley-Weller); reflection at reduced axes is already resolved, so a
// mirrored arm may point back at the +side node.
template <typename Scalar>
struct AxisStencil {
  NodeIndex left = -1, right = -1;
  Scalar w1_left, w1_center, w1_right;  // first derivative weights
  Scalar w2_left, w2_center, w2_right;  // second derivative weights
};

template <typename Scalar>
AxisStencil<Scalar> axis_stencil(const DomainMask<Scalar>& m, const MultiIndex& mi, int axis) {
  AxisStencil<Scalar> s;
  const Scalar h = m.grid.spacing[axis];
  s.left = m.neighbor(mi, axis, -1);
  s.right = m.neighbor(mi, axis, +1);
  const Scalar a = (m.cls(s.left) == NodeClass::boundary)
                       ? m.fraction[std::size_t(s.left)][axis] * h
                       : h;
  const Scalar c = (m.cls(s.right) == NodeClass::boundary)
                       ? m.fraction[std::size_t(s.right)][axis] * h
                       : h;
  s.w1_left = -c / (a * (a + c));
  s.w1_right = a / (c * (a + c));
  s.w1_center = (c - a) / (a * c);
  s.w2_left = Scalar(2) / (a * (a + c));
  s.w2_right = Scalar(2) / (c * (a + c));
  s.w2_center = Scalar(-2) / (a * c);
  return s;
}

// Cross-derivative stencil: the average of the one-sided quadrant estimates
// over every quadrant whose three stencil nodes carry trustworthy values.
// With all four quadrants available this is exactly the centred four-point
// stencil; near boundaries it degrades to first order, and the averaging
// keeps the stencil equivariant under the grid reflections the octant
// reduction relies on.  A value is trustworthy at interior nodes and at
// boundary-adjacent nodes sitting on the analytic boundary itself;
// off-boundary carrier nodes hold data for a shifted location and would
// pollute an O(1/h)-weighted stencil.
template <typename Scalar>
struct CrossStencil {
  static constexpr int kMax = 9;
  int count = 0;
  NodeIndex node[kMax];
  Scalar weight[kMax];
  Scalar w_center = 0;

  int slot(NodeIndex id) {
    for (int k = 0; k < count; ++k)
      if (node[k] == id) return k;
    node[count] = id;
    weight[count] = 0;
    return count++;
  }
};

namespace detail {
template <typename Scalar>
bool cross_usable(const DomainMask<Scalar>& m, NodeIndex id) {
  if (id < 0) return false;
  if (m.cls(id) == NodeClass::interior) return true;
  return m.cls(id) == NodeClass::boundary && m.on_boundary[std::size_t(id)];
}
}  // namespace detail

template <typename Scalar>
CrossStencil<Scalar> cross_stencil(const DomainMask<Scalar>& m, const MultiIndex& mi, int da,
                                   int db) {
  CrossStencil<Scalar> s;
  const Scalar ha = m.grid.spacing[da], hb = m.grid.spacing[db];
  struct Quadrant {
    NodeIndex qa, qb, qab;
    Scalar sign;
  };
  Quadrant usable[4];
  int n_usable = 0;
  for (int sa = -1; sa <= 1; sa += 2)
    for (int sb = -1; sb <= 1; sb += 2) {
      const NodeIndex qa = m.neighbor(mi, da, sa);
      const NodeIndex qb = m.neighbor(mi, db, sb);
      const NodeIndex qab = m.neighbor2(mi, da, sa, db, sb);
      if (!detail::cross_usable(m, qa) || !detail::cross_usable(m, qb) ||
          !detail::cross_usable(m, qab))
        continue;
      usable[n_usable++] = {qa, qb, qab, Scalar(sa * sb)};
    }
  if (n_usable == 0) return s;  // cross term treated as 0
  const Scalar w = Scalar(1) / (Scalar(n_usable) * ha * hb);
  for (int k = 0; k < n_usable; ++k) {
    const auto& q = usable[k];
    s.weight[s.slot(q.qab)] += q.sign * w;
    s.weight[s.slot(q.qa)] -= q.sign * w;
    s.weight[s.slot(q.qb)] -= q.sign * w;
    s.w_center += q.sign * w;
  }
  return s;
}

// Gradient at interior nodes (rows elsewhere are zero).  Columns are the
// dim components.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 3> gradient(const ScalarField<Scalar>& f) {
  const auto& m = *f.mask;
  Eigen::Array<Scalar, Eigen::Dynamic, 3> g =
      Eigen::Array<Scalar, Eigen::Dynamic, 3>::Zero(m.total(), 3);
  for (NodeIndex id : m.interior) {
    const MultiIndex mi = m.grid.unflatten(id);
    for (int d = 0; d < m.grid.dim; ++d) {
      const auto st = axis_stencil(m, mi, d);
      g(Eigen::Index(id), d) = st.w1_left * f[st.left] + st.w1_center * f[id] +
                               st.w1_right * f[st.right];
    }
  }
  return g;
}

// Symmetric Hessian at interior nodes, packed as columns
// (xx, yy, zz, xy, xz, yz); unused columns stay zero.
template <typename Scalar>
Eigen::Array<Scalar, Eigen::Dynamic, 6> hessian(const ScalarField<Scalar>& f) {
  const auto& m = *f.mask;
  Eigen::Array<Scalar, Eigen::Dynamic, 6> H =
      Eigen::Array<Scalar, Eigen::Dynamic, 6>::Zero(m.total(), 6);
  for (NodeIndex id : m.interior) {
    const MultiIndex mi = m.grid.unflatten(id);
    for (int d = 0; d < m.grid.dim; ++d) {
      const auto st = axis_stencil(m, mi, d);
      H(Eigen::Index(id), d) =
          st.w2_left * f[st.left] + st.w2_center * f[id] + st.w2_right * f[st.right];
    }
    int col = 3;
    for (int da = 0; da < m.grid.dim; ++da)
      for (int db = da + 1; db < m.grid.dim; ++db, ++col) {
        const auto cs = cross_stencil(m, mi, da, db);
        Scalar v = cs.w_center * f[id];
        for (int k = 0; k < cs.count; ++k) v += cs.weight[k] * f[cs.node[k]];
        H(Eigen::Index(id), col) = v;
      }
  }
  return H;
}

inline int hessian_packed_column(int da, int db) {
  if (da == db) return da;
  const int lo = std::min(da, db), hi = std::max(da, db);
  if (lo == 0) return hi == 1 ? 3 : 4;
  return 5;  // (1,2)
}

template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> hessian_at(const Eigen::Array<Scalar, Eigen::Dynamic, 6>& H,
                                       NodeIndex id, int dim) {
  Eigen::Matrix<Scalar, 3, 3> A = Eigen::Matrix<Scalar, 3, 3>::Zero();
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b) A(a, b) = H(Eigen::Index(id), hessian_packed_column(a, b));
  return A;
}

// True when the node is within `collar` cells (Chebyshev distance) of any
// non-interior node.  Reflection on reduced axes applies.
template <typename Scalar>
bool in_collar(const DomainMask<Scalar>& m, NodeIndex id, int collar) {
  if (collar <= 0) return false;
  const MultiIndex mi = m.grid.unflatten(id);
  const int dim = m.grid.dim;
  MultiIndex probe = mi;
  const auto sweep = [&](int axis, auto&& self) -> bool {
    if (axis == dim) {
      MultiIndex q = probe;
      for (int d = 0; d < dim; ++d)
        if (q[d] < 0 && m.reduced.even[d]) q[d] = -q[d];
      if (!m.grid.contains(q)) return true;
      return m.cls(m.grid.flatten(q)) != NodeClass::interior;
    }
    for (int k = -collar; k <= collar; ++k) {
      probe[axis] = mi[axis] + k;
      if (self(axis + 1, self)) return true;
    }
    probe[axis] = mi[axis];
    return false;
  };
  return sweep(0, sweep);
}

template <typename Scalar>
Scalar max_interior_abs(const DomainMask<Scalar>& m,
                        const Eigen::Array<Scalar, Eigen::Dynamic, 1>& a, int collar = 0,
                        NodeIndex* arg = nullptr) {
  Scalar best = 0;
  NodeIndex best_id = -1;
  for (NodeIndex id : m.interior) {
    if (collar > 0 && in_collar(m, id, collar)) continue;
    const Scalar v = std::abs(a[Eigen::Index(id)]);
    if (v > best) {
      best = v;
      best_id = id;
    }
  }
  if (arg) *arg = best_id;
  return best;
}

}  // namespace translator
