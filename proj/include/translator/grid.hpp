#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "translator/errors.hpp"

namespace translator {

using NodeIndex = std::int64_t;

template <typename Scalar = double>
using Vec3 = Eigen::Array<Scalar, 3, 1>;

using MultiIndex = Eigen::Array<int, 3, 1>;

// Even-reflection symmetry per axis.  A flag may only be set for an axis
// whose extent is symmetric about 0 (or already reduced to [0, hi]).
struct SymmetryFlags {
  std::array<bool, 3> even{false, false, false};

  static SymmetryFlags all_even(int dim) {
    SymmetryFlags f;
    for (int d = 0; d < dim; ++d) f.even[d] = true;
    return f;
  }
  bool any() const { return even[0] || even[1] || even[2]; }
};

// Uniform tensor grid.  Node counts are odd so that the origin of a
// symmetric extent is a grid node.  Axes >= dim hold a single node.
template <typename Scalar = double>
struct GridSpec {
  int dim = 2;
  Vec3<Scalar> lo = Vec3<Scalar>::Zero();
  Vec3<Scalar> hi = Vec3<Scalar>::Zero();
  MultiIndex nodes = MultiIndex::Ones();
  Vec3<Scalar> spacing = Vec3<Scalar>::Ones();

  static GridSpec box(int dim, const Vec3<Scalar>& lo, const Vec3<Scalar>& hi,
                      const MultiIndex& nodes) {
    if (dim < 1 || dim > 3) throw ConfigError("grid dim must be 1, 2 or 3");
    GridSpec g;
    g.dim = dim;
    g.lo = lo;
    g.hi = hi;
    g.nodes = nodes;
    for (int d = 0; d < dim; ++d) {
      if (!(hi[d] > lo[d])) throw ConfigError("grid extent must be nonempty");
      const bool symmetric =
          std::abs(double(lo[d] + hi[d])) <= 1e-12 * std::max(1.0, double(hi[d] - lo[d]));
      if (nodes[d] < (symmetric ? 3 : 2))
        throw ConfigError("grid needs at least 3 nodes per axis");
      if (symmetric && nodes[d] % 2 == 0)
        throw ConfigError("grid node counts must be odd so the origin is a node");
      g.spacing[d] = (hi[d] - lo[d]) / Scalar(nodes[d] - 1);
    }
    for (int d = dim; d < 3; ++d) {
      g.nodes[d] = 1;
      g.lo[d] = g.hi[d] = Scalar(0);
      g.spacing[d] = Scalar(1);
    }
    return g;
  }

  // Symmetric box [-half, half]^dim with spacing as close to target_h as the
  // odd node count allows (per axis, exact fit of the extent).
  static GridSpec symmetric(int dim, const Vec3<Scalar>& half, Scalar target_h) {
    if (!(target_h > 0)) throw ConfigError("grid spacing must be positive");
    MultiIndex n = MultiIndex::Ones();
    Vec3<Scalar> lo = Vec3<Scalar>::Zero(), hi = Vec3<Scalar>::Zero();
    for (int d = 0; d < dim; ++d) {
      const long half_cells = std::max<long>(1, std::lround(double(half[d] / target_h)));
      n[d] = int(2 * half_cells + 1);
      lo[d] = -half[d];
      hi[d] = half[d];
    }
    return box(dim, lo, hi, n);
  }

  NodeIndex total() const {
    return NodeIndex(nodes[0]) * NodeIndex(nodes[1]) * NodeIndex(nodes[2]);
  }

  // Flat index is lexicographic in the node multi-index: axis 0 slowest.
  NodeIndex flatten(const MultiIndex& mi) const {
    return (NodeIndex(mi[0]) * nodes[1] + mi[1]) * nodes[2] + mi[2];
  }
  MultiIndex unflatten(NodeIndex id) const {
    MultiIndex mi;
    mi[2] = int(id % nodes[2]);
    id /= nodes[2];
    mi[1] = int(id % nodes[1]);
    mi[0] = int(id / nodes[1]);
    return mi;
  }

  Vec3<Scalar> position(const MultiIndex& mi) const {
    Vec3<Scalar> x = lo;
    for (int d = 0; d < 3; ++d) x[d] += Scalar(mi[d]) * spacing[d];
    for (int d = dim; d < 3; ++d) x[d] = Scalar(0);
    return x;
  }
  Vec3<Scalar> position(NodeIndex id) const { return position(unflatten(id)); }

  bool contains(const MultiIndex& mi) const {
    for (int d = 0; d < 3; ++d)
      if (mi[d] < 0 || mi[d] >= nodes[d]) return false;
    return true;
  }

  bool symmetric_about_origin(int axis) const {
    const Scalar len = hi[axis] - lo[axis];
    return std::abs(double(lo[axis] + hi[axis])) <= 1e-12 * std::max(1.0, double(len));
  }
};

// ---------------------------------------------------------------------------
// Domain descriptors.  All three families are even in every coordinate.

template <typename Scalar = double>
struct Rectangle {
  Scalar half_length;  // x extent [-L, L]
  Scalar half_width;   // y extent [-b, b]
};

// { x : sum_i a_i x_i^2 <= R^2 }, all a_i > 0.
template <typename Scalar = double>
struct Ellipsoid {
  int n = 2;
  Vec3<Scalar> coeff = Vec3<Scalar>::Zero();
  Scalar radius = Scalar(1);

  Scalar semi_axis(int d) const { return radius / std::sqrt(coeff[d]); }
};

// E(a, R) x [-b, b]; the slab coordinate is axis `n` (total dim n + 1).
template <typename Scalar = double>
struct EllipsoidSlab {
  Ellipsoid<Scalar> cross_section;
  Scalar half_width;
};

template <typename Scalar = double>
using Domain = std::variant<Rectangle<Scalar>, Ellipsoid<Scalar>, EllipsoidSlab<Scalar>>;

template <typename Scalar>
int domain_dim(const Domain<Scalar>& dom) {
  if (std::holds_alternative<Rectangle<Scalar>>(dom)) return 2;
  if (const auto* e = std::get_if<Ellipsoid<Scalar>>(&dom)) return e->n;
  return std::get<EllipsoidSlab<Scalar>>(dom).cross_section.n + 1;
}

template <typename Scalar>
void validate_domain(const Domain<Scalar>& dom) {
  if (const auto* r = std::get_if<Rectangle<Scalar>>(&dom)) {
    if (!(r->half_length > 0) || !(r->half_width > 0))
      throw ConfigError("rectangle requires L > 0 and b > 0");
  } else if (const auto* e = std::get_if<Ellipsoid<Scalar>>(&dom)) {
    if (e->n < 1 || e->n > 3) throw ConfigError("ellipsoid dimension must be 1, 2 or 3");
    if (!(e->radius > 0)) throw ConfigError("ellipsoid requires R > 0");
    for (int d = 0; d < e->n; ++d)
      if (!(e->coeff[d] > 0))
        throw ConfigError(
            "ellipsoid coefficients must be positive; drop zero entries and "
            "dimension-reduce first");
  } else {
    const auto& s = std::get<EllipsoidSlab<Scalar>>(dom);
    validate_domain(Domain<Scalar>(s.cross_section));
    if (!(s.half_width > 0)) throw ConfigError("slab requires b > 0");
    if (s.cross_section.n + 1 > 3) throw ConfigError("slab total dimension must be <= 3");
  }
}

template <typename Scalar>
Scalar domain_scale(const Domain<Scalar>& dom) {
  if (const auto* r = std::get_if<Rectangle<Scalar>>(&dom))
    return std::max(r->half_length, r->half_width);
  if (const auto* e = std::get_if<Ellipsoid<Scalar>>(&dom)) {
    Scalar s = 0;
    for (int d = 0; d < e->n; ++d) s = std::max(s, e->semi_axis(d));
    return s;
  }
  const auto& s = std::get<EllipsoidSlab<Scalar>>(dom);
  return std::max(domain_scale(Domain<Scalar>(s.cross_section)), s.half_width);
}

// Signed inside test: negative strictly inside, zero on the boundary.
template <typename Scalar>
Scalar domain_level(const Domain<Scalar>& dom, const Vec3<Scalar>& x) {
  if (const auto* r = std::get_if<Rectangle<Scalar>>(&dom)) {
    return std::max(std::abs(x[0]) - r->half_length, std::abs(x[1]) - r->half_width);
  }
  if (const auto* e = std::get_if<Ellipsoid<Scalar>>(&dom)) {
    Scalar q = -e->radius * e->radius;
    for (int d = 0; d < e->n; ++d) q += e->coeff[d] * x[d] * x[d];
    return q;
  }
  const auto& s = std::get<EllipsoidSlab<Scalar>>(dom);
  Scalar q = -s.cross_section.radius * s.cross_section.radius;
  for (int d = 0; d < s.cross_section.n; ++d) q += s.cross_section.coeff[d] * x[d] * x[d];
  return std::max(q, std::abs(x[s.cross_section.n]) - s.half_width);
}

// Scale of domain_level units (lengths for rectangles, squared lengths for
// ellipsoids) for roundoff snapping.
template <typename Scalar>
Scalar domain_level_scale(const Domain<Scalar>& dom) {
  if (const auto* e = std::get_if<Ellipsoid<Scalar>>(&dom))
    return std::max(Scalar(1), e->radius * e->radius);
  if (const auto* s = std::get_if<EllipsoidSlab<Scalar>>(&dom))
    return std::max(std::max(Scalar(1), s->half_width),
                    s->cross_section.radius * s->cross_section.radius);
  return std::max(Scalar(1), domain_scale(dom));
}

template <typename Scalar>
bool domain_inside(const Domain<Scalar>& dom, const Vec3<Scalar>& x) {
  // Points sitting on the boundary (within roundoff) count as boundary, not
  // inside, so node-aligned rectangle edges classify as boundary-adjacent.
  const Scalar snap = Scalar(1e-10) * domain_level_scale(dom);
  return domain_level(dom, x) < -snap;
}

template <typename Scalar>
bool domain_on_boundary(const Domain<Scalar>& dom, const Vec3<Scalar>& x) {
  const Scalar snap = Scalar(1e-10) * domain_level_scale(dom);
  return std::abs(domain_level(dom, x)) <= snap;
}

// Bounding half-extents of the closed domain (all families are origin-centred).
template <typename Scalar>
Vec3<Scalar> domain_half_extent(const Domain<Scalar>& dom) {
  Vec3<Scalar> half = Vec3<Scalar>::Zero();
  if (const auto* r = std::get_if<Rectangle<Scalar>>(&dom)) {
    half[0] = r->half_length;
    half[1] = r->half_width;
  } else if (const auto* e = std::get_if<Ellipsoid<Scalar>>(&dom)) {
    for (int d = 0; d < e->n; ++d) half[d] = e->semi_axis(d);
  } else {
    const auto& s = std::get<EllipsoidSlab<Scalar>>(dom);
    for (int d = 0; d < s.cross_section.n; ++d) half[d] = s.cross_section.semi_axis(d);
    half[s.cross_section.n] = s.half_width;
  }
  return half;
}

// Distance (in units of length, not spacing) from an inside point x to the
// domain boundary along +-axis.  Requires that x is inside and x + t*step*e_d
// exits the domain for some t in (0, max_t].
template <typename Scalar>
Scalar axis_crossing(const Domain<Scalar>& dom, const Vec3<Scalar>& x, int axis, int sign) {
  if (const auto* r = std::get_if<Rectangle<Scalar>>(&dom)) {
    const Scalar bound = (axis == 0) ? r->half_length : r->half_width;
    return sign > 0 ? bound - x[axis] : x[axis] + bound;
  }
  const Ellipsoid<Scalar>* e = std::get_if<Ellipsoid<Scalar>>(&dom);
  if (const auto* s = std::get_if<EllipsoidSlab<Scalar>>(&dom)) {
    if (axis == s->cross_section.n)
      return sign > 0 ? s->half_width - x[axis] : x[axis] + s->half_width;
    e = &s->cross_section;
  }
  // a*(x+t)^2 = R^2 - q_rest ; solve the quadratic for the outward root.
  const Scalar a = e->coeff[axis];
  Scalar rest = -e->radius * e->radius;
  for (int d = 0; d < e->n; ++d)
    if (d != axis) rest += e->coeff[d] * x[d] * x[d];
  const Scalar rhs = -rest;  // a*(x_axis + t)^2 = rhs
  if (!(rhs > 0)) return Scalar(0);
  const Scalar root = std::sqrt(rhs / a);
  return sign > 0 ? root - x[axis] : x[axis] + root;
}

// ---------------------------------------------------------------------------
// Node classification with embedded-boundary fractions.

enum class NodeClass : unsigned char { exterior = 0, boundary = 1, interior = 2 };

template <typename Scalar = double>
struct DomainMask {
  GridSpec<Scalar> grid;
  Domain<Scalar> domain;
  // Axes solved on a half extent [0, hi] with even reflection at index 0.
  SymmetryFlags reduced;

  std::vector<NodeClass> node_class;
  // For boundary-adjacent nodes: fraction (0,1] of the spacing, measured from
  // the adjacent inside node, at which the analytic boundary is crossed.
  std::vector<Vec3<Scalar>> fraction;
  // Boundary-adjacent nodes whose position lies on the analytic boundary
  // itself (node-aligned edges, corners); their stored value is exact data.
  std::vector<char> on_boundary;
  std::vector<NodeIndex> interior;       // interior nodes, ascending
  std::vector<NodeIndex> interior_rank;  // node -> unknown index, or -1

  NodeIndex total() const { return grid.total(); }
  NodeClass cls(NodeIndex id) const { return node_class[std::size_t(id)]; }
  bool is_interior(NodeIndex id) const { return cls(id) == NodeClass::interior; }
  bool is_exterior(NodeIndex id) const { return cls(id) == NodeClass::exterior; }

  // Neighbor step with even reflection at index 0 of reduced axes.
  // Returns -1 when the neighbor falls off the grid.
  NodeIndex neighbor(MultiIndex mi, int axis, int step) const {
    int i = mi[axis] + step;
    if (i < 0 && reduced.even[axis]) i = -i;
    if (i < 0 || i >= grid.nodes[axis]) return -1;
    mi[axis] = i;
    return grid.flatten(mi);
  }
  NodeIndex neighbor2(MultiIndex mi, int axis_a, int step_a, int axis_b, int step_b) const {
    int ia = mi[axis_a] + step_a;
    int ib = mi[axis_b] + step_b;
    if (ia < 0 && reduced.even[axis_a]) ia = -ia;
    if (ib < 0 && reduced.even[axis_b]) ib = -ib;
    if (ia < 0 || ia >= grid.nodes[axis_a] || ib < 0 || ib >= grid.nodes[axis_b]) return -1;
    mi[axis_a] = ia;
    mi[axis_b] = ib;
    return grid.flatten(mi);
  }
};

namespace detail {

// The virtual full extent of a possibly reduced grid along one axis.
template <typename Scalar>
std::pair<Scalar, Scalar> full_extent(const GridSpec<Scalar>& g, const SymmetryFlags& reduced,
                                      int axis) {
  if (reduced.even[axis]) return {-g.hi[axis], g.hi[axis]};
  return {g.lo[axis], g.hi[axis]};
}

}  // namespace detail

template <typename Scalar>
DomainMask<Scalar> build_domain(const Domain<Scalar>& dom, const GridSpec<Scalar>& grid,
                                SymmetryFlags reduced = {}) {
  validate_domain(dom);
  const int dim = domain_dim(dom);
  if (grid.dim != dim) throw ConfigError("grid dimension does not match domain dimension");
  const Vec3<Scalar> half = domain_half_extent(dom);
  for (int d = 0; d < dim; ++d) {
    if (reduced.even[d] && std::abs(double(grid.lo[d])) > 1e-12)
      throw ConfigError("reduced axes must start at 0");
    auto [lo, hi] = detail::full_extent(grid, reduced, d);
    const Scalar pad = Scalar(1e-9) * std::max<Scalar>(1, half[d]);
    if (lo > -half[d] + pad || hi < half[d] - pad)
      throw ConfigError("grid extent does not contain the domain");
  }

  DomainMask<Scalar> m;
  m.grid = grid;
  m.domain = dom;
  m.reduced = reduced;
  const NodeIndex total = grid.total();
  m.node_class.assign(std::size_t(total), NodeClass::exterior);
  m.fraction.assign(std::size_t(total), Vec3<Scalar>::Ones());
  m.on_boundary.assign(std::size_t(total), 0);
  m.interior_rank.assign(std::size_t(total), NodeIndex(-1));

  std::vector<char> inside(std::size_t(total), 0);
  for (NodeIndex id = 0; id < total; ++id)
    inside[std::size_t(id)] = domain_inside(dom, grid.position(id)) ? 1 : 0;

  // Interior: strictly inside the domain.  Boundary-adjacent: not inside,
  // with at least one inside axis neighbor (the node that carries the
  // Dirichlet data and the crossing fraction).
  for (NodeIndex id = 0; id < total; ++id) {
    if (!inside[std::size_t(id)]) continue;
    const MultiIndex mi = grid.unflatten(id);
    for (int d = 0; d < dim; ++d)
      for (int s = -1; s <= 1; s += 2)
        if (m.neighbor(mi, d, s) < 0)
          throw ConfigError("domain touches the grid edge; enlarge the extent");
    m.node_class[std::size_t(id)] = NodeClass::interior;
  }
  for (NodeIndex id = 0; id < total; ++id) {
    if (inside[std::size_t(id)]) continue;
    const MultiIndex mi = grid.unflatten(id);
    bool adjacent = false;
    for (int d = 0; d < dim; ++d) {
      for (int s = -1; s <= 1; s += 2) {
        const NodeIndex q = m.neighbor(mi, d, s);
        if (q < 0 || !inside[std::size_t(q)]) continue;
        adjacent = true;
        // Crossing measured from the inside neighbor toward this node.  Arms
        // below a hundredth of a cell are snapped up: the stencil cannot
        // distinguish them from an on-node crossing at second order, and the
        // 1/theta weights would otherwise swamp the rows.
        const Vec3<Scalar> xq = grid.position(q);
        Scalar t = axis_crossing(dom, xq, d, -s) / grid.spacing[d];
        t = std::min(std::max(t, Scalar(1e-2)), Scalar(1));
        m.fraction[std::size_t(id)][d] = t;
      }
    }
    if (!adjacent) {
      // Diagonal contact still carries data (rectangle corners and the like),
      // feeding cross-derivative stencils and exports.
      MultiIndex off = MultiIndex::Zero();
      const auto probe = [&](auto&& self, int axis) -> bool {
        if (axis == dim) {
          if (off[0] == 0 && off[1] == 0 && off[2] == 0) return false;
          MultiIndex q = mi;
          for (int d = 0; d < dim; ++d) {
            q[d] += off[d];
            if (q[d] < 0 && reduced.even[d]) q[d] = -q[d];
          }
          if (!grid.contains(q)) return false;
          return inside[std::size_t(grid.flatten(q))] != 0;
        }
        for (int k = -1; k <= 1; ++k) {
          off[axis] = k;
          if (self(self, axis + 1)) {
            off[axis] = 0;
            return true;
          }
        }
        off[axis] = 0;
        return false;
      };
      adjacent = probe(probe, 0);
    }
    if (adjacent) {
      m.node_class[std::size_t(id)] = NodeClass::boundary;
      m.on_boundary[std::size_t(id)] = domain_on_boundary(dom, grid.position(id)) ? 1 : 0;
    }
  }

  for (NodeIndex id = 0; id < total; ++id)
    if (m.node_class[std::size_t(id)] == NodeClass::interior) {
      m.interior_rank[std::size_t(id)] = NodeIndex(m.interior.size());
      m.interior.push_back(id);
    }
  if (m.interior.empty()) throw ConfigError("domain has no interior nodes at this spacing");
  return m;
}

// Grid that fits the domain: exact node alignment for rectangles (and the
// slab axis), one padding cell around curved boundaries.
template <typename Scalar>
GridSpec<Scalar> fit_grid(const Domain<Scalar>& dom, Scalar target_h, int pad_cells = 1) {
  validate_domain(dom);
  if (!(target_h > 0)) throw ConfigError("grid spacing must be positive");
  const int dim = domain_dim(dom);
  const Vec3<Scalar> half = domain_half_extent(dom);
  Vec3<Scalar> ext = Vec3<Scalar>::Zero();
  for (int d = 0; d < dim; ++d) {
    const bool aligned =
        std::holds_alternative<Rectangle<Scalar>>(dom) ||
        (std::holds_alternative<EllipsoidSlab<Scalar>>(dom) &&
         d == std::get<EllipsoidSlab<Scalar>>(dom).cross_section.n);
    if (aligned) {
      ext[d] = half[d];
    } else {
      const long cells = long(std::ceil(double(half[d] / target_h))) + pad_cells;
      ext[d] = Scalar(cells) * target_h;
    }
  }
  return GridSpec<Scalar>::symmetric(dim, ext, target_h);
}

// ---------------------------------------------------------------------------
// Scalar fields on a masked grid.

template <typename Scalar = double>
struct ScalarField {
  std::shared_ptr<const DomainMask<Scalar>> mask;
  Eigen::Array<Scalar, Eigen::Dynamic, 1> values;  // exterior entries are 0

  ScalarField() = default;
  explicit ScalarField(std::shared_ptr<const DomainMask<Scalar>> m)
      : mask(std::move(m)), values(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(mask->total())) {}

  int dim() const { return mask->grid.dim; }
  NodeIndex total() const { return mask->total(); }

  Scalar& operator[](NodeIndex id) { return values[Eigen::Index(id)]; }
  Scalar operator[](NodeIndex id) const { return values[Eigen::Index(id)]; }

  Scalar at_origin() const {
    MultiIndex c;
    for (int d = 0; d < 3; ++d) {
      const auto& g = mask->grid;
      c[d] = (g.nodes[d] == 1) ? 0
             : mask->reduced.even[d]
                 ? 0
                 : int(std::lround(double(-g.lo[d] / g.spacing[d])));
    }
    return values[Eigen::Index(mask->grid.flatten(c))];
  }

  Scalar max_interior(NodeIndex* arg = nullptr) const {
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    NodeIndex best_id = -1;
    for (NodeIndex id : mask->interior)
      if (values[Eigen::Index(id)] > best) {
        best = values[Eigen::Index(id)];
        best_id = id;
      }
    if (arg) *arg = best_id;
    return best;
  }
  Scalar min_interior() const {
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (NodeIndex id : mask->interior) best = std::min(best, values[Eigen::Index(id)]);
    return best;
  }
};

template <typename Scalar, typename F>
ScalarField<Scalar> sample_field(std::shared_ptr<const DomainMask<Scalar>> mask, F&& fn) {
  ScalarField<Scalar> f(mask);
  const NodeIndex total = mask->total();
  for (NodeIndex id = 0; id < total; ++id)
    if (!mask->is_exterior(id)) f[id] = fn(mask->grid.position(id));
  return f;
}

// ---------------------------------------------------------------------------
// Even-symmetry reduction to the nonnegative octant and reflection back.

template <typename Scalar>
ScalarField<Scalar> reduce_to_octant(const ScalarField<Scalar>& f, const SymmetryFlags& flags) {
  const auto& g = f.mask->grid;
  for (int d = 0; d < g.dim; ++d)
    if (flags.even[d] && !g.symmetric_about_origin(d))
      throw ConfigError("even flag on an axis whose extent is not symmetric about 0");
  GridSpec<Scalar> rg = g;
  for (int d = 0; d < g.dim; ++d)
    if (flags.even[d]) {
      rg.lo[d] = Scalar(0);
      rg.nodes[d] = (g.nodes[d] + 1) / 2;
    }
  rg = GridSpec<Scalar>::box(g.dim, rg.lo, rg.hi, rg.nodes);
  auto rmask =
      std::make_shared<const DomainMask<Scalar>>(build_domain(f.mask->domain, rg, flags));
  ScalarField<Scalar> r(rmask);
  const NodeIndex rtotal = rmask->total();
  for (NodeIndex id = 0; id < rtotal; ++id) {
    MultiIndex mi = rg.unflatten(id);
    MultiIndex src = mi;
    for (int d = 0; d < g.dim; ++d)
      if (flags.even[d]) src[d] = mi[d] + (g.nodes[d] - 1) / 2;
    r[id] = f[g.flatten(src)];
  }
  return r;
}

template <typename Scalar>
ScalarField<Scalar> reflect_full(const ScalarField<Scalar>& reduced) {
  const auto& rmask = *reduced.mask;
  const auto& rg = rmask.grid;
  const SymmetryFlags flags = rmask.reduced;
  GridSpec<Scalar> fg = rg;
  for (int d = 0; d < rg.dim; ++d)
    if (flags.even[d]) {
      fg.lo[d] = -rg.hi[d];
      fg.nodes[d] = 2 * rg.nodes[d] - 1;
    }
  fg = GridSpec<Scalar>::box(rg.dim, fg.lo, fg.hi, fg.nodes);
  auto fmask = std::make_shared<const DomainMask<Scalar>>(build_domain(rmask.domain, fg));
  ScalarField<Scalar> full(fmask);
  const NodeIndex ftotal = fmask->total();
  for (NodeIndex id = 0; id < ftotal; ++id) {
    MultiIndex mi = fg.unflatten(id);
    MultiIndex src = mi;
    for (int d = 0; d < rg.dim; ++d)
      if (flags.even[d]) src[d] = std::abs(mi[d] - (rg.nodes[d] - 1));
    full[id] = reduced[rg.flatten(src)];
  }
  return full;
}

}  // namespace translator
