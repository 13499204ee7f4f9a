#pragma once

// Shared helpers for the test suites.

#include <cmath>
#include <memory>

#include "translator/grid.hpp"
#include "translator/operators.hpp"

namespace testsupport {

using namespace translator;

inline std::shared_ptr<const DomainMask<>> rect_mask(double L, double b, double h) {
  Domain<> dom = Rectangle<>{L, b};
  return std::make_shared<const DomainMask<>>(build_domain(dom, fit_grid(dom, h)));
}

inline std::shared_ptr<const DomainMask<>> ellipse_mask(double a1, double a2, double R,
                                                        double h) {
  Ellipsoid<> e;
  e.n = 2;
  e.coeff << a1, a2, 0.0;
  e.radius = R;
  Domain<> dom = e;
  return std::make_shared<const DomainMask<>>(build_domain(dom, fit_grid(dom, h)));
}

// Richardson ratio of two per-node arrays sampled at h and h/2 on nested
// grids over the same extent: max-norms are taken over the coarse grid's
// interior nodes (the common node set).
inline double common_node_ratio(const DomainMask<>& coarse,
                                const Eigen::ArrayXd& coarse_values,
                                const DomainMask<>& fine, const Eigen::ArrayXd& fine_values) {
  double worst_c = 0, worst_f = 0;
  for (NodeIndex id : coarse.interior) {
    const MultiIndex mi = coarse.grid.unflatten(id);
    MultiIndex fi;
    for (int d = 0; d < 3; ++d) fi[d] = d < coarse.grid.dim ? 2 * mi[d] : 0;
    const NodeIndex fid = fine.grid.flatten(fi);
    if (!fine.is_interior(fid)) continue;
    worst_c = std::max(worst_c, std::abs(coarse_values[Eigen::Index(id)]));
    worst_f = std::max(worst_f, std::abs(fine_values[Eigen::Index(fid)]));
  }
  return worst_c / worst_f;
}

}  // namespace testsupport
