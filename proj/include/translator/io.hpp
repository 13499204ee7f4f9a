#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "translator/dirichlet.hpp"
#include "translator/geometry.hpp"
#include "translator/grid.hpp"

namespace translator {

namespace detail {

// 17 significant digits: every double round-trips exactly.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

// CSV: header x1,...,xn,u; one row per non-exterior node in lexicographic
// node order (axis 0 slowest).
template <typename Scalar>
void write_field_csv(const ScalarField<Scalar>& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const int dim = f.dim();
  for (int d = 0; d < dim; ++d) out << "x" << (d + 1) << ",";
  out << "u\n";
  const auto& m = *f.mask;
  const NodeIndex total = m.total();
  for (NodeIndex id = 0; id < total; ++id) {
    if (m.is_exterior(id)) continue;
    const Vec3<Scalar> x = m.grid.position(id);
    for (int d = 0; d < dim; ++d) out << detail::fmt17(double(x[d])) << ",";
    out << detail::fmt17(double(f[id])) << "\n";
  }
  if (!out) throw IoError("failed while writing " + path);
}

template <typename Scalar>
ScalarField<Scalar> read_field_csv(std::shared_ptr<const DomainMask<Scalar>> mask,
                                   const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty field file " + path);
  ScalarField<Scalar> f(mask);
  const auto& m = *f.mask;
  const int dim = f.dim();
  const NodeIndex total = m.total();
  NodeIndex id = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    while (id < total && m.is_exterior(id)) ++id;
    if (id >= total) throw IoError("more rows than non-exterior nodes in " + path);
    std::istringstream row(line);
    std::string cell;
    const Vec3<Scalar> x = m.grid.position(id);
    for (int d = 0; d < dim; ++d) {
      if (!std::getline(row, cell, ',')) throw IoError("short row in " + path);
      const double v = std::strtod(cell.c_str(), nullptr);
      if (std::abs(v - double(x[d])) > 1e-9 * (1 + std::abs(double(x[d]))))
        throw IoError("row coordinates do not match the domain grid in " + path);
    }
    if (!std::getline(row, cell, ',')) throw IoError("short row in " + path);
    f[id] = Scalar(std::strtod(cell.c_str(), nullptr));
    ++id;
  }
  while (id < total && m.is_exterior(id)) ++id;
  if (id != total) throw IoError("fewer rows than non-exterior nodes in " + path);
  return f;
}

// OBJ heightfield: one vertex per non-exterior node (same order as the CSV
// rows), two triangles per fully non-exterior cell, counterclockwise seen
// from +u.
template <typename Scalar>
void write_field_obj(const ScalarField<Scalar>& f, const std::string& path) {
  if (f.dim() != 2) throw ConfigError("OBJ export is for two-dimensional fields");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const auto& m = *f.mask;
  const auto& g = m.grid;
  std::vector<NodeIndex> vertex_of(std::size_t(m.total()), -1);
  NodeIndex count = 0;
  for (NodeIndex id = 0; id < m.total(); ++id) {
    if (m.is_exterior(id)) continue;
    vertex_of[std::size_t(id)] = ++count;  // 1-based
    const Vec3<Scalar> x = g.position(id);
    out << "v " << detail::fmt17(double(x[0])) << " " << detail::fmt17(double(x[1])) << " "
        << detail::fmt17(double(f[id])) << "\n";
  }
  for (int i = 0; i + 1 < g.nodes[0]; ++i)
    for (int j = 0; j + 1 < g.nodes[1]; ++j) {
      const NodeIndex v00 = vertex_of[std::size_t(g.flatten(MultiIndex{i, j, 0}))];
      const NodeIndex v10 = vertex_of[std::size_t(g.flatten(MultiIndex{i + 1, j, 0}))];
      const NodeIndex v01 = vertex_of[std::size_t(g.flatten(MultiIndex{i, j + 1, 0}))];
      const NodeIndex v11 = vertex_of[std::size_t(g.flatten(MultiIndex{i + 1, j + 1, 0}))];
      if (v00 < 0 || v10 < 0 || v01 < 0 || v11 < 0) continue;
      out << "f " << v00 << " " << v10 << " " << v11 << "\n";
      out << "f " << v00 << " " << v11 << " " << v01 << "\n";
    }
  if (!out) throw IoError("failed while writing " + path);
}

// ---------------------------------------------------------------------------
// The report schema: fixed key set
//   {command, params, residual_max, apex:{location, value, curvatures},
//    audits:[{id, pass, value, tolerance}], timing_s}.

template <typename Scalar>
nlohmann::ordered_json apex_json(const ApexSpectrum<Scalar>& spec, int dim) {
  nlohmann::ordered_json a;
  a["location"] = std::vector<double>(spec.node_position.data(),
                                      spec.node_position.data() + dim);
  a["value"] = double(spec.value);
  a["curvatures"] =
      std::vector<double>(spec.curvatures.data(), spec.curvatures.data() + dim);
  return a;
}

template <typename Scalar>
nlohmann::ordered_json audits_json(const AuditReport<Scalar>& report) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& c : report.checks) {
    nlohmann::ordered_json e;
    e["id"] = c.id;
    e["pass"] = c.pass;
    e["value"] = double(c.measured);
    e["tolerance"] = double(c.tolerance);
    arr.push_back(std::move(e));
  }
  return arr;
}

inline nlohmann::ordered_json report_json(const std::string& command,
                                          nlohmann::ordered_json params, double residual_max,
                                          nlohmann::ordered_json apex,
                                          nlohmann::ordered_json audits, double timing_s) {
  nlohmann::ordered_json r;
  r["command"] = command;
  r["params"] = std::move(params);
  r["residual_max"] = residual_max;
  r["apex"] = std::move(apex);
  r["audits"] = std::move(audits);
  r["timing_s"] = timing_s;
  return r;
}

inline void write_json(const nlohmann::ordered_json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed while writing " + path);
}

}  // namespace translator
