#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "translator/io.hpp"

#include "support.hpp"

using namespace translator;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() / ("translator-io-test-" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

}  // namespace

TEST_CASE("zero field on a 3x3 rectangle grid exports 9 CSV rows") {
  auto g = GridSpec<>::box(2, Vec3<>{-1, -1, 0}, Vec3<>{1, 1, 0}, MultiIndex{3, 3, 1});
  Domain<> dom = Rectangle<>{1.0, 1.0};
  auto m = std::make_shared<const DomainMask<>>(build_domain(dom, g));
  ScalarField<> zero(m);
  TempDir tmp;
  write_field_csv(zero, tmp.file("f.csv"));
  const std::string text = slurp(tmp.file("f.csv"));
  CHECK(text.substr(0, 8) == "x1,x2,u\n");
  int rows = -1;  // header
  for (char c : text)
    if (c == '\n') ++rows;
  CHECK(rows == 9);
  // all u values are 0
  std::istringstream ss(text);
  std::string line;
  std::getline(ss, line);
  while (std::getline(ss, line)) CHECK(line.substr(line.rfind(',') + 1) == "0");
}

TEST_CASE("CSV round trip is bitwise exact") {
  auto m = testsupport::ellipse_mask(0.6, 0.4, 1.0, 1.0 / 16);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto f = sample_field<double>(m, [&](const Vec3<>&) { return unit(rng) * 1e3; });
  TempDir tmp;
  write_field_csv(f, tmp.file("a.csv"));
  auto loaded = read_field_csv<double>(m, tmp.file("a.csv"));
  write_field_csv(loaded, tmp.file("b.csv"));
  CHECK(slurp(tmp.file("a.csv")) == slurp(tmp.file("b.csv")));
  // and the values round-trip exactly
  CHECK((loaded.values - f.values).abs().maxCoeff() == 0.0);
}

TEST_CASE("CSV loader rejects mismatched grids") {
  auto m = testsupport::rect_mask(1.0, 1.0, 0.5);
  auto other = testsupport::rect_mask(1.0, 1.0, 0.25);
  ScalarField<> zero(m);
  TempDir tmp;
  write_field_csv(zero, tmp.file("f.csv"));
  CHECK_THROWS_AS(read_field_csv<double>(other, tmp.file("f.csv")), IoError);
}

TEST_CASE("OBJ export: one vertex per non-exterior node, oriented quads") {
  auto m = testsupport::rect_mask(1.0, 1.0, 0.25);
  auto f = sample_field<double>(m, [](const Vec3<>& x) { return x[0] + x[1]; });
  TempDir tmp;
  write_field_obj(f, tmp.file("mesh.obj"));
  const std::string text = slurp(tmp.file("mesh.obj"));
  NodeIndex non_exterior = 0;
  for (NodeIndex id = 0; id < m->total(); ++id)
    if (!m->is_exterior(id)) ++non_exterior;
  NodeIndex vertices = 0, faces = 0;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("v ", 0) == 0) ++vertices;
    if (line.rfind("f ", 0) == 0) ++faces;
  }
  CHECK(vertices == non_exterior);
  const auto& g = m->grid;
  CHECK(faces == 2 * NodeIndex(g.nodes[0] - 1) * NodeIndex(g.nodes[1] - 1));
}

TEST_CASE("no OBJ for one- or three-dimensional fields") {
  Ellipsoid<> seg;
  seg.n = 1;
  seg.coeff << 1.0, 0.0, 0.0;
  seg.radius = 1.0;
  Domain<> dom = seg;
  auto m = std::make_shared<const DomainMask<>>(build_domain(dom, fit_grid(dom, 0.25)));
  ScalarField<> f(m);
  CHECK_THROWS_AS(write_field_obj(f, "/tmp/should-not-exist.obj"), ConfigError);
}

TEST_CASE("report JSON carries the fixed key set in order") {
  AuditReport<> audits;
  audits.checks.push_back({"SIGN_X", true, 0.0, 1e-8, Vec3<>::Zero(), ""});
  auto rep = report_json("solve-rect", {{"L", 8.0}}, 1e-10,
                         nlohmann::ordered_json{{"location", {0.0, 0.0}},
                                                {"value", 0.6},
                                                {"curvatures", {0.5, 0.5}}},
                         audits_json(audits), 1.25);
  std::vector<std::string> keys;
  for (auto it = rep.begin(); it != rep.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"command", "params", "residual_max", "apex",
                                         "audits", "timing_s"});
  CHECK(rep["audits"][0]["id"] == "SIGN_X");
  CHECK(rep["audits"][0]["pass"] == true);
}

TEST_CASE("unwritable paths raise IO errors") {
  auto m = testsupport::rect_mask(1.0, 1.0, 0.5);
  ScalarField<> f(m);
  CHECK_THROWS_AS(write_field_csv(f, "/nonexistent-dir/f.csv"), IoError);
}
