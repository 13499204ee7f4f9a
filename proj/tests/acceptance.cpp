// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "translator/delta_wing.hpp"
#include "translator/dirichlet.hpp"
#include "translator/io.hpp"
#include "translator/simplex_map.hpp"

#include "support.hpp"

using namespace translator;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  bool pass;
  std::string detail;
  double seconds;
};

std::vector<Criterion> g_results;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

void report(int id, bool pass, const std::string& detail, double seconds) {
  g_results.push_back({id, pass, detail, seconds});
  std::printf("criterion %d: %s  %s  [%.1fs]\n", id, pass ? "PASS" : "FAIL", detail.c_str(),
              seconds);
  std::fflush(stdout);
}

// Apex checks accumulated across all converged solves (criterion 4).
struct ApexCheckRecord {
  std::string label;
  double trace_gap;
  double grad_norm;
  double h2;
  bool ok() const { return trace_gap <= 0.05 && grad_norm <= h2; }
};
std::vector<ApexCheckRecord> g_apex_checks;

void record_apex(const std::string& label, const ScalarField<>& u) {
  const auto spec = apex_spectrum(u);
  const double h = u.mask->grid.spacing.head(u.dim()).maxCoeff();
  g_apex_checks.push_back({label, std::abs(spec.trace() + 1.0),
                           double(spec.gradient.abs().maxCoeff()), h * h});
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------

void criterion_1() {
  Timer t;
  std::string detail = "residual Richardson ratios on common nodes:";
  bool pass = true;
  for (auto [name, surf] :
       {std::pair{"grim", ClosedFormSurface<>::grim_reaper()},
        std::pair{"tilted(pi/6)", ClosedFormSurface<>::tilted(kPi / 6)}}) {
    auto mc = testsupport::rect_mask(1.0, 1.0, 1.0 / 32);
    auto mf = testsupport::rect_mask(1.0, 1.0, 1.0 / 64);
    auto rc = residual_of_closed_form(surf, mc);
    auto rf = residual_of_closed_form(surf, mf);
    const double ratio = testsupport::common_node_ratio(*mc, rc, *mf, rf);
    pass = pass && ratio >= 3.4 && ratio <= 4.6;
    detail += std::string(" ") + name + "=" + fmt(ratio);
  }
  detail += " (window [3.4, 4.6])";
  report(1, pass, detail, t.seconds());
}

void criterion_2() {
  Timer t;
  SuiteOptions<> opt;
  const double target = -std::log(std::cos(1.0));
  double prev = -1;
  bool monotone = true;
  double u8 = 0;
  for (double L : {2.0, 4.0, 8.0}) {
    auto [u, rep] = solve_rectangle(L, 1.0, 1.0 / 64, opt);
    record_apex("rectangle L=" + fmt(L) + " b=1 h=1/64", u);
    if (rep.max_value <= prev) monotone = false;
    prev = rep.max_value;
    u8 = rep.max_value;
  }
  const double gap = std::abs(u8 - target);
  const bool pass = gap <= 0.02 && monotone;
  report(2, pass,
         "u(0,0)=" + fmt(u8) + " vs -log cos 1 = " + fmt(target) + " (gap " + fmt(gap) +
             " <= 0.02), increasing across L in {2,4,8}: " + (monotone ? "yes" : "no"),
         t.seconds());
}

void criterion_3() {
  Timer t;
  SuiteOptions<> opt;
  auto [w8, r8] = solve_rectangle(8.0, 2.0, 1.0 / 32, opt);
  record_apex("rectangle L=8 b=2 h=1/32", w8);
  auto [w16, r16] = solve_rectangle(16.0, 2.0, 1.0 / 32, opt);
  record_apex("rectangle L=16 b=2 h=1/32", w16);
  const double wide_inc = r16.max_value - r8.max_value;
  auto [n8, s8] = solve_rectangle(8.0, 1.0, 1.0 / 32, opt);
  auto [n16, s16] = solve_rectangle(16.0, 1.0, 1.0 / 32, opt);
  const double narrow_inc = s16.max_value - s8.max_value;
  const bool pass = wide_inc >= 0.15 && narrow_inc <= 0.02;
  report(3, pass,
         "b=2: u(0,0) rose by " + fmt(wide_inc) + " (>= 0.15); b=1: by " + fmt(narrow_inc) +
             " (<= 0.02)",
         t.seconds());
}

void criterion_4() {
  Timer t;
  bool pass = true;
  int worst = -1;
  for (std::size_t i = 0; i < g_apex_checks.size(); ++i)
    if (!g_apex_checks[i].ok()) {
      pass = false;
      worst = int(i);
    }
  std::string detail = fmt(double(g_apex_checks.size())) +
                       " converged solves: trace D^2u(apex) = -1 +- 0.05 and |Du(apex)| <= h^2";
  if (worst >= 0)
    detail += "; worst: " + g_apex_checks[std::size_t(worst)].label + " trace gap " +
              fmt(g_apex_checks[std::size_t(worst)].trace_gap);
  report(4, pass, detail, t.seconds());
}

void criterion_5() {
  Timer t;
  bool pass = true;
  std::string detail = "bowl u''(0):";
  for (int n : {1, 2, 3}) {
    const auto p = bowl_profile<double>(n, 1.45, 2e-4);
    const double fitted = 2.0 * p.u[1] / (p.dr * p.dr);
    pass = pass && std::abs(fitted + 1.0 / n) <= 1e-6;
    detail += " n=" + std::to_string(n) + ": " + fmt(fitted);
  }
  const auto p1 = bowl_profile<double>(1, 1.45, 2e-4);
  double worst = 0;
  for (std::size_t j = 0; j < p1.u.size(); ++j) {
    const double r = double(j) * p1.dr;
    if (r > 1.4) break;
    worst = std::max(worst, std::abs(p1.u[j] - std::log(std::cos(r))));
  }
  pass = pass && worst <= 1e-8;
  detail += "; n=1 vs log cos r on r<=1.4: max gap " + fmt(worst) + " (<= 1e-8)";
  report(5, pass, detail, t.seconds());
}

void criterion_6() {
  Timer t;
  const double b = std::sqrt(2.0) * kPi / 2;
  try {
    auto wing = construct(b, 1.0 / 32, std::vector<double>{20.0, 40.0}, 1e-3);
    record_apex("delta-wing b=sqrt(2)pi/2", wing.field);
    const auto slope = asymptotic_slope_check(wing, 0.05);
    const auto convex = convexity_check(wing);
    const bool pass = slope.pass && wing.k_small > 0.0 && wing.k_small < 0.5 &&
                      wing.apex.max_off_diagonal() <= 1e-6 && convex.fraction >= 0.99;
    report(6, pass,
           "|s(30)|=" + fmt(std::abs(slope.at_three_quarters)) + " vs 1 +- 5%; k=" +
               fmt(wing.k_small) + "; off-diag " + fmt(wing.apex.max_off_diagonal()) +
               "; K>0 fraction " + fmt(convex.fraction),
           t.seconds());
  } catch (const ScheduleError& e) {
    report(6, false,
           "construction rejected: normalized L=20/L=40 solves differ by " + fmt(e.gap) +
               " on |x|<=10 (tol 1e-3). The finite-L wall layer (width ~exp(-u(0,0)/2), "
               "~1e-4 here) is unresolvable at h=1/32, inflating the long solves; see the "
               "wing tests for certified constructions at feasible parameters",
           t.seconds());
  } catch (const std::exception& e) {
    report(6, false, std::string("construction failed: ") + e.what(), t.seconds());
  }
}

void criterion_7() {
  Timer t;
  bool pass = true;
  std::string detail;

  const auto run_rect = [&](double L, double b, double h) {
    SuiteOptions<> opt;
    auto [u, rep] = solve_rectangle(L, b, h, opt);
    record_apex("rectangle L=" + fmt(L) + " b=" + fmt(b), u);
    auto audit = audit_rectangle(u, opt);
    AffineWeight<> eta;
    eta.constant = b;
    eta.linear << 0.0, -1.0, 0.0;
    const auto ev = eta_v_max_audit(u, eta);
    bool ok = audit.all_pass() && ev.pass;
    std::string failed;
    for (const auto& c : audit.checks)
      if (!c.pass) failed += " " + c.id;
    if (!ev.pass) failed += " ETA_V";
    detail += " rect(" + fmt(L) + "," + fmt(b) + "):" + (ok ? "ok" : ("FAIL" + failed));
    pass = pass && ok;
  };
  run_rect(8.0, 1.0, 1.0 / 64);
  run_rect(8.0, 2.0, 1.0 / 32);

  const auto run_ellipsoid = [&](double a1, double a2, double rho) {
    SuiteOptions<> opt;
    Eigen::VectorXd a(2);
    a << a1, a2;
    auto [u, rep] = solve_ellipsoid<double>(a, 1.0, 1.0 / 32, opt);
    record_apex("ellipsoid (" + fmt(a1) + "," + fmt(a2) + ")", u);
    auto audit = audit_ellipsoid(u, rho);
    bool ok = audit.all_pass();
    std::string failed;
    for (const auto& c : audit.checks)
      if (!c.pass) failed += " " + c.id;
    detail += " ellipsoid(" + fmt(a1) + "," + fmt(a2) + "):" + (ok ? "ok" : ("FAIL" + failed));
    pass = pass && ok;
  };
  run_ellipsoid(0.5, 0.5, -1.0);
  run_ellipsoid(0.75, 0.25, 0.8);

  {
    SuiteOptions<> opt;
    Eigen::VectorXd a(2);
    a << 0.6, 0.4;
    auto [u, rep] = solve_slab<double>(a, 1.5, 1.0, 1.0 / 24, opt);
    record_apex("slab (0.6,0.4) R=1.5 b=1", u);
    auto audit = audit_slab(u, opt);
    bool ok = audit.all_pass();
    std::string failed;
    for (const auto& c : audit.checks)
      if (!c.pass) failed += " " + c.id;
    detail += std::string(" slab:") + (ok ? "ok" : ("FAIL" + failed));
    pass = pass && ok;
  }

  {
    // Wing comparisons at certified desk-scale parameters (the spec leaves
    // the schedule free here); the loose Cauchy tolerance is reported.
    auto cmp = spine_comparison(1.8, 2.6, 1.0 / 32, std::vector<double>{8.0, 12.0}, 5.0);
    detail += std::string(" spine(1.8,2.6):") +
              (cmp.pass ? "ok margin " + fmt(cmp.min_margin) : "FAIL");
    pass = pass && cmp.pass;
  }
  {
    const std::vector<double> L{8.0, 12.0};
    auto base = construct(2.2, 1.0 / 32, L, 5.0);
    auto near10 = construct(2.1, 1.0 / 32, L, 5.0);
    auto near20 = construct(2.0, 1.0 / 32, L, 5.0);
    const double g01 = continuity_in_b(base, near10, 2.0, 1.2);
    const double g02 = continuity_in_b(base, near20, 2.0, 1.2);
    const bool ok = g01 < g02 && g01 > 0;
    detail += std::string(" continuity(2.2):") +
              (ok ? "ok gaps " + fmt(g02) + ">" + fmt(g01) : "FAIL");
    pass = pass && ok;
  }
  report(7, pass, "property suites:" + detail, t.seconds());
}

void criterion_8() {
  Timer t;
  SuiteOptions<> opt;
  opt.lambda_steps = 4;
  bool pass = true;
  std::string detail;

  auto center = f_map(SimplexPoint<>::of({0.5, 0.5}), 0.5, 1.0 / 32, opt);
  const double center_gap =
      std::max(std::abs(center.k[0] - 0.5), std::abs(center.k[1] - 0.5));
  pass = pass && center_gap <= 0.02;
  detail += "F(1/2,1/2) gap " + fmt(center_gap) + " (<= 0.02)";

  std::mt19937 rng(20260808);
  std::uniform_real_distribution<double> unit(0.05, 0.95);
  int order_ok = 0, tested = 0;
  while (tested < 10) {
    const double a1 = unit(rng);
    if (std::abs(a1 - 0.5) < 0.05) continue;
    ++tested;
    auto r = f_map(SimplexPoint<>::of({a1, 1 - a1}), 0.5, 1.0 / 32, opt);
    if ((a1 > 0.5) == (r.k[0] > r.k[1])) ++order_ok;
  }
  pass = pass && order_ok == 10;
  detail += "; order preserved on " + std::to_string(order_ok) + "/10 random points";

  auto fwd = f_map(SimplexPoint<>::of({0.7, 0.3}), 0.5, 1.0 / 32, opt);
  auto swp = f_map(SimplexPoint<>::of({0.3, 0.7}), 0.5, 1.0 / 32, opt);
  const double equi = std::max(std::abs(fwd.k[0] - swp.k[1]), std::abs(fwd.k[1] - swp.k[0]));
  pass = pass && equi <= 0.02;
  detail += "; swap equivariance gap " + fmt(equi) + " (<= 0.02)";

  try {
    auto [a, res] = invert_f(SimplexPoint<>::of({0.6, 0.4}), 0.5, 1.0 / 32, 0.02, opt);
    const double inv_gap =
        std::max(std::abs(res.k[0] - 0.6), std::abs(res.k[1] - 0.4));
    pass = pass && inv_gap <= 0.02;
    detail += "; invert_f(0.6,0.4) achieved gap " + fmt(inv_gap) + " at a1=" + fmt(a[0]);
  } catch (const std::exception& e) {
    pass = false;
    detail += std::string("; invert_f failed: ") + e.what();
  }
  report(8, pass, detail, t.seconds());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// JSON report comparison with the wall-clock entry masked out.
bool reports_equal_modulo_timing(const fs::path& a, const fs::path& b) {
  auto ja = nlohmann::ordered_json::parse(slurp(a), nullptr, false);
  auto jb = nlohmann::ordered_json::parse(slurp(b), nullptr, false);
  if (ja.is_discarded() || jb.is_discarded()) return false;
  ja.erase("timing_s");
  jb.erase("timing_s");
  return ja.dump() == jb.dump();
}

void criterion_9(const std::string& cli) {
  Timer t;
  if (cli.empty()) {
    report(9, false, "no --cli path given; cannot exercise the command-line pipeline", 0.0);
    return;
  }
  const fs::path base = fs::temp_directory_path() / "translator-acceptance-determinism";
  std::error_code ec;
  fs::remove_all(base, ec);
  fs::create_directories(base);

  bool pass = true;
  std::string detail;

  // The criterion-6 command: rejected deterministically, identical records.
  for (int r = 1; r <= 2; ++r) {
    const std::string cmd = cli + " delta-wing --b 2.2214414690791831 --h 0.03125 --L 20,40" +
                            " --out " + (base / ("c6-" + std::to_string(r))).string() +
                            " > /dev/null 2>&1";
    std::system(cmd.c_str());
  }
  const bool c6_identical =
      fs::exists(base / "c6-1/error.json") &&
      slurp(base / "c6-1/error.json") == slurp(base / "c6-2/error.json");
  pass = pass && c6_identical;
  detail += std::string("criterion-6 command: identical error records ") +
            (c6_identical ? "yes" : "NO");

  // A certifying wing run: byte-identical CSV and OBJ, report equal up to
  // the wall-clock entry.
  int code = 0;
  for (int r = 1; r <= 2; ++r) {
    const std::string cmd = cli + " delta-wing --b 1.8 --h 0.03125 --L 9,13" +
                            " --cauchy-tol 5.0 --out " +
                            (base / ("wing-" + std::to_string(r))).string() +
                            " > /dev/null 2>&1";
    code = std::system(cmd.c_str());
  }
  (void)code;
  const bool csv_same =
      fs::exists(base / "wing-1/field.csv") &&
      slurp(base / "wing-1/field.csv") == slurp(base / "wing-2/field.csv");
  const bool obj_same =
      fs::exists(base / "wing-1/mesh.obj") &&
      slurp(base / "wing-1/mesh.obj") == slurp(base / "wing-2/mesh.obj");
  const bool json_same = fs::exists(base / "wing-1/report.json") &&
                         reports_equal_modulo_timing(base / "wing-1/report.json",
                                                     base / "wing-2/report.json");
  pass = pass && csv_same && obj_same && json_same;
  detail += std::string("; wing run: CSV ") + (csv_same ? "identical" : "DIFFERS") +
            ", OBJ " + (obj_same ? "identical" : "DIFFERS") + ", report " +
            (json_same ? "identical up to timing_s" : "DIFFERS");
  report(9, pass, detail, t.seconds());
}

}  // namespace

int main(int argc, char** argv) {
  std::string cli;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

  criterion_1();
  criterion_2();
  criterion_3();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_4();  // aggregates apex checks from the solves above
  criterion_9(cli);

  int failures = 0;
  for (const auto& r : g_results)
    if (!r.pass) ++failures;
  std::printf("%d/%zu criteria passed\n", int(g_results.size()) - failures,
              g_results.size());
  return failures == 0 ? 0 : 1;
}
