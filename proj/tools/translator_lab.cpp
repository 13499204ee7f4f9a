// translator-lab: solve and audit graphical translators of mean curvature
// flow on rectangles, ellipsoids and ellipsoid-slab domains.

#include <CLI11.hpp>

#include <Eigen/Core>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "translator/delta_wing.hpp"
#include "translator/dirichlet.hpp"
#include "translator/io.hpp"
#include "translator/simplex_map.hpp"

namespace fs = std::filesystem;
using namespace translator;
using nlohmann::ordered_json;

namespace {

double now_minus(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

std::vector<std::string> parse_list_str(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

struct OutputDir {
  fs::path dir;
  bool enabled = false;

  void prepare(const std::string& path) {
    if (path.empty()) return;
    dir = path;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + path);
    enabled = true;
  }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

void apply_thread_cap() {
  if (const char* env = std::getenv("TRANSLATOR_LAB_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1)
      throw ConfigError("TRANSLATOR_LAB_THREADS must be a positive integer");
    Eigen::setNbThreads(int(n));
  }
}

ordered_json empty_apex() {
  ordered_json a;
  a["location"] = nullptr;
  a["value"] = nullptr;
  a["curvatures"] = nullptr;
  return a;
}

void emit(const OutputDir& out, const ordered_json& report, bool echo = true) {
  if (echo) std::cout << report.dump(2) << "\n";
  if (out.enabled) write_json(report, out.file("report.json"));
}

// Rebuild the domain mask recorded in a report's params block.
std::shared_ptr<const DomainMask<>> mask_from_params(const ordered_json& p) {
  const std::string kind = p.at("domain").get<std::string>();
  const double h = p.at("h").get<double>();
  Domain<> dom;
  if (kind == "rectangle") {
    dom = Rectangle<>{p.at("L").get<double>(), p.at("b").get<double>()};
  } else if (kind == "ellipsoid") {
    Ellipsoid<> e;
    const auto a = p.at("a").get<std::vector<double>>();
    e.n = int(a.size());
    for (int d = 0; d < e.n; ++d) e.coeff[d] = a[std::size_t(d)];
    e.radius = p.at("R").get<double>();
    dom = e;
  } else if (kind == "slab") {
    EllipsoidSlab<> s;
    const auto a = p.at("a").get<std::vector<double>>();
    s.cross_section.n = int(a.size());
    for (int d = 0; d < s.cross_section.n; ++d) s.cross_section.coeff[d] = a[std::size_t(d)];
    s.cross_section.radius = p.at("R").get<double>();
    s.half_width = p.at("b").get<double>();
    dom = s;
  } else {
    throw ConfigError("unknown domain kind in report params: " + kind);
  }
  return std::make_shared<const DomainMask<>>(build_domain(dom, fit_grid(dom, h)));
}

void export_field_files(const OutputDir& out, const ScalarField<>& field, bool csv, bool obj) {
  if (!out.enabled) return;
  if (csv) write_field_csv(field, out.file("field.csv"));
  if (obj && field.dim() == 2) write_field_obj(field, out.file("mesh.obj"));
}

int run(int argc, char** argv) {
  CLI::App app{"graphical translators of mean curvature flow: solves, wings, audits"};
  app.set_help_flag("--help", "print help");  // keep --h free for the grid spacing
  app.set_config("--config", "",
                 "key=value configuration file with a [subcommand] section (flags win)");
  app.allow_config_extras(CLI::config_extras_mode::error);  // unknown keys rejected
  app.require_subcommand(1);
  app.fallthrough();  // global flags (--out, --steps) may follow the subcommand

  std::string out_path;
  app.add_option("--out", out_path, "output directory for field.csv / mesh.obj / report.json");

  int lambda_steps = 16;
  app.add_option("--steps", lambda_steps, "continuation steps from 0 to 1")
      ->check(CLI::PositiveNumber);

  // ---- closed-form ------------------------------------------------------
  auto* cf = app.add_subcommand("closed-form", "evaluate a reference surface");
  std::string family = "grim";
  double theta = 0, arc_b = 1.0, plane_level = 0, cf_rmax = 2.0, cf_dr = 2e-4;
  int cf_n = 2;
  std::string eval_at;
  cf->add_option("--family", family, "grim|tilted|arc|plane|bowl")->required();
  cf->add_option("--theta", theta, "tilt angle (tilted)");
  cf->add_option("--b", arc_b, "arc half-width");
  cf->add_option("--level", plane_level, "plane height");
  cf->add_option("--n", cf_n, "bowl dimension");
  cf->add_option("--rmax", cf_rmax, "bowl integration radius");
  cf->add_option("--dr", cf_dr, "bowl sample step");
  cf->add_option("--eval", eval_at, "comma-separated point to evaluate at")->required();

  // ---- bowl --------------------------------------------------------------
  auto* bowl_cmd = app.add_subcommand("bowl", "integrate the bowl soliton profile");
  int bowl_n = 2;
  double bowl_rmax = 2.0, bowl_dr = 2e-4;
  bowl_cmd->add_option("--n", bowl_n, "graph dimension")->required();
  bowl_cmd->add_option("--rmax", bowl_rmax, "integration radius")->required();
  bowl_cmd->add_option("--dr", bowl_dr, "sample step");

  // ---- solve-rect ---------------------------------------------------------
  auto* rect = app.add_subcommand("solve-rect", "Dirichlet solve on [-L,L]x[-b,b]");
  double rect_L = 0, rect_b = 0, rect_h = 0;
  rect->add_option("--L", rect_L)->required();
  rect->add_option("--b", rect_b)->required();
  rect->add_option("--h", rect_h)->required();

  // ---- solve-ellipsoid ----------------------------------------------------
  auto* ell = app.add_subcommand("solve-ellipsoid", "Dirichlet solve on an ellipsoid");
  std::string ell_a;
  double ell_R = 0, ell_h = 0;
  ell->add_option("--a", ell_a, "simplex coefficients, e.g. 0.5,0.5")->required();
  ell->add_option("--R", ell_R)->required();
  ell->add_option("--h", ell_h)->required();

  // ---- solve-slab ----------------------------------------------------------
  auto* slab = app.add_subcommand("solve-slab", "Dirichlet solve on ellipsoid x [-b,b]");
  std::string slab_a;
  double slab_R = 0, slab_b = 0, slab_h = 0;
  slab->add_option("--a", slab_a)->required();
  slab->add_option("--R", slab_R)->required();
  slab->add_option("--b", slab_b)->required();
  slab->add_option("--h", slab_h)->required();

  // ---- delta-wing -----------------------------------------------------------
  auto* wing_cmd = app.add_subcommand("delta-wing", "construct the wing over a strip");
  double wing_b = 0, wing_h = 0, wing_cauchy = 1e-3;
  std::string wing_L;
  wing_cmd->add_option("--b", wing_b, "strip half-width > pi/2")->required();
  wing_cmd->add_option("--h", wing_h)->required();
  wing_cmd->add_option("--L", wing_L, "increasing rectangle half-lengths, e.g. 20,40")
      ->required();
  wing_cmd->add_option("--cauchy-tol", wing_cauchy, "limit certificate tolerance");

  // ---- fmap -------------------------------------------------------------------
  auto* fmap_cmd = app.add_subcommand("fmap", "coefficients -> apex curvatures");
  std::string fmap_a;
  double fmap_lambda = 0.5, fmap_h = 1.0 / 32;
  fmap_cmd->add_option("--a", fmap_a)->required();
  fmap_cmd->add_option("--lambda", fmap_lambda, "apex height target");
  fmap_cmd->add_option("--h", fmap_h);

  // ---- invert-fmap ---------------------------------------------------------------
  auto* inv_cmd = app.add_subcommand("invert-fmap", "apex curvatures -> coefficients");
  std::string inv_k;
  double inv_lambda = 0.5, inv_h = 1.0 / 32, inv_tol = 0.02;
  inv_cmd->add_option("--k", inv_k)->required();
  inv_cmd->add_option("--lambda", inv_lambda);
  inv_cmd->add_option("--h", inv_h);
  inv_cmd->add_option("--tol", inv_tol);

  // ---- audit ----------------------------------------------------------------------
  auto* audit_cmd = app.add_subcommand("audit", "solve a domain and audit its properties");
  std::string audit_domain;
  double a_L = 8, a_b = 1, a_h = 1.0 / 32, a_R = 1;
  std::string a_a = "0.5,0.5";
  audit_cmd->add_option("--domain", audit_domain, "rect|ellipsoid|slab")->required();
  audit_cmd->add_option("--L", a_L);
  audit_cmd->add_option("--b", a_b);
  audit_cmd->add_option("--h", a_h);
  audit_cmd->add_option("--R", a_R);
  audit_cmd->add_option("--a", a_a);

  // ---- export ---------------------------------------------------------------------
  auto* export_cmd = app.add_subcommand("export", "re-export a run directory");
  std::string export_in, export_formats = "csv,obj,json";
  export_cmd->add_option("--in", export_in, "directory holding report.json + field.csv")
      ->required();
  export_cmd->add_option("--format", export_formats, "any of csv,obj,json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help exits clean; any parse problem is a config error
  }
  apply_thread_cap();

  const auto t0 = std::chrono::steady_clock::now();
  OutputDir out;
  out.prepare(out_path);
  SuiteOptions<> opt;
  opt.lambda_steps = lambda_steps;

  try {
    if (*cf) {
      ClosedFormSurface<> s;
      if (family == "grim")
        s = ClosedFormSurface<>::grim_reaper();
      else if (family == "tilted")
        s = ClosedFormSurface<>::tilted(theta);
      else if (family == "arc")
        s = ClosedFormSurface<>::arc(arc_b);
      else if (family == "plane")
        s = ClosedFormSurface<>::plane(plane_level);
      else if (family == "bowl")
        s = ClosedFormSurface<>::bowl(cf_n, cf_rmax, cf_dr);
      else
        throw ConfigError("unknown family " + family);
      const auto pt = parse_list(eval_at);
      Vec3<> x = Vec3<>::Zero();
      for (std::size_t d = 0; d < pt.size() && d < 3; ++d) x[int(d)] = pt[d];
      const auto jet = eval(s, x);
      std::cout << detail::fmt17(jet.value) << "\n";
      ordered_json params{{"family", family},   {"theta", theta}, {"b", arc_b},
                          {"level", plane_level}, {"n", cf_n},    {"eval", pt}};
      auto rep = report_json("closed-form", params, 0.0, empty_apex(),
                             ordered_json::array(), now_minus(t0));
      rep["value"] = jet.value;
      rep["gradient"] = std::vector<double>(jet.gradient.data(), jet.gradient.data() + 2);
      emit(out, rep, false);
      return 0;
    }

    if (*bowl_cmd) {
      const auto profile = bowl_profile<double>(bowl_n, bowl_rmax, bowl_dr);
      const double apex_dd = 2.0 * profile.u[1] / (profile.dr * profile.dr);
      std::cout << "u''(0) = " << detail::fmt17(apex_dd) << "\n";
      if (out.enabled) {
        std::ofstream csv(out.file("profile.csv"), std::ios::binary);
        if (!csv) throw IoError("cannot write profile.csv");
        csv << "r,u,du\n";
        for (std::size_t j = 0; j < profile.u.size(); ++j)
          csv << detail::fmt17(double(j) * profile.dr) << "," << detail::fmt17(profile.u[j])
              << "," << detail::fmt17(profile.du[j]) << "\n";
      }
      ordered_json params{{"n", bowl_n}, {"rmax", bowl_rmax}, {"dr", bowl_dr}};
      auto rep = report_json("bowl", params, 0.0, empty_apex(), ordered_json::array(),
                             now_minus(t0));
      rep["apex_second_derivative"] = apex_dd;
      emit(out, rep, false);
      return 0;
    }

    if (*rect) {
      auto [u, report] = solve_rectangle(rect_L, rect_b, rect_h, opt);
      export_field_files(out, u, true, true);
      const auto spec = apex_spectrum(u);
      ordered_json params{{"domain", "rectangle"}, {"L", rect_L}, {"b", rect_b}, {"h", rect_h},
                          {"steps", lambda_steps}};
      auto rep = report_json("solve-rect", params, report.final_residual, apex_json(spec, 2),
                             ordered_json::array(), now_minus(t0));
      rep["max_value"] = report.max_value;
      rep["near_critical_width"] = report.near_critical_width;
      emit(out, rep);
      return 0;
    }

    if (*ell) {
      const auto a = parse_list(ell_a);
      Eigen::VectorXd av = Eigen::Map<const Eigen::VectorXd>(a.data(), long(a.size()));
      auto [u, report] = solve_ellipsoid<double>(av, ell_R, ell_h, opt);
      export_field_files(out, u, true, true);
      const auto spec = apex_spectrum(u);
      ordered_json params{{"domain", "ellipsoid"}, {"a", a}, {"R", ell_R}, {"h", ell_h},
                          {"steps", lambda_steps}};
      auto rep = report_json("solve-ellipsoid", params, report.final_residual,
                             apex_json(spec, int(a.size())), ordered_json::array(),
                             now_minus(t0));
      rep["max_value"] = report.max_value;
      emit(out, rep);
      return 0;
    }

    if (*slab) {
      const auto a = parse_list(slab_a);
      Eigen::VectorXd av = Eigen::Map<const Eigen::VectorXd>(a.data(), long(a.size()));
      auto [u, report] = solve_slab<double>(av, slab_R, slab_b, slab_h, opt);
      export_field_files(out, u, true, false);
      const auto spec = apex_spectrum(u);
      ordered_json params{{"domain", "slab"}, {"a", a},     {"R", slab_R},
                          {"b", slab_b},      {"h", slab_h}, {"steps", lambda_steps}};
      auto rep = report_json("solve-slab", params, report.final_residual,
                             apex_json(spec, int(a.size()) + 1), ordered_json::array(),
                             now_minus(t0));
      rep["max_value"] = report.max_value;
      rep["near_critical_width"] = report.near_critical_width;
      emit(out, rep);
      return 0;
    }

    if (*wing_cmd) {
      const auto L = parse_list(wing_L);
      auto wing = construct(wing_b, wing_h, L, wing_cauchy, opt);
      export_field_files(out, wing.field, true, true);
      const auto slope = asymptotic_slope_check(wing);
      const auto convex = convexity_check(wing);
      const auto gauss = gauss_image_bounds(wing);
      AuditReport<> audits;
      audits.checks.push_back({"SLOPE", slope.pass, std::abs(slope.at_three_quarters),
                               slope.expected * 1.05, Vec3<>::Zero(), ""});
      audits.checks.push_back(
          {"CONVEXITY", convex.pass, convex.fraction, 0.99, Vec3<>::Zero(), ""});
      audits.checks.push_back({"GAUSS_RANGE", gauss.pass, gauss.max_first_slope, gauss.bound,
                               gauss.worst_location, ""});
      ordered_json params{{"domain", "rectangle"},
                          {"b", wing_b},
                          {"h", wing_h},
                          {"L", L.back()},
                          {"L_schedule", L},
                          {"cauchy_tol", wing_cauchy},
                          {"steps", lambda_steps}};
      auto rep = report_json("delta-wing", params, wing.reports.back().final_residual,
                             apex_json(wing.apex, 2), audits_json(audits), now_minus(t0));
      rep["theta_hat"] = wing.theta_hat;
      rep["k_small"] = wing.k_small;
      rep["cauchy_gap"] = wing.cauchy_gap;
      rep["certified_half_length"] = wing.certified_half_length;
      emit(out, rep);
      return audits.all_pass() ? 0 : 2;
    }

    if (*fmap_cmd) {
      const auto a = parse_list(fmap_a);
      auto result = f_map(SimplexPoint<>::of(a), fmap_lambda, fmap_h, opt);
      ordered_json params{{"a", a}, {"lambda", fmap_lambda}, {"h", fmap_h},
                          {"steps", lambda_steps}};
      auto rep = report_json("fmap", params, 0.0, apex_json(result.apex, result.a.n),
                             ordered_json::array(), now_minus(t0));
      rep["k"] = std::vector<double>(result.k.entries.data(),
                                     result.k.entries.data() + result.k.n);
      rep["R"] = result.radius;
      rep["monotone_in_radius"] = result.monotone_in_radius;
      emit(out, rep);
      return 0;
    }

    if (*inv_cmd) {
      const auto k = parse_list(inv_k);
      auto [a, result] = invert_f(SimplexPoint<>::of(k), inv_lambda, inv_h, inv_tol, opt);
      ordered_json params{{"k", k}, {"lambda", inv_lambda}, {"h", inv_h}, {"tol", inv_tol},
                          {"steps", lambda_steps}};
      auto rep = report_json("invert-fmap", params, 0.0, apex_json(result.apex, result.a.n),
                             ordered_json::array(), now_minus(t0));
      rep["a"] = std::vector<double>(a.entries.data(), a.entries.data() + a.n);
      rep["achieved_k"] = std::vector<double>(result.k.entries.data(),
                                              result.k.entries.data() + result.k.n);
      emit(out, rep);
      return 0;
    }

    if (*audit_cmd) {
      AuditReport<> audits;
      ordered_json params;
      ApexSpectrum<> spec;
      double residual_max = 0;
      int dim = 2;
      if (audit_domain == "rect") {
        auto [u, report] = solve_rectangle(a_L, a_b, a_h, opt);
        audits = audit_rectangle(u, opt);
        AffineWeight<> eta;
        eta.constant = a_b;
        eta.linear << 0.0, -1.0, 0.0;
        const auto ev = eta_v_max_audit(u, eta);
        audits.checks.push_back({"ETA_V", ev.pass, double(ev.violations), 0.0,
                                 ev.worst_location, "eta = b - y"});
        spec = apex_spectrum(u);
        residual_max = report.final_residual;
        params = {{"domain", "rectangle"}, {"L", a_L}, {"b", a_b}, {"h", a_h}};
      } else if (audit_domain == "ellipsoid") {
        const auto a = parse_list(a_a);
        Eigen::VectorXd av = Eigen::Map<const Eigen::VectorXd>(a.data(), long(a.size()));
        auto [u, report] = solve_ellipsoid<double>(av, a_R, a_h, opt);
        audits = audit_ellipsoid(u);
        spec = apex_spectrum(u);
        residual_max = report.final_residual;
        dim = int(a.size());
        params = {{"domain", "ellipsoid"}, {"a", a}, {"R", a_R}, {"h", a_h}};
      } else if (audit_domain == "slab") {
        const auto a = parse_list(a_a);
        Eigen::VectorXd av = Eigen::Map<const Eigen::VectorXd>(a.data(), long(a.size()));
        auto [u, report] = solve_slab<double>(av, a_R, a_b, a_h, opt);
        audits = audit_slab(u, opt);
        spec = apex_spectrum(u);
        residual_max = report.final_residual;
        dim = int(a.size()) + 1;
        params = {{"domain", "slab"}, {"a", a}, {"R", a_R}, {"b", a_b}, {"h", a_h}};
      } else {
        throw ConfigError("audit --domain must be rect, ellipsoid or slab");
      }
      params["steps"] = lambda_steps;
      auto rep = report_json("audit", params, residual_max, apex_json(spec, dim),
                             audits_json(audits), now_minus(t0));
      emit(out, rep);
      for (const auto& c : audits.checks)
        std::cout << c.id << ": " << (c.pass ? "pass" : "FAIL")
                  << " (measured=" << c.measured << ", tolerance=" << c.tolerance << ")\n";
      return audits.all_pass() ? 0 : 2;
    }

    if (*export_cmd) {
      std::ifstream in(fs::path(export_in) / "report.json");
      if (!in) throw IoError("cannot read report.json under " + export_in);
      ordered_json previous = ordered_json::parse(in);
      auto mask = mask_from_params(previous.at("params"));
      auto field = read_field_csv<double>(mask, (fs::path(export_in) / "field.csv").string());
      if (!out.enabled) throw ConfigError("export needs --out");
      for (const auto& fmt : parse_list_str(export_formats)) {
        if (fmt == "csv")
          write_field_csv(field, out.file("field.csv"));
        else if (fmt == "obj")
          write_field_obj(field, out.file("mesh.obj"));
        else if (fmt == "json")
          write_json(previous, out.file("report.json"));
        else
          throw ConfigError("unknown export format " + fmt);
      }
      return 0;
    }
  } catch (const SolverError<>& e) {
    ordered_json err{{"command", app.get_subcommands().front()->get_name()},
                     {"error", "solver"},
                     {"message", e.what()}};
    std::cerr << err.dump(2) << "\n";
    if (out.enabled) write_json(err, out.file("error.json"));
    return 2;
  } catch (const AccuracyError& e) {
    ordered_json err{{"command", app.get_subcommands().front()->get_name()},
                     {"error", "accuracy"},
                     {"message", e.what()}};
    std::cerr << err.dump(2) << "\n";
    if (out.enabled) write_json(err, out.file("error.json"));
    return 2;
  } catch (const std::exception& e) {
    ordered_json err{{"command", app.get_subcommands().empty()
                                     ? std::string("?")
                                     : app.get_subcommands().front()->get_name()},
                     {"error", "configuration"},
                     {"message", e.what()}};
    std::cerr << err.dump(2) << "\n";
    if (out.enabled) write_json(err, out.file("error.json"));
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
