#include "mtlab/cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "mtlab/error.hpp"
#include "mtlab/fem.hpp"
#include "mtlab/green.hpp"
#include "mtlab/hierarchy.hpp"
#include "mtlab/io.hpp"
#include "mtlab/kirchhoff_routh.hpp"
#include "mtlab/liouville.hpp"
#include "mtlab/parallel.hpp"
#include "mtlab/pohozaev.hpp"
#include "mtlab/radial.hpp"
#include "mtlab/reporter.hpp"

namespace mtlab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct RunConfig {
  std::string subcommand;
  std::string config_path;
  std::string out = ".";
  int threads = 0;
  unsigned long long seed = 20240901ULL;
  // radial
  std::vector<double> gammas;
  double gamma = 4.0;
  int mode = 0;
  int count = 4;
  double tol = 1e-12;
  // fem / identities
  double fem_h = 0.1;
  double identity_h = 0.05;
  int steps = 1;
  json domain;
  std::string domain_path;
  // kr
  int k = 1;
  int seeds = 200;
  // constants
  bool moments = false, full = false, profiles = false;
  double robin = 0.0;
  // pohozaev
  bool report = false;
  // report
  std::string branch, constants;

  json to_json() const {
    json j{{"subcommand", subcommand}, {"out", out}, {"threads", threads}, {"seed", seed}};
    if (subcommand == "constants")
      j.update({{"moments", moments}, {"full", full}, {"profiles", profiles}, {"robin", robin}});
    if (subcommand == "radial-branch") j.update({{"gammas", gammas}, {"tol", tol}});
    if (subcommand == "spectrum") j.update({{"gamma", gamma}, {"mode", mode}, {"count", count}, {"tol", tol}});
    if (subcommand == "fem-solve")
      j.update({{"gamma", gamma}, {"mesh_h", fem_h}, {"steps", steps}, {"count", count}, {"domain", domain}});
    if (subcommand == "pohozaev") j.update({{"report", report}, {"mesh_h", identity_h}});
    if (subcommand == "kr") j.update({{"k", k}, {"seeds", seeds}, {"domain", domain}});
    if (subcommand == "report") j.update({{"branch", branch}, {"constants", constants}});
    return j;
  }
};

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::ConfigInvalid, "field '" + field + "': " + why);
}

void validate(RunConfig& c) {
  if (c.threads < 0) invalid("threads", "must be >= 0");
  if (c.out.empty()) invalid("out", "must not be empty");
  if (!(c.tol > 0)) invalid("tol", "must be positive");
  if (!(c.fem_h > 0) || !(c.identity_h > 0)) invalid("mesh_h", "must be positive");
  const auto& s = c.subcommand;
  if (s == "radial-branch") {
    if (c.gammas.empty()) invalid("gammas", "gamma grid is empty");
    for (std::size_t i = 0; i < c.gammas.size(); ++i) {
      if (!(c.gammas[i] > 0)) invalid("gammas", "values must be positive");
      if (i > 0 && !(c.gammas[i] > c.gammas[i - 1])) invalid("gammas", "grid must be strictly ascending");
    }
  }
  if ((s == "spectrum" || s == "fem-solve") && !(c.gamma > 0)) invalid("gamma", "must be positive");
  if (s == "spectrum") {
    if (c.mode < 0) invalid("mode", "must be >= 0");
    if (c.count < 1 || c.count > 6) invalid("count", "must be in 1..6");
  }
  if (s == "fem-solve") {
    if (c.count < 1 || c.count > 8) invalid("count", "must be in 1..8");
    if (c.steps < 1) invalid("steps", "must be >= 1");
  }
  if (s == "kr") {
    if (c.k != 1 && c.k != 2) invalid("k", "must be 1 or 2");
    if (c.seeds < 50) invalid("seeds", "must be >= 50");
  }
  if ((s == "fem-solve" || s == "kr") && c.domain.is_null() && c.domain_path.empty())
    invalid("domain", "a domain is required");
  if (s == "report") {
    if (c.branch.empty()) invalid("branch", "path required");
    if (c.constants.empty()) invalid("constants", "path required");
  }
}

Domain load_domain(const RunConfig& c, Manifest& m) {
  if (!c.domain_path.empty()) {
    m.inputs.push_back(c.domain_path);
    return domain_from_json(read_json(c.domain_path));
  }
  return domain_from_json(c.domain);
}

struct Context {
  const RunConfig& cfg;
  Manifest& manifest;
  std::ostream& out;

  void write(const std::string& name, const std::string& contents) {
    fs::path p = fs::path(cfg.out) / name;
    atomic_write(p, contents);
    manifest.artifacts.push_back(p.string());
  }
  void check(const std::string& id, bool pass, const std::string& detail) {
    manifest.checks.push_back({id, pass ? "PASS" : "FAIL", detail});
  }
  void verdict(const std::string& id, Verdict v, const std::string& detail) {
    if (v == Verdict::Info) return;
    manifest.checks.push_back({id, to_string(v), detail});
  }
};

std::string sci(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << std::scientific << v;
  return os.str();
}

// ---- constants

void cmd_constants(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  bool moments = c.moments, full = c.full;
  if (!c.moments && !c.full && !c.profiles) moments = full = true;
  if (moments) {
    CsvTable t({"tag", "value", "error_estimate", "exact", "abs_error"});
    for (MomentTag tag : moment_catalog()) {
      BubbleMoment bm = moment(tag, 1e-10);
      double exact = moment_exact(tag);
      t.row().add(bm.name).add(bm.value).add(bm.error);
      if (std::isnan(exact)) {
        t.add(std::string()).add(std::string());
      } else {
        double err = std::abs(bm.value - exact);
        t.add(exact).add(err);
        ctx.check("moment_" + bm.name, err <= 1e-8, "abs error " + sci(err));
      }
    }
    ctx.write("moments.csv", t.str());
  }
  if (full) {
    ExpansionConstants k = expansion_constants(c.robin);
    json j;
    for (int i = 0; i < 6; ++i) j["A" + std::to_string(i + 1)] = k.A[i];
    for (int i = 0; i < 3; ++i) j["B" + std::to_string(i + 1)] = k.B[i];
    j["c0"] = k.c0;
    json e;
    for (int i = 0; i < 6; ++i) e["A" + std::to_string(i + 1)] = k.A_err[i];
    for (int i = 0; i < 3; ++i) e["B" + std::to_string(i + 1)] = k.B_err[i];
    e["c0"] = k.c0_err;
    j["errors"] = e;
    j["robin_at_peak"] = k.robin_at_peak;
    double q1 = scalar_integral_quarter(QuarterKind::Log), q2 = scalar_integral_quarter(QuarterKind::LogSquared);
    j["quarter_log"] = q1;
    j["quarter_log_squared"] = q2;
    ctx.check("c0_equals_4pi", std::abs(k.c0 - 4 * kPi) <= 1e-4, "c0 - 4pi = " + sci(k.c0 - 4 * kPi));
    ctx.check("quarter_log", std::abs(q1 - 0.25) <= 1e-10, "value " + format_number(q1));
    ctx.check("quarter_log_squared", std::abs(q2 - 0.75) <= 1e-10, "value " + format_number(q2));
    ctx.write("constants.json", j.dump(2) + "\n");
  }
  if (c.profiles) {
    Hierarchy h = hierarchy_profiles();
    CsvTable t({"r", "v0", "k0", "s0"});
    const auto& r = h.v0.grid->r();
    for (std::size_t i = 0; i < r.size(); ++i) t.row().add(r[i]).add(h.v0.values[i]).add(h.k0.values[i]).add(h.s0.values[i]);
    ctx.write("profiles.csv", t.str());
  }
}

// ---- radial

void cmd_radial_branch(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  std::vector<BranchPoint> pts(c.gammas.size());
  std::vector<SpectrumReport> specs(c.gammas.size());
  parallel_chunks(c.gammas.size(), [&](std::size_t b, std::size_t e, int) {
    for (std::size_t i = b; i < e; ++i) {
      pts[i] = solve_branch_point(c.gammas[i], c.tol);
      specs[i] = radial_spectrum(pts[i], 1, 2);
    }
  });
  CsvTable t({"gamma", "lambda", "theta", "energy", "C_lambda", "mu1", "mu2_m1", "mu2_m0", "mu_error",
              "residual", "morse_index"});
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double mu[3] = {NAN, NAN, NAN}, err = 0;
    for (const auto& en : specs[i].entries) {
      int slot = en.mode == 0 ? (en.index == 0 ? 0 : en.index == 1 ? 2 : -1) : (en.index == 0 ? 1 : -1);
      if (slot < 0) continue;
      mu[slot] = en.mu;
      err = std::max(err, en.error);
    }
    t.row().add(pts[i].gamma).add(pts[i].lambda).add(pts[i].theta).add(pts[i].energy).add(pts[i].c_lambda);
    t.add(mu[0]).add(mu[1]).add(mu[2]).add(err).add(pts[i].residual_norm).add(specs[i].morse_index);
  }
  ctx.write("branch.csv", t.str());
}

void cmd_spectrum(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  BranchPoint bp = solve_branch_point(c.gamma, c.tol);
  auto evs = mode_eigenvalues(bp, c.mode, c.count);
  CsvTable t({"gamma", "mode", "index", "mu", "error", "distance_to_one"});
  for (std::size_t i = 0; i < evs.size(); ++i)
    t.row().add(c.gamma).add(c.mode).add(int(i)).add(evs[i].mu).add(evs[i].error).add(evs[i].mu - 1);
  ctx.write("spectrum.csv", t.str());
}

// ---- fem

void cmd_fem_solve(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  Domain d = load_domain(c, ctx.manifest);
  FemOptions o;
  o.h = c.fem_h;
  auto states = solve_2d_branch(d, c.gamma, c.steps, o);
  const FemState& s = states.back();
  SpectrumReport spec = spectrum_2d(s, c.count);

  std::ostringstream mesh;
  write_mesh(*s.mesh, mesh);
  ctx.write("fem_mesh.txt", mesh.str());
  CsvTable sol({"node", "x", "y", "u"});
  for (std::size_t i = 0; i < s.mesh->nodes.size(); ++i)
    sol.row().add(int(i)).add(s.mesh->nodes[i][0]).add(s.mesh->nodes[i][1]).add(s.u[i]);
  ctx.write("fem_solution.csv", sol.str());

  json j;
  j["domain"] = domain_to_json(d);
  j["gamma"] = s.gamma;
  j["lambda"] = s.lambda;
  j["x_lambda"] = {s.x_lambda[0], s.x_lambda[1]};
  j["energy"] = s.energy;
  j["J"] = s.J_value;
  j["residual"] = s.residual_norm;
  j["newton_iterations"] = s.newton_iterations;
  j["mesh_h"] = s.mesh_h;
  j["nodes"] = s.mesh->nodes.size();
  j["morse_index"] = spec.morse_index;
  json mus = json::array(), errs = json::array();
  for (const auto& e : spec.entries) {
    mus.push_back(e.mu);
    errs.push_back(e.error);
  }
  j["mu"] = mus;
  j["mu_residual"] = errs;
  json path = json::array();
  for (const auto& st : states) path.push_back({{"gamma", st.gamma}, {"lambda", st.lambda}});
  j["branch"] = path;
  ctx.write("fem_report.json", j.dump(2) + "\n");
}

// ---- pohozaev

void cmd_pohozaev(Context& ctx) {
  CsvTable t({"check", "lhs", "rhs", "gap", "tolerance", "pass"});
  auto row = [&](const std::string& id, double lhs, double rhs, double gap, double tol) {
    bool pass = gap <= tol;
    t.row().add(id).add(lhs).add(rhs).add(gap).add(tol).add(std::string(pass ? "true" : "false"));
    ctx.check(id, pass, "gap " + sci(gap) + " tol " + sci(tol));
  };

  Domain disk = Domain::unit_disk();
  GreenOracle g(disk, GreenMethod::ClosedFormDisk);
  Vec2 x0(0.3, 0.1);
  FieldFn G{[&](const Vec2& y) { return g.green(x0, y); }, [&](const Vec2& y) { return g.green_grad_y(x0, y); }};
  double p = p_form(G, G, x0, 0.1, disk).value;
  row("green_p_disk", p, -1 / (2 * kPi), std::abs(p + 1 / (2 * kPi)), 1e-6);
  Vec2 dR = g.robin_grad(x0);
  for (int i = 0; i < 2; ++i) {
    double q = q_form(G, G, x0, 0.1, i, disk).value;
    row("green_q" + std::to_string(i) + "_disk", q, -dR[i], std::abs(q + dR[i]), 1e-5);
  }
  double dev = radius_independence_check(G, G, x0, {0.05, 0.1, 0.2}, disk);
  row("radius_independence_disk", 0.0, 0.0, dev, 1e-8);

  BranchPoint bp = solve_branch_point(5.0);
  auto rid = solution_identity_check(bp, 0.3);
  row("radial_puu_gamma5", rid.p.lhs, rid.p.rhs, rid.p.gap, 1e-6);
  for (int i = 0; i < 2; ++i) {
    const auto& q = rid.q[i];
    row("radial_quu" + std::to_string(i) + "_gamma5", q.lhs, q.rhs, std::max(std::abs(q.lhs), std::abs(q.rhs)),
        1e-10);
  }

  FemOptions o;
  o.h = ctx.cfg.identity_h;
  FemState s = solve_2d_branch(Domain::rectangle(2, 2), 4.0, 1, o).back();
  auto fid = solution_identity_check(s, 0.25);
  row("fem_puu_square_gamma4", fid.p.lhs, fid.p.rhs, fid.p.gap, 1e-3);
  for (int i = 0; i < 2; ++i)
    row("fem_quu" + std::to_string(i) + "_square_gamma4", fid.q[i].lhs, fid.q[i].rhs, fid.q[i].gap, 1e-3);
  ctx.write("pohozaev.csv", t.str());
}

// ---- kr

void cmd_kr(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  Domain d = load_domain(c, ctx.manifest);
  GreenOracle g = GreenOracle::for_domain(d);
  KrSearchOptions opt;
  opt.rng_seed = c.seed;
  CriticalPointSet set = find_critical_points(g, c.k, c.seeds, opt);
  json j;
  j["domain"] = domain_to_json(d);
  j["k"] = set.k;
  j["seeds"] = set.seeds;
  j["rng_seed"] = set.rng_seed;
  j["dedup_radius"] = set.dedup_radius;
  j["converged_seeds"] = set.converged_seeds;
  json pts = json::array();
  for (const auto& p : set.points) {
    json e;
    json locs = json::array();
    for (const auto& y : p.points) locs.push_back({y[0], y[1]});
    e["locations"] = locs;
    e["alphas"] = p.alphas;
    e["phi"] = p.value;
    e["gradient_norm"] = p.gradient_norm;
    std::vector<double> ev(p.hessian_eigenvalues.data(), p.hessian_eigenvalues.data() + p.hessian_eigenvalues.size());
    e["hessian_eigenvalues"] = ev;
    int neg = 0;
    for (double v : ev) neg += v < 0;
    e["type"] = neg == 0 ? "minimum" : neg == int(ev.size()) ? "maximum" : "saddle";
    pts.push_back(e);
  }
  j["points"] = pts;
  j["count"] = set.points.size();
  ctx.write("kr.json", j.dump(2) + "\n");
}

// ---- report

void cmd_report(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  ctx.manifest.inputs.push_back(c.branch);
  ctx.manifest.inputs.push_back(c.constants);
  CsvData br = read_csv(c.branch);
  json cj = read_json(c.constants);
  ExpansionConstants k;
  try {
    for (int i = 0; i < 3; ++i) k.B[i] = cj.at("B" + std::to_string(i + 1)).get<double>();
  } catch (const json::exception& e) {
    invalid("constants", std::string("B1..B3 missing or not numbers: ") + e.what());
  }

  std::vector<BranchSample> samples;
  std::vector<TrendSample> trends;
  for (std::size_t r = 0; r < br.rows.size(); ++r) {
    BranchSample s{br.number(r, "gamma"), br.number(r, "lambda"), br.number(r, "C_lambda")};
    samples.push_back(s);
    double err = br.number(r, "mu_error");
    TrendSample t;
    t.gamma = s.gamma;
    t.theta = br.number(r, "theta");
    auto add = [&](int mode, int index, const char* col) {
      double mu = br.number(r, col);
      if (!std::isnan(mu)) t.spectrum.entries.push_back({mode, index, mu, err, mode ? 2 : 1, mu - 1, false});
    };
    add(0, 0, "mu1");
    add(1, 0, "mu2_m1");
    add(0, 1, "mu2_m0");
    trends.push_back(t);
  }

  // Λ from the closed-form disk Robin Hessian at the peak
  GreenOracle disk(Domain::unit_disk(), GreenMethod::ClosedFormDisk);
  Mat2 hess = disk.robin_hess(Vec2::Zero());
  TrendOptions topt;
  topt.robin_hessian_trace_half = 0.5 * hess.trace();

  std::vector<FitReport> reports;
  auto guarded = [&](const std::string& id, auto&& fit) {
    try {
      reports.push_back(fit());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientPoints) throw;
      FitReport skipped;
      skipped.id = id;
      skipped.verdict = Verdict::Skipped;
      FitCoefficient note;
      note.name = "INSUFFICIENT_POINTS";
      note.note = e.what();
      note.verdict = Verdict::Skipped;
      skipped.coefficients.push_back(note);
      reports.push_back(skipped);
    }
  };
  guarded("lambda_gamma", [&] { return fit_lambda_gamma(samples, k); });
  guarded("c_lambda", [&] { return fit_c_lambda(samples); });
  guarded("eigenvalue_trends", [&] { return eigenvalue_trends(trends, topt); });

  json out = json::array();
  std::ostringstream table;
  table << std::left << std::setw(20) << "fit" << std::setw(34) << "coefficient" << std::setw(16) << "value"
        << std::setw(16) << "predicted" << std::setw(12) << "rel_error" << std::setw(10) << "tol"
        << "verdict\n";
  for (const auto& r : reports) {
    json jr{{"id", r.id}, {"verdict", to_string(r.verdict)}, {"rss_full", r.rss_full},
            {"rss_nested", r.rss_nested}, {"nested_supported", r.nested_supported}};
    json coeffs = json::array();
    for (const auto& co : r.coefficients) {
      coeffs.push_back({{"name", co.name}, {"value", co.value}, {"std_error", co.std_error},
                        {"predicted", co.predicted}, {"rel_error", co.rel_error}, {"tolerance", co.tolerance},
                        {"verdict", to_string(co.verdict)}, {"note", co.note}});
      ctx.verdict(r.id + "." + co.name, co.verdict, "value " + format_number(co.value) + " predicted " +
                                                        format_number(co.predicted) + " " + co.note);
      table << std::left << std::setw(20) << r.id << std::setw(34) << co.name << std::setw(16)
            << std::setprecision(9) << co.value << std::setw(16) << co.predicted << std::setw(12)
            << std::setprecision(3) << co.rel_error << std::setw(10) << co.tolerance << to_string(co.verdict)
            << "\n";
    }
    jr["coefficients"] = coeffs;
    if ((r.id == "lambda_gamma" || r.id == "c_lambda") && r.verdict != Verdict::Skipped)
      ctx.check(r.id + ".nested_model", r.nested_supported,
                "rss " + sci(r.rss_full) + " vs reduced " + sci(r.rss_nested));
    out.push_back(jr);
  }
  ctx.write("report.json", json{{"fits", out}}.dump(2) + "\n");
  ctx.write("report.txt", table.str());
  ctx.out << table.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto t0 = std::chrono::steady_clock::now();
  RunConfig cfg;
  CLI::App app{"Moser–Trudinger concentration laboratory"};
  app.require_subcommand(0, 1);
  std::map<std::string, std::map<std::string, CLI::Option*>> opts;
  auto global = [&](const std::string& key, CLI::Option* o) { opts[""][key] = o; };
  global("config", app.add_option("--config", cfg.config_path, "JSON run configuration"));
  global("out", app.add_option("--out", cfg.out, "output directory"));
  global("threads", app.add_option("--threads", cfg.threads, "worker threads (0: MTLAB_THREADS or 1)"));
  global("seed", app.add_option("--seed", cfg.seed, "multistart RNG seed"));

  auto sub = [&](const std::string& name, const std::string& help) {
    auto* s = app.add_subcommand(name, help);
    s->fallthrough();
    return s;
  };
  auto* constants = sub("constants", "bubble moments, expansion constants, hierarchy profiles");
  opts["constants"]["moments"] = constants->add_flag("--moments", cfg.moments, "moment catalog CSV");
  opts["constants"]["full"] = constants->add_flag("--full", cfg.full, "A1..A6, B1..B3, c0 JSON");
  opts["constants"]["profiles"] = constants->add_flag("--profiles", cfg.profiles, "v0, k0, s0 CSV");
  opts["constants"]["robin"] = constants->add_option("--robin", cfg.robin, "Robin value at the peak");

  auto* radial = sub("radial-branch", "radial branch on the unit disk");
  opts["radial-branch"]["gammas"] = radial->add_option("--gammas", cfg.gammas, "comma separated")->delimiter(',');
  opts["radial-branch"]["tol"] = radial->add_option("--tol", cfg.tol);

  auto* spectrum = sub("spectrum", "radial eigenvalues of one angular mode");
  opts["spectrum"]["gamma"] = spectrum->add_option("--gamma", cfg.gamma);
  opts["spectrum"]["mode"] = spectrum->add_option("--mode", cfg.mode);
  opts["spectrum"]["count"] = spectrum->add_option("--count", cfg.count);
  opts["spectrum"]["tol"] = spectrum->add_option("--tol", cfg.tol);

  auto* fem = sub("fem-solve", "2-D finite element solution and spectrum");
  opts["fem-solve"]["domain"] = fem->add_option("--domain", cfg.domain_path, "domain JSON file");
  opts["fem-solve"]["gamma"] = fem->add_option("--gamma", cfg.gamma);
  opts["fem-solve"]["mesh_h"] = fem->add_option("--mesh-h", cfg.fem_h, "log-polar mesh step");
  opts["fem-solve"]["steps"] = fem->add_option("--steps", cfg.steps, "continuation steps");
  opts["fem-solve"]["count"] = fem->add_option("--count", cfg.count, "eigenvalues");

  auto* poho = sub("pohozaev", "Pohozaev form and identity checks");
  opts["pohozaev"]["report"] = poho->add_flag("--report", cfg.report, "write the check table");
  opts["pohozaev"]["mesh_h"] = poho->add_option("--mesh-h", cfg.identity_h, "mesh step of the square FEM check");

  auto* kr = sub("kr", "Kirchhoff-Routh critical points");
  opts["kr"]["domain"] = kr->add_option("--domain", cfg.domain_path, "domain JSON file");
  opts["kr"]["k"] = kr->add_option("--k", cfg.k);
  opts["kr"]["seeds"] = kr->add_option("--seeds", cfg.seeds);

  auto* report = sub("report", "fit branch data against the expansions");
  opts["report"]["branch"] = report->add_option("--branch", cfg.branch, "branch CSV");
  opts["report"]["constants"] = report->add_option("--constants", cfg.constants, "constants JSON");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ExitOk;
  } catch (const CLI::ParseError& e) {
    err << "CONFIG_INVALID: " << e.what() << "\n";
    return ExitConfigInvalid;
  }

  Manifest manifest;
  for (std::size_t i = 1; i < args.size(); ++i) manifest.argv.push_back(args[i]);
  try {
    auto chosen = app.get_subcommands();
    if (!chosen.empty()) cfg.subcommand = chosen.front()->get_name();

    if (!cfg.config_path.empty()) {
      json j = read_json(cfg.config_path);
      manifest.inputs.push_back(cfg.config_path);
      if (!j.is_object()) invalid("config", "top level must be an object");
      if (j.contains("subcommand")) {
        if (!j["subcommand"].is_string()) invalid("subcommand", "must be a string");
        std::string s = j["subcommand"];
        if (cfg.subcommand.empty()) cfg.subcommand = s;
        else if (s != cfg.subcommand) invalid("subcommand", "config says '" + s + "', command line '" + cfg.subcommand + "'");
      }
      if (!opts.count(cfg.subcommand) || cfg.subcommand.empty()) invalid("subcommand", "unknown or missing");
      std::map<std::string, std::function<void(const json&)>> set = {
          {"out", [&](const json& v) { cfg.out = v.get<std::string>(); }},
          {"threads", [&](const json& v) { cfg.threads = v.get<int>(); }},
          {"seed", [&](const json& v) { cfg.seed = v.get<unsigned long long>(); }},
          {"gammas", [&](const json& v) { cfg.gammas = v.get<std::vector<double>>(); }},
          {"gamma", [&](const json& v) { cfg.gamma = v.get<double>(); }},
          {"mode", [&](const json& v) { cfg.mode = v.get<int>(); }},
          {"count", [&](const json& v) { cfg.count = v.get<int>(); }},
          {"tol", [&](const json& v) { cfg.tol = v.get<double>(); }},
          {"steps", [&](const json& v) { cfg.steps = v.get<int>(); }},
          {"k", [&](const json& v) { cfg.k = v.get<int>(); }},
          {"seeds", [&](const json& v) { cfg.seeds = v.get<int>(); }},
          {"moments", [&](const json& v) { cfg.moments = v.get<bool>(); }},
          {"full", [&](const json& v) { cfg.full = v.get<bool>(); }},
          {"profiles", [&](const json& v) { cfg.profiles = v.get<bool>(); }},
          {"robin", [&](const json& v) { cfg.robin = v.get<double>(); }},
          {"report", [&](const json& v) { cfg.report = v.get<bool>(); }},
          {"branch", [&](const json& v) { cfg.branch = v.get<std::string>(); }},
          {"constants", [&](const json& v) { cfg.constants = v.get<std::string>(); }},
          {"mesh_h", [&](const json& v) { (cfg.subcommand == "pohozaev" ? cfg.identity_h : cfg.fem_h) = v.get<double>(); }},
          {"domain",
           [&](const json& v) {
             if (v.is_string()) cfg.domain_path = v.get<std::string>();
             else if (v.is_object()) cfg.domain = v;
             else invalid("domain", "must be an object or a file path");
           }},
      };
      for (const auto& [key, value] : j.items()) {
        if (key == "subcommand" || key == "config") continue;
        CLI::Option* o = opts[""].count(key) ? opts[""][key]
                         : opts[cfg.subcommand].count(key) ? opts[cfg.subcommand][key] : nullptr;
        if (!o || !set.count(key)) invalid(key, "not accepted by '" + cfg.subcommand + "'");
        if (o->count() > 0) continue;  // the command line wins
        try {
          set[key](value);
        } catch (const json::exception& e) {
          invalid(key, std::string("wrong type: ") + e.what());
        }
      }
    }
    if (cfg.subcommand.empty()) invalid("subcommand", "none given");
    validate(cfg);
  } catch (const Error& e) {
    err << e.what() << "\n";
    return e.code() == ErrorCode::ConfigInvalid ? ExitConfigInvalid : ExitModuleError;
  }

  if (cfg.threads > 0) set_thread_count(cfg.threads);
  manifest.subcommand = cfg.subcommand;
  manifest.config = cfg.to_json();
  manifest.seed = cfg.seed;
  manifest.threads = thread_count();

  Context ctx{cfg, manifest, out};
  int status = ExitOk;
  std::string failure;
  try {
    if (cfg.subcommand == "constants") cmd_constants(ctx);
    else if (cfg.subcommand == "radial-branch") cmd_radial_branch(ctx);
    else if (cfg.subcommand == "spectrum") cmd_spectrum(ctx);
    else if (cfg.subcommand == "fem-solve") cmd_fem_solve(ctx);
    else if (cfg.subcommand == "pohozaev") cmd_pohozaev(ctx);
    else if (cfg.subcommand == "kr") cmd_kr(ctx);
    else if (cfg.subcommand == "report") cmd_report(ctx);
    for (const auto& c : manifest.checks)
      if (c.verdict == "FAIL") status = ExitChecksFailed;
  } catch (const Error& e) {
    failure = e.what();
    status = e.code() == ErrorCode::ConfigInvalid ? ExitConfigInvalid : ExitModuleError;
  }
  if (cfg.threads > 0) set_thread_count(0);

  for (const auto& c : manifest.checks) out << c.verdict << "  " << c.id << "  " << c.detail << "\n";
  if (!failure.empty()) err << failure << "\n";

  manifest.exit_status = status;
  manifest.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  json mj = manifest.to_json();
  if (!failure.empty()) mj["error"] = failure;
  try {
    atomic_write(fs::path(cfg.out) / (cfg.subcommand + ".manifest.json"), mj.dump(2) + "\n");
  } catch (const Error& e) {
    err << e.what() << "\n";
    if (status == ExitOk) status = ExitModuleError;
  }
  return status;
}

}  // namespace mtlab
