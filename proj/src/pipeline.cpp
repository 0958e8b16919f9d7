#include "hjn/pipeline.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "hjn/asymptotics.hpp"
#include "hjn/ergodic.hpp"
#include "hjn/evolution.hpp"
#include "hjn/skorokhod.hpp"
#include "hjn/version.hpp"

namespace hjn {

const char* to_string(ClaimStatus s) {
  switch (s) {
    case ClaimStatus::Pass: return "PASS";
    case ClaimStatus::Fail: return "FAIL";
    case ClaimStatus::Info: return "INFO";
  }
  return "?";
}

bool PipelineResult::all_pass() const {
  return std::none_of(claims.begin(), claims.end(), [](const Claim& c) { return c.status == ClaimStatus::Fail; });
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }
std::string short_num(double v) { return fmt::format("{:.4g}", v + 0.0); }

std::string coords(Vec x, int dim) { return dim == 2 ? num(x.x) + "," + num(x.y) : num(x.x); }
std::string coord_header(const char* prefix, int dim) {
  return dim == 2 ? fmt::format("{0}x,{0}y", prefix) : fmt::format("{}x", prefix);
}

class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
  }
  void write(const std::string& name, const std::function<void(std::ostream&)>& fill) {
    std::ofstream out(root_ / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + (root_ / name).string());
    fill(out);
    files_.push_back(name);
  }
  const std::filesystem::path& root() const { return root_; }
  const std::vector<std::string>& files() const { return files_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct Context {
  const ScenarioConfig& cfg;
  std::vector<Claim> claims;

  void claim(std::string name, bool pass, std::string detail) {
    claims.push_back({std::move(name), pass ? ClaimStatus::Pass : ClaimStatus::Fail, std::move(detail)});
  }
  void info(std::string name, std::string detail) {
    claims.push_back({std::move(name), ClaimStatus::Info, std::move(detail)});
  }
  // Numerical stages that throw are reported, not propagated.
  template <class Fn>
  bool guarded(const std::string& stage, Fn&& fn) {
    try {
      fn();
      return true;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::ObliquenessViolated ||
          e.code() == ErrorCode::CflViolation) {
        throw;
      }
      claim(stage, false, e.what());
      return false;
    }
  }
};

double sup_against(const GridFunction& u, const ScalarField& f) {
  double gap = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) gap = std::max(gap, std::abs(u[k] - f(u.grid().node(k))));
  return gap;
}

std::vector<std::size_t> distance_sources(const Grid& grid, int skip) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto [i, j] = grid.coords(k);
    const bool keep_i = i % skip == 0 || i == grid.nx();
    const bool keep_j = grid.dimension() == 1 || j % skip == 0 || j == grid.ny();
    if (keep_i && keep_j) out.push_back(k);
  }
  return out;
}

void write_modulus(std::ostream& out, const ModulusEstimate& m) {
  out << "r,raw_min,envelope,samples\n";
  for (const auto& b : m.bins) out << fmt::format("{},{},{},{}\n", num(b.r), num(b.raw_min), num(b.envelope), b.samples);
}

bool aubry_matches(const ScenarioConfig& cfg, const Grid& grid, const AubrySet& a, std::string& detail) {
  std::vector<std::size_t> flagged = a.nodes;
  std::sort(flagged.begin(), flagged.end());
  if (*cfg.expect_aubry == "all") {
    detail = fmt::format("{} of {} sources flagged", flagged.size(), a.sources.size());
    return flagged.size() == a.sources.size();
  }
  const std::vector<Vec> pts = parse_points(*cfg.expect_aubry);
  const int slack = cfg.expect_aubry_slack;
  auto near = [&](std::size_t k, std::size_t centre) {
    const auto [i, j] = grid.coords(k);
    const auto [ci, cj] = grid.coords(centre);
    return std::abs(i - ci) <= slack && std::abs(j - cj) <= slack;
  };
  bool ok = true;
  for (Vec p : pts) {
    const std::size_t centre = grid.nearest(p);
    ok = ok && std::any_of(flagged.begin(), flagged.end(), [&](std::size_t k) { return near(k, centre); });
  }
  std::size_t stray = 0;
  for (std::size_t k : flagged) {
    if (std::none_of(pts.begin(), pts.end(), [&](Vec p) { return near(k, grid.nearest(p)); })) ++stray;
  }
  detail = fmt::format("{} nodes flagged, {} outside the expected neighbourhood (source-residual proxy)", flagged.size(), stray);
  return ok && stray == 0;
}

PipelineResult finish(const ScenarioConfig& cfg, const std::vector<Claim>& claims,
                      const std::vector<StageTiming>& timings, OutputDir& out, unsigned jobs) {
  PipelineResult result{claims, timings, {}, out.root()};
  out.write("verdict.txt", [&](std::ostream& o) {
    o << fmt::format("scenario: {}\n{}\n\n", cfg.name, cfg.description);
    for (const auto& cl : result.claims) o << fmt::format("{}  {}: {}\n", to_string(cl.status), cl.name, cl.detail);
    o << fmt::format("\noverall: {}\n", result.all_pass() ? "PASS" : "FAIL");
  });
  result.files = out.files();

  nlohmann::ordered_json manifest;
  manifest["scenario"] = cfg.name;
  manifest["config"] = cfg.to_text();
  manifest["versions"] = {{"hjn", kVersion},
                          {"fmt", FMT_VERSION},
                          {"compiler", __VERSION__},
                          {"openssl", OPENSSL_VERSION_TEXT}};
  manifest["seeds"] = {{"run", cfg.seed}, {"search", cfg.seed}, {"structure_checks", cfg.seed}};
  manifest["jobs"] = jobs;
  for (const auto& t : timings) manifest["timings_seconds"][t.stage] = t.seconds;
  manifest["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& cl : result.claims) {
    manifest["verdicts"].push_back({{"claim", cl.name}, {"status", to_string(cl.status)}, {"detail", cl.detail}});
  }
  manifest["overall"] = result.all_pass() ? "PASS" : "FAIL";
  manifest["files"] = nlohmann::ordered_json::array();
  for (const auto& f : result.files) {
    const auto path = out.root() / f;
    manifest["files"].push_back(
        {{"name", f}, {"bytes", std::filesystem::file_size(path)}, {"sha256", sha256_file(path)}});
  }
  std::ofstream(out.root() / "manifest.json") << manifest.dump(2) << "\n";
  return result;
}

}  // namespace

PipelineResult run_pipeline(const ScenarioConfig& config_in, const RunOptions& options) {
  ScenarioConfig cfg = config_in;
  if (options.seed) cfg.seed = *options.seed;
  const unsigned jobs = std::max(1u, options.jobs);

  OutputDir out(options.out_dir);
  Context ctx{cfg, {}};
  std::vector<StageTiming> timings;
  Stopwatch watch;
  auto stage_done = [&](const char* name) { timings.push_back({name, watch.lap()}); };

  // Assumptions and discretization ------------------------------------------
  const Domain domain = cfg.make_domain();
  const HamiltonianSpec ham = cfg.make_hamiltonian();
  const BoundaryData bc = cfg.make_boundary();
  const int dim = domain.dimension();

  const auto obliq = check_obliqueness(domain, bc, 64);
  if (!obliq.pass) {
    throw Error(ErrorCode::ObliquenessViolated,
                fmt::format("nu . gamma = {} on face {} at ({}, {})", obliq.min_inner, to_string(obliq.worst_face),
                            obliq.worst_point.x, obliq.worst_point.y));
  }
  const auto cont = check_continuity(domain, bc, 64, cfg.tol_continuity);
  const double p_bound = ham.p_bound();
  const auto convex = check_convexity(ham, 2000, 2.0 * p_bound + 1.0, cfg.seed);
  const auto coercive = check_coercivity(ham, 2.0 * p_bound + 1.0, 64);

  const Grid grid = Grid::with_spacing(domain, cfg.h);
  const ScalarField u0_field = ScalarField::parse(cfg.u0);
  const GridFunction u0 = GridFunction::sample(grid, [&](Vec x) { return u0_field(x); });
  const Scheme scheme(ham, bc, grid, scheme_radius(ham, bc, u0), cfg.dt);

  out.write("assumptions.csv", [&](std::ostream& o) {
    o << "check,value,pass\n";
    o << fmt::format("obliqueness_min_inner,{},{}\n", num(obliq.min_inner), obliq.pass ? 1 : 0);
    o << fmt::format("continuity_gamma_jump,{},{}\n", num(cont.max_gamma_jump), cont.pass ? 1 : 0);
    o << fmt::format("continuity_g_jump,{},{}\n", num(cont.max_g_jump), cont.pass ? 1 : 0);
    o << fmt::format("convexity_max_violation,{},{}\n", num(convex.max_violation), convex.pass ? 1 : 0);
    o << fmt::format("coercivity_min_value,{},{}\n", num(coercive.min_value), coercive.pass ? 1 : 0);
    o << fmt::format("scheme_dt,{},1\n", num(scheme.dt()));
    o << fmt::format("scheme_cfl_limit,{},1\n", num(scheme.cfl_limit()));
  });
  ctx.claim("assumptions", cont.pass && convex.pass && coercive.pass,
            fmt::format("min nu.gamma {}, convexity violation {}, coercivity min {}", short_num(obliq.min_inner),
                        short_num(convex.max_violation), short_num(coercive.min_value)));
  stage_done("assumptions");

  // Critical value --------------------------------------------------------------
  CriticalValueParams cp;
  cp.t1 = cfg.critical_t1;
  cp.t2 = cfg.critical_t2;
  cp.lambdas = cfg.lambdas;
  cp.bound = cfg.critical_bound;
  std::optional<CriticalValue> lta, disc;
  ctx.guarded("critical value (LongTimeAverage)", [&] { lta = critical_value(scheme, CriticalMethod::LongTimeAverage, cp); });
  ctx.guarded("critical value (SmallDiscount)", [&] { disc = critical_value(scheme, CriticalMethod::SmallDiscount, cp); });
  out.write("critical_value.csv", [&](std::ostream& o) {
    o << "method,kind,param,value\n";
    for (const auto* cv : {&lta, &disc}) {
      if (!*cv) continue;
      const char* m = to_string((*cv)->method);
      o << fmt::format("{},estimate,,{}\n{},uncertainty,,{}\n", m, num((*cv)->c), m, num((*cv)->uncertainty));
      for (const auto& [param, v] : (*cv)->raw) o << fmt::format("{},raw,{},{}\n", m, num(param), num(v));
    }
  });
  stage_done("critical_value");
  if (!lta && !disc) {
    // Nothing downstream is meaningful without c.
    return finish(cfg, ctx.claims, timings, out, jobs);
  }
  const CriticalValue cv = lta ? *lta : *disc;
  const double c = cv.c;
  if (lta && disc) {
    const double gap = std::abs(lta->c - disc->c);
    ctx.claim("critical value agreement", gap <= cfg.critical_agreement,
              fmt::format("LongTimeAverage {} vs SmallDiscount {} (gap {}, bound {})", short_num(lta->c),
                          short_num(disc->c), short_num(gap), cfg.critical_agreement));
  }
  if (cfg.expect_c) {
    ctx.claim("critical value", std::abs(c - *cfg.expect_c) <= cfg.expect_c_tolerance,
              fmt::format("c = {} (expected {} +- {})", short_num(c), *cfg.expect_c, cfg.expect_c_tolerance));
  } else {
    ctx.info("critical value", fmt::format("c = {}", short_num(c)));
  }

  // Structural conditions at c ---------------------------------------------------
  std::vector<ModulusEstimate> modulus;
  for (ModulusSign sign : {ModulusSign::Plus, ModulusSign::Minus}) {
    ModulusCheckParams mp;
    mp.n_points = static_cast<std::size_t>(cfg.modulus_points);
    mp.perturbations = static_cast<std::size_t>(cfg.modulus_perturbations);
    mp.seed = cfg.seed;
    ModulusEstimate m;
    m.sign = sign;
    try {
      m = check_modulus_condition(ham, sign, c, mp);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyCriticalSet) throw;
      m.vacuous = true;
    }
    out.write(fmt::format("modulus_{}.csv", to_string(sign)), [&](std::ostream& o) { write_modulus(o, m); });
    modulus.push_back(m);
  }
  const std::string mod_detail =
      fmt::format("plus {}, minus {}", modulus[0].pass ? "holds" : "not verified", modulus[1].pass ? "holds" : "not verified");
  const std::string& req = cfg.modulus_require;
  if (req == "none") {
    ctx.info("modulus condition", mod_detail);
  } else {
    const bool ok = req == "plus" ? modulus[0].pass : req == "minus" ? modulus[1].pass : modulus[0].pass || modulus[1].pass;
    ctx.claim("modulus condition (" + req + ")", ok, mod_detail);
  }
  {
    std::optional<ScalingReport> scaling;
    try {
      scaling = check_scaling_bound(LagrangianSpec(ham), c, ModulusSign::Plus, {0.1, 0.05, 0.025}, 100, cfg.seed);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyCriticalSet) throw;
    }
    out.write("scaling.csv", [&](std::ostream& o) {
      o << "delta,worst_excess,omega1,samples\n";
      if (!scaling) return;
      for (const auto& r : scaling->rows) {
        o << fmt::format("{},{},{},{}\n", num(r.delta), num(r.worst_excess), num(r.omega1), r.samples);
      }
    });
    ctx.info("scaling bound", !scaling        ? "no differentiable critical points to sample"
                              : scaling->pass ? "omega1 decreases with delta"
                                              : "omega1 not decreasing");
  }
  stage_done("structure");

  // Distance fields and Aubry set ----------------------------------------------
  StationaryParams sp;
  sp.tolerance = cfg.stationary_tolerance;
  const int skip = cfg.distance_skip > 0 ? cfg.distance_skip : (dim == 1 ? 1 : 4);
  const auto sources = distance_sources(grid, skip);
  double subsample_bound = 0.0;
  if (skip > 1) subsample_bound = (ham.momentum_radius(c) + u0.lipschitz_bound()) * skip * grid.h();

  std::vector<DistanceField> fields;
  std::optional<AubrySet> aubry;
  ctx.guarded("distance fields", [&] { fields = distance_fields(scheme, c, sources, jobs, sp); });
  if (!fields.empty()) {
    double lowest = std::numeric_limits<double>::infinity();
    for (const auto& f : fields) lowest = std::min(lowest, f.values.min());
    ctx.info("distance sign", fmt::format("min d over {} fields = {}", fields.size(), short_num(lowest)));
    aubry = aubry_set(scheme, c, fields, cfg.aubry_tolerance(grid.h()));
    out.write("aubry.csv", [&](std::ostream& o) { aubry->write_csv(o, grid); });
    if (cfg.expect_aubry) {
      std::string detail;
      const bool ok = aubry_matches(cfg, grid, *aubry, detail);
      ctx.claim("Aubry set", ok, detail);
    } else {
      ctx.info("Aubry set", fmt::format("{} of {} sources flagged", aubry->nodes.size(), sources.size()));
    }
  }

  // One field for the distance oracle, at its own level when one is given.
  {
    Vec src{0.5 * (domain.lower(0) + domain.upper(0)), dim == 2 ? 0.5 * (domain.lower(1) + domain.upper(1)) : 0.0};
    if (cfg.expect_distance_source_x) src.x = *cfg.expect_distance_source_x;
    if (cfg.expect_distance_source_y) src.y = *cfg.expect_distance_source_y;
    const std::size_t y = grid.nearest(src);
    const double level = cfg.expect_distance_level.value_or(c);
    ctx.guarded("distance oracle", [&] {
      const DistanceField d = distance_field(scheme, level, y, sp);
      out.write("distance.csv", [&](std::ostream& o) {
        o << coord_header("source_", dim) << "," << coord_header("", dim) << ",level,d\n";
        for (std::size_t k = 0; k < grid.size(); ++k) {
          o << coords(grid.node(y), dim) << "," << coords(grid.node(k), dim) << "," << num(level) << ","
            << num(d.values[k]) << "\n";
        }
      });
      if (cfg.expect_distance) {
        const double gap = sup_against(d.values, ScalarField::parse(*cfg.expect_distance));
        ctx.claim("distance oracle", gap <= cfg.expect_distance_tolerance,
                  fmt::format("sup |d - ({})| = {} (bound {})", *cfg.expect_distance, short_num(gap),
                              cfg.expect_distance_tolerance));
      }
    });
  }
  stage_done("distance");

  // Evolution ----------------------------------------------------------------------
  std::vector<double> times = uniform_times(cfg.horizon, static_cast<std::size_t>(cfg.outputs));
  times.insert(times.end(), cfg.extra_times.begin(), cfg.extra_times.end());
  times.push_back(cfg.spot_time);
  times.push_back(cfg.spot_time - cfg.dpp_tau);
  if (cfg.tol_gap_time) times.push_back(*cfg.tol_gap_time);
  times.erase(std::remove_if(times.begin(), times.end(), [&](double t) { return t < 0.0 || t > cfg.horizon; }),
              times.end());
  std::sort(times.begin(), times.end());

  std::optional<EvolutionRun> run;
  ctx.guarded("evolution", [&] { run = solve(scheme, u0, cfg.horizon, times); });
  if (run) {
    out.write("snapshots.csv", [&](std::ostream& o) {
      o << "t," << coord_header("", dim) << ",u\n";
      for (const auto& s : run->snapshots) {
        for (std::size_t k = 0; k < grid.size(); ++k) {
          o << num(s.t) << "," << coords(grid.node(k), dim) << "," << num(s.u[k]) << "\n";
        }
      }
    });
    out.write("c_estimate.csv", [&](std::ostream& o) {
      o << "t,c_estimate\n";
      for (const auto& [t, e] : run->c_estimate_series) o << num(t) << "," << num(e) << "\n";
    });
  }
  stage_done("evolution");

  // Asymptotic bundle -------------------------------------------------------------
  std::optional<GridFunction> limit_profile;
  if (run && aubry) {
    ctx.guarded("asymptotic bundle", [&] {
      AsymptoticBundle b{compute_u0_minus(scheme, c, u0, sp),
                         compute_ud_minus(fields, u0),
                         compute_u_minus(*run, c, 0.0),
                         GridFunction(grid),
                         GridFunction(grid),
                         GridFunction(grid),
                         cv};
      b.u0_inf = compute_u0_inf(scheme, c, b.u0_minus, sp);
      b.ud_inf = compute_ud_inf(fields, *aubry, b.ud_minus);
      limit_profile = b.ud_inf;
      b.u_inf = compute_u_minus(*run, c, 0.75 * cfg.horizon);

      out.write("bundle.csv", [&](std::ostream& o) {
        o << coord_header("", dim) << ",u0,u0_minus,ud_minus,u_minus_at0,u0_inf,ud_inf,u_inf\n";
        for (std::size_t k = 0; k < grid.size(); ++k) {
          o << coords(grid.node(k), dim);
          for (const GridFunction* g : std::initializer_list<const GridFunction*>{&u0, &b.u0_minus, &b.ud_minus, &b.u_minus_at0, &b.u0_inf, &b.ud_inf, &b.u_inf}) {
            o << "," << num((*g)[k]);
          }
          o << "\n";
        }
      });

      const double eq_tol = std::min(2.0 * cfg.tol_scheme + subsample_bound, cfg.tol_equality_cap);
      const auto gm = b.group_minus_gaps();
      const auto gi = b.group_inf_gaps();
      const double gm_max = *std::max_element(gm.begin(), gm.end());
      const double gi_max = *std::max_element(gi.begin(), gi.end());
      ctx.claim("equalities below", gm_max <= eq_tol,
                fmt::format("u0_minus/ud_minus/u_minus(0) gaps {}, {}, {} (budget {})", short_num(gm[0]),
                            short_num(gm[1]), short_num(gm[2]), short_num(eq_tol)));
      ctx.claim("equalities at infinity", gi_max <= eq_tol,
                fmt::format("u0_inf/ud_inf/u_inf gaps {}, {}, {} (budget {})", short_num(gi[0]), short_num(gi[1]),
                            short_num(gi[2]), short_num(eq_tol)));

      bool chain = dominated_by(b.u0_minus, u0, cfg.tol_scheme) && dominated_by(b.u0_minus, b.u0_inf, cfg.tol_scheme);
      for (const auto& s : run->snapshots) chain = chain && dominated_by(b.u0_minus, s.u + c * s.t, cfg.tol_scheme);
      ctx.claim("ordering", chain, "u0_minus below u0, u0_inf and every u(., t) + ct");

      if (cfg.expect_u_inf) {
        const double gap = sup_against(b.ud_inf, ScalarField::parse(*cfg.expect_u_inf));
        ctx.claim("limit profile", gap <= cfg.expect_u_inf_tolerance,
                  fmt::format("sup |u_inf - ({})| = {} (bound {})", *cfg.expect_u_inf, short_num(gap),
                              cfg.expect_u_inf_tolerance));
      }

      ConvergenceParams conv;
      conv.threshold = cfg.tol_gap;
      conv.check_time = cfg.tol_gap_time;
      // The oracle fields are only converged to the stationary tolerance.
      conv.noise = cfg.stationary_tolerance;
      const auto report = check_convergence(*run, b.ud_inf, c, modulus, conv);
      out.write("convergence.csv", [&](std::ostream& o) { report.write_csv(o); });
      const std::string detail =
          fmt::format("gap {} at t = {} (bound {}), tail decay {}, u^- monotone {}: {}", short_num(report.checked_gap),
                      conv.check_time.value_or(cfg.horizon), cfg.tol_gap, report.tail_decay ? "yes" : "no",
                      report.u_minus_monotone ? "yes" : "no", to_string(report.verdict));
      ctx.claim("convergence", report.verdict != ConvergenceVerdict::Fail, detail);
    });
  }
  stage_done("asymptotics");

  // Variational formula -----------------------------------------------------------
  if (run) {
    const LagrangianSpec lag(ham);
    SearchParams search;
    search.segments = cfg.segments;
    search.substeps = cfg.substeps;
    search.starts = cfg.starts;
    search.max_evaluations = static_cast<std::size_t>(cfg.evaluations);
    search.seed = cfg.seed;
    search.jobs = jobs;

    ctx.guarded("variational formula", [&] {
      const Snapshot* at = run->find(cfg.spot_time);
      if (!at) throw Error(ErrorCode::MissingSnapshot, fmt::format("no snapshot at t = {}", cfg.spot_time));
      std::vector<VariationalResult> results;
      double worst_below = -std::numeric_limits<double>::infinity(), worst_abs = 0.0;
      std::vector<double> grid_values;
      for (Vec x : cfg.spot_points) {
        results.push_back(variational_value(x, cfg.spot_time, u0, lag, bc, search));
        grid_values.push_back(at->u.interpolate(x));
        const double diff = results.back().value - grid_values.back();
        worst_below = std::max(worst_below, -diff);
        worst_abs = std::max(worst_abs, std::abs(diff));
      }
      out.write("variational.csv", [&](std::ostream& o) {
        o << coord_header("", dim) << ",t,variational,grid,difference\n";
        for (std::size_t i = 0; i < results.size(); ++i) {
          o << coords(cfg.spot_points[i], dim) << "," << num(cfg.spot_time) << "," << num(results[i].value) << ","
            << num(grid_values[i]) << "," << num(results[i].value - grid_values[i]) << "\n";
        }
      });
      ctx.claim("variational upper bound", worst_below <= cfg.tol_variational,
                fmt::format("largest shortfall below the grid value {} (tolerance {})", short_num(worst_below),
                            cfg.tol_variational));
      if (cfg.cross_check) {
        ctx.claim("variational cross-check", worst_abs <= cfg.tol_variational,
                  fmt::format("max |variational - grid| = {} (bound {})", short_num(worst_abs), cfg.tol_variational));
      } else {
        ctx.info("variational cross-check", fmt::format("max |variational - grid| = {}", short_num(worst_abs)));
      }
    });

    // Calibrated curves are approximated by optimal paths for the terminal
    // data u_inf, so the identities are only checked against that profile.
    if (limit_profile) {
      ctx.guarded("calibration identities", [&] {
        const Vec x = cfg.spot_points[cfg.spot_points.size() / 2];
        const VariationalResult best = minimize_action(x, cfg.spot_time, *limit_profile, lag, bc, search);
        const auto q = extremal_momenta(best.trajectory, lag);
        const auto ext = extremal_identity_check(best.trajectory, q, lag, bc, c);
        out.write("trajectory.csv", [&](std::ostream& o) { best.trajectory.write_csv(o, dim); });
        out.write("extremal.csv", [&](std::ostream& o) {
          o << "quantity,value,pass\n";
          o << fmt::format("hamiltonian_residual,{},{}\n", num(ext.max_hamiltonian_residual), ext.hamiltonian_pass ? 1 : 0);
          o << fmt::format("boundary_residual,{},{}\n", num(ext.max_boundary_residual), ext.boundary_pass ? 1 : 0);
          o << fmt::format("fenchel_gap,{},{}\n", num(ext.max_fenchel_gap), ext.fenchel_pass ? 1 : 0);
          o << fmt::format("contact_steps,{},\n", ext.contact_steps);
          o << fmt::format("checked_steps,{},\n", ext.checked_steps);
        });
        ctx.info("calibration identities",
                 fmt::format("|H - c| {}, boundary {}, Fenchel gap {} over {} steps (terminal data u_inf)",
                             short_num(ext.max_hamiltonian_residual), short_num(ext.max_boundary_residual),
                             short_num(ext.max_fenchel_gap), ext.checked_steps));
      });
    }

    ctx.guarded("dynamic programming", [&] {
      std::vector<DppResult> dpp;
      double worst_below = -std::numeric_limits<double>::infinity();
      for (Vec x : cfg.spot_points) {
        dpp.push_back(dpp_check(x, cfg.spot_time, cfg.dpp_tau, *run, lag, bc, search));
        worst_below = std::max(worst_below, dpp.back().grid_value - dpp.back().value);
      }
      out.write("dpp.csv", [&](std::ostream& o) {
        o << coord_header("", dim) << ",t,tau,value,grid,discrepancy\n";
        for (std::size_t i = 0; i < dpp.size(); ++i) {
          o << coords(cfg.spot_points[i], dim) << "," << num(cfg.spot_time) << "," << num(cfg.dpp_tau) << ","
            << num(dpp[i].value) << "," << num(dpp[i].grid_value) << "," << num(dpp[i].discrepancy) << "\n";
        }
      });
      ctx.claim("dynamic programming", worst_below <= cfg.tol_variational,
                fmt::format("short-horizon value below u(x,t) by at most {} (tolerance {})", short_num(worst_below),
                            cfg.tol_variational));
    });
  }
  stage_done("variational");

  return finish(cfg, ctx.claims, timings, out, jobs);
}

}  // namespace hjn
