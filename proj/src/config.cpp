#include "hjn/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

#include "hjn/fields.hpp"

namespace hjn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_number(const std::string& tok) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || tok.empty()) throw Error(ErrorCode::ConfigError, "expected a number, got '" + tok + "'");
  return v;
}

std::vector<double> to_numbers(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_number(tok));
  return out;
}

int to_int(const std::string& text) {
  const double v = to_number(text);
  if (v != static_cast<int>(v)) throw Error(ErrorCode::ConfigError, "expected an integer, got '" + text + "'");
  return static_cast<int>(v);
}

bool to_bool(const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw Error(ErrorCode::ConfigError, "expected true or false, got '" + text + "'");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + fmt::format("{}", v[i]);
  return out;
}

}  // namespace

std::vector<Vec> parse_points(const std::string& text) {
  std::vector<Vec> out;
  if (text.find(';') == std::string::npos) {
    for (double x : to_numbers(text)) out.push_back(Vec{x});
    return out;
  }
  std::stringstream in(text);
  std::string group;
  while (std::getline(in, group, ';')) {
    if (trim(group).empty()) continue;
    const auto v = to_numbers(group);
    if (v.size() != 2) throw Error(ErrorCode::ConfigError, "2D points need two coordinates: '" + group + "'");
    out.push_back({v[0], v[1]});
  }
  return out;
}

namespace {

std::string points_text(const std::vector<Vec>& pts, bool two_d) {
  std::string out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (two_d) {
      out += fmt::format("{}{} {};", i ? " " : "", pts[i].x, pts[i].y);
    } else {
      out += fmt::format("{}{}", i ? " " : "", pts[i].x);
    }
  }
  return out;
}

void check_field(const std::string& spec) { (void)ScalarField::parse(spec); }

struct Key {
  std::string name;
  std::function<void(ScenarioConfig&, const std::string&)> set;
  std::function<std::optional<std::string>(const ScenarioConfig&)> get;
};

template <class T>
std::string fmt_value(const T& v) {
  return fmt::format("{}", v);
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> k;
    auto str = [&](const char* name, std::string ScenarioConfig::*m, bool field = false) {
      k.push_back({name,
                   [m, field](ScenarioConfig& c, const std::string& v) {
                     if (field) check_field(v);
                     c.*m = v;
                   },
                   [m](const ScenarioConfig& c) { return std::optional<std::string>(c.*m); }});
    };
    auto num = [&](const char* name, double ScenarioConfig::*m) {
      k.push_back({name, [m](ScenarioConfig& c, const std::string& v) { c.*m = to_number(v); },
                   [m](const ScenarioConfig& c) { return std::optional<std::string>(fmt_value(c.*m)); }});
    };
    auto opt_num = [&](const char* name, std::optional<double> ScenarioConfig::*m) {
      k.push_back({name, [m](ScenarioConfig& c, const std::string& v) { c.*m = to_number(v); },
                   [m](const ScenarioConfig& c) {
                     return (c.*m) ? std::optional<std::string>(fmt_value(*(c.*m))) : std::nullopt;
                   }});
    };
    auto opt_str = [&](const char* name, std::optional<std::string> ScenarioConfig::*m, bool field) {
      k.push_back({name,
                   [m, field](ScenarioConfig& c, const std::string& v) {
                     if (field) check_field(v);
                     c.*m = v;
                   },
                   [m](const ScenarioConfig& c) { return c.*m; }});
    };
    auto integer = [&](const char* name, int ScenarioConfig::*m) {
      k.push_back({name, [m](ScenarioConfig& c, const std::string& v) { c.*m = to_int(v); },
                   [m](const ScenarioConfig& c) { return std::optional<std::string>(fmt_value(c.*m)); }});
    };
    auto list = [&](const char* name, std::vector<double> ScenarioConfig::*m) {
      k.push_back({name, [m](ScenarioConfig& c, const std::string& v) { c.*m = to_numbers(v); },
                   [m](const ScenarioConfig& c) { return std::optional<std::string>(join(c.*m)); }});
    };

    str("scenario.name", &ScenarioConfig::name);
    str("scenario.description", &ScenarioConfig::description);
    k.push_back({"domain.kind",
                 [](ScenarioConfig& c, const std::string& v) {
                   if (v != "interval" && v != "rectangle") {
                     throw Error(ErrorCode::ConfigError, "domain.kind must be interval or rectangle");
                   }
                   c.domain_kind = v;
                 },
                 [](const ScenarioConfig& c) { return std::optional<std::string>(c.domain_kind); }});
    list("domain.bounds", &ScenarioConfig::bounds);
    k.push_back({"hamiltonian.family",
                 [](ScenarioConfig& c, const std::string& v) {
                   (void)parse_family(v);
                   c.family = v;
                 },
                 [](const ScenarioConfig& c) { return std::optional<std::string>(c.family); }});
    str("hamiltonian.potential", &ScenarioConfig::potential, true);
    list("hamiltonian.matrix", &ScenarioConfig::matrix);

    static const char* face_names[4] = {"left", "right", "bottom", "top"};
    k.push_back({"boundary.gamma",
                 [](ScenarioConfig& c, const std::string& v) {
                   (void)parse_gamma(v, Vec{1.0});
                   c.gamma.fill(v);
                 },
                 [](const ScenarioConfig&) { return std::optional<std::string>(); }});
    k.push_back({"boundary.g",
                 [](ScenarioConfig& c, const std::string& v) {
                   check_field(v);
                   c.datum.fill(v);
                 },
                 [](const ScenarioConfig&) { return std::optional<std::string>(); }});
    for (int f = 0; f < 4; ++f) {
      k.push_back({fmt::format("boundary.{}.gamma", face_names[f]),
                   [f](ScenarioConfig& c, const std::string& v) {
                     (void)parse_gamma(v, Vec{1.0});
                     c.gamma[f] = v;
                   },
                   [f](const ScenarioConfig& c) {
                     if (c.domain_kind == "interval" && f >= 2) return std::optional<std::string>();
                     return std::optional<std::string>(c.gamma[f]);
                   }});
      k.push_back({fmt::format("boundary.{}.g", face_names[f]),
                   [f](ScenarioConfig& c, const std::string& v) {
                     check_field(v);
                     c.datum[f] = v;
                   },
                   [f](const ScenarioConfig& c) {
                     if (c.domain_kind == "interval" && f >= 2) return std::optional<std::string>();
                     return std::optional<std::string>(c.datum[f]);
                   }});
    }
    str("initial.u0", &ScenarioConfig::u0, true);

    num("grid.h", &ScenarioConfig::h);
    opt_num("grid.dt", &ScenarioConfig::dt);
    num("time.horizon", &ScenarioConfig::horizon);
    integer("time.outputs", &ScenarioConfig::outputs);
    list("time.extra", &ScenarioConfig::extra_times);

    num("critical.t1", &ScenarioConfig::critical_t1);
    num("critical.t2", &ScenarioConfig::critical_t2);
    list("critical.lambdas", &ScenarioConfig::lambdas);
    num("critical.bound", &ScenarioConfig::critical_bound);
    num("critical.agreement", &ScenarioConfig::critical_agreement);

    integer("distance.skip", &ScenarioConfig::distance_skip);
    num("distance.tolerance", &ScenarioConfig::stationary_tolerance);
    k.push_back({"aubry.tol",
                 [](ScenarioConfig& c, const std::string& v) {
                   std::string t = v;
                   if (!t.empty() && t.back() == 'h') t.pop_back();
                   if (t != "inf") (void)to_number(t);
                   c.aubry_tol = v;
                 },
                 [](const ScenarioConfig& c) { return std::optional<std::string>(c.aubry_tol); }});

    num("tolerances.scheme", &ScenarioConfig::tol_scheme);
    num("tolerances.equality_cap", &ScenarioConfig::tol_equality_cap);
    num("tolerances.gap", &ScenarioConfig::tol_gap);
    opt_num("tolerances.gap_time", &ScenarioConfig::tol_gap_time);
    num("tolerances.variational", &ScenarioConfig::tol_variational);
    num("tolerances.continuity", &ScenarioConfig::tol_continuity);

    k.push_back({"search.points",
                 [](ScenarioConfig& c, const std::string& v) { c.spot_points = parse_points(v); },
                 [](const ScenarioConfig& c) {
                   return std::optional<std::string>(points_text(c.spot_points, c.domain_kind == "rectangle"));
                 }});
    num("search.time", &ScenarioConfig::spot_time);
    num("search.dpp_tau", &ScenarioConfig::dpp_tau);
    integer("search.segments", &ScenarioConfig::segments);
    integer("search.substeps", &ScenarioConfig::substeps);
    integer("search.starts", &ScenarioConfig::starts);
    integer("search.evaluations", &ScenarioConfig::evaluations);
    k.push_back({"search.cross_check", [](ScenarioConfig& c, const std::string& v) { c.cross_check = to_bool(v); },
                 [](const ScenarioConfig& c) { return std::optional<std::string>(c.cross_check ? "true" : "false"); }});

    integer("modulus.points", &ScenarioConfig::modulus_points);
    integer("modulus.perturbations", &ScenarioConfig::modulus_perturbations);
    k.push_back({"modulus.require",
                 [](ScenarioConfig& c, const std::string& v) {
                   if (v != "none" && v != "plus" && v != "minus" && v != "either") {
                     throw Error(ErrorCode::ConfigError, "modulus.require must be none, plus, minus or either");
                   }
                   c.modulus_require = v;
                 },
                 [](const ScenarioConfig& c) { return std::optional<std::string>(c.modulus_require); }});

    opt_num("expect.c", &ScenarioConfig::expect_c);
    num("expect.c_tolerance", &ScenarioConfig::expect_c_tolerance);
    opt_str("expect.u_inf", &ScenarioConfig::expect_u_inf, true);
    num("expect.u_inf_tolerance", &ScenarioConfig::expect_u_inf_tolerance);
    opt_num("expect.distance_source_x", &ScenarioConfig::expect_distance_source_x);
    opt_num("expect.distance_source_y", &ScenarioConfig::expect_distance_source_y);
    opt_num("expect.distance_level", &ScenarioConfig::expect_distance_level);
    opt_str("expect.distance", &ScenarioConfig::expect_distance, true);
    num("expect.distance_tolerance", &ScenarioConfig::expect_distance_tolerance);
    k.push_back({"expect.aubry",
                 [](ScenarioConfig& c, const std::string& v) {
                   if (v != "all") (void)parse_points(v);
                   c.expect_aubry = v;
                 },
                 [](const ScenarioConfig& c) { return c.expect_aubry; }});
    integer("expect.aubry_slack", &ScenarioConfig::expect_aubry_slack);

    k.push_back({"run.seed",
                 [](ScenarioConfig& c, const std::string& v) {
                   std::uint64_t s = 0;
                   const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), s);
                   if (ec != std::errc() || end != v.data() + v.size()) {
                     throw Error(ErrorCode::ConfigError, "run.seed must be a nonnegative 64-bit integer");
                   }
                   c.seed = s;
                 },
                 [](const ScenarioConfig& c) { return std::optional<std::string>(fmt_value(c.seed)); }});
    return k;
  }();
  return table;
}

}  // namespace

BoundaryData::GammaFn parse_gamma(const std::string& spec, Vec normal) {
  std::istringstream in(spec);
  std::string name;
  in >> name;
  std::string rest;
  std::getline(in, rest);
  const auto params = to_numbers(rest);
  if (name == "normal" && params.empty()) return [normal](Vec) { return normal; };
  if (name == "constant" && (params.size() == 1 || params.size() == 2)) {
    const Vec g{params[0], params.size() == 2 ? params[1] : 0.0};
    return [g](Vec) { return g; };
  }
  if (name == "tilted" && params.size() == 1) {
    const Vec g = normal + params[0] * Vec{-normal.y, normal.x};
    return [g](Vec) { return g; };
  }
  throw Error(ErrorCode::ConfigError, "unknown gamma '" + spec + "' (normal | constant gx [gy] | tilted a)");
}

ScenarioConfig ScenarioConfig::parse(const std::string& text, const std::string& origin) {
  ScenarioConfig c;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  int bounds_line = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, fmt::format("{}:{}: expected 'key = value'", origin, line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& table = keys();
    const auto it = std::find_if(table.begin(), table.end(), [&](const Key& k) { return k.name == key; });
    if (it == table.end()) {
      throw Error(ErrorCode::ConfigError, fmt::format("{}:{}: unknown key '{}'", origin, line_no, key));
    }
    try {
      it->set(c, value);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, fmt::format("{}:{}: {}: {}", origin, line_no, key, e.what()));
    }
    if (key == "domain.bounds") bounds_line = line_no;
  }

  auto fail = [&](int line, const std::string& msg) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}:{}: {}", origin, line, msg));
  };
  const std::size_t want = c.domain_kind == "interval" ? 2 : 4;
  if (c.bounds.size() != want) fail(bounds_line, fmt::format("domain.bounds needs {} numbers for a {}", want, c.domain_kind));
  if (c.matrix.size() != 3) fail(0, "hamiltonian.matrix needs a11 a12 a22");
  if (!(c.h > 0.0)) fail(0, "grid.h must be positive");
  if (!(c.horizon > 0.0)) fail(0, "time.horizon must be positive");
  if (c.outputs < 0) fail(0, "time.outputs must be nonnegative");
  if (c.segments < 1 || c.substeps < 1 || c.starts < 1 || c.evaluations < 1) fail(0, "search counts must be positive");
  if (c.distance_skip < 0) fail(0, "distance.skip must be nonnegative");
  try {
    (void)c.make_domain();
  } catch (const Error& e) {
    fail(bounds_line, e.what());
  }
  return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

std::string ScenarioConfig::to_text() const {
  std::string out;
  for (const auto& k : keys()) {
    if (auto v = k.get(*this)) out += k.name + " = " + *v + "\n";
  }
  return out;
}

Domain ScenarioConfig::make_domain() const {
  if (domain_kind == "interval") return Domain::interval(bounds.at(0), bounds.at(1));
  return Domain::rectangle(bounds.at(0), bounds.at(1), bounds.at(2), bounds.at(3));
}

HamiltonianSpec ScenarioConfig::make_hamiltonian() const {
  return HamiltonianSpec(parse_family(family), ScalarField::parse(potential), make_domain(),
                         SymMatrix2{matrix.at(0), matrix.at(1), matrix.at(2)});
}

BoundaryData ScenarioConfig::make_boundary() const {
  const Domain d = make_domain();
  BoundaryData b;
  for (Face f : d.faces()) {
    const int i = static_cast<int>(f);
    const ScalarField g = ScalarField::parse(datum[i]);
    b.set(f, parse_gamma(gamma[i], d.face_normal(f)), [g](Vec x) { return g(x); });
  }
  return b;
}

double ScenarioConfig::aubry_tolerance(double grid_h) const {
  std::string t = aubry_tol;
  const bool scaled = !t.empty() && t.back() == 'h';
  if (scaled) t.pop_back();
  if (t == "inf") return std::numeric_limits<double>::infinity();
  const double v = t.empty() ? 1.0 : to_number(t);
  return scaled ? v * grid_h : v;
}

}  // namespace hjn
