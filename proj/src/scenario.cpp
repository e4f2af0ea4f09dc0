#include "rangeshift/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "rangeshift/diagnostics.hpp"
#include "rangeshift/error.hpp"
#include "rangeshift/io.hpp"

namespace rangeshift {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void config_error(const ConfigEntry& e, const std::string& msg) {
  std::string where = e.line > 0 ? "line " + std::to_string(e.line) + ": " : "";
  throw Error(ErrorKind::ConfigError, where + e.key + ": " + msg);
}

double to_double(const ConfigEntry& e, std::string_view text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
    config_error(e, "expected a number, got '" + t + "'");
  }
  return v;
}

double as_double(const ConfigEntry& e) { return to_double(e, e.value); }

double as_positive(const ConfigEntry& e) {
  const double v = as_double(e);
  if (!(v > 0.0)) config_error(e, "must be positive (got " + e.value + ")");
  return v;
}

double as_nonnegative(const ConfigEntry& e) {
  const double v = as_double(e);
  if (v < 0.0) config_error(e, "must be nonnegative (got " + e.value + ")");
  return v;
}

int as_count(const ConfigEntry& e) {
  int v = 0;
  const auto res = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (res.ec != std::errc() || res.ptr != e.value.data() + e.value.size() || v < 1) {
    config_error(e, "expected a positive integer, got '" + e.value + "'");
  }
  return v;
}

bool as_bool(const ConfigEntry& e) {
  if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
  if (e.value == "false" || e.value == "no" || e.value == "0") return false;
  config_error(e, "expected true or false, got '" + e.value + "'");
}

std::vector<std::string> as_words(const ConfigEntry& e) {
  std::vector<std::string> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> as_list(const ConfigEntry& e) {
  std::vector<double> out;
  for (const std::string& w : as_words(e)) out.push_back(to_double(e, w));
  if (out.empty()) config_error(e, "expected a comma-separated list of numbers");
  return out;
}

std::string as_choice(const ConfigEntry& e, std::initializer_list<const char*> choices) {
  std::string list;
  for (const char* c : choices) {
    if (e.value == c) return e.value;
    list += list.empty() ? c : std::string(", ") + c;
  }
  config_error(e, "unknown value '" + e.value + "' (expected one of " + list + ")");
}

const std::vector<std::string> kAnalysisOrder = {"portrait",    "stationary",     "evolve", "classify",
                                                 "diagnose",    "critical-speed", "sigma-star", "sweep"};

using Setter = std::function<void(Scenario&, const ConfigEntry&)>;

DatumSpec& datum(Scenario& s) {
  if (!s.datum) s.datum.emplace();
  return *s.datum;
}

FamilySpec& family(Scenario& s) {
  if (!s.family) s.family.emplace();
  return *s.family;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"name", [](Scenario& s, const ConfigEntry& e) { s.name = e.value; }},
      {"analyses", [](Scenario& s, const ConfigEntry& e) {
         s.analyses = as_words(e);
         for (const std::string& a : s.analyses) {
           if (std::find(kAnalysisOrder.begin(), kAnalysisOrder.end(), a) == kAnalysisOrder.end()) {
             config_error(e, "unknown analysis '" + a + "'");
           }
         }
       }},
      {"workers", [](Scenario& s, const ConfigEntry& e) { s.workers = as_count(e); }},

      {"model.kind", [](Scenario& s, const ConfigEntry& e) {
         s.model.kind = as_choice(e, {"kpp", "figure1", "cubic_allee", "table"});
       }},
      {"model.nu", [](Scenario& s, const ConfigEntry& e) { s.model.nu = as_nonnegative(e); }},
      {"model.s_max", [](Scenario& s, const ConfigEntry& e) {
         s.model.s_max = as_double(e);
         if (*s.model.s_max <= 1.0) config_error(e, "must exceed 1");
       }},
      {"model.table", [](Scenario& s, const ConfigEntry& e) { s.model.table = e.value; }},
      {"model.rho", [](Scenario& s, const ConfigEntry& e) { s.model.rho = as_positive(e); }},

      {"speed", [](Scenario& s, const ConfigEntry& e) { s.speed = as_nonnegative(e); }},
      {"speeds", [](Scenario& s, const ConfigEntry& e) {
         s.speeds = as_list(e);
         for (double c : s.speeds) {
           if (c < 0.0) config_error(e, "speeds must be nonnegative");
         }
       }},

      {"datum.kind", [](Scenario& s, const ConfigEntry& e) {
         datum(s).kind = as_choice(e, {"box", "table", "invasion", "ground", "critical_ground", "bump", "cap"});
       }},
      {"datum.amplitude", [](Scenario& s, const ConfigEntry& e) { datum(s).amplitude = as_nonnegative(e); }},
      {"datum.a", [](Scenario& s, const ConfigEntry& e) { datum(s).a = as_double(e); }},
      {"datum.b", [](Scenario& s, const ConfigEntry& e) { datum(s).b = as_double(e); }},
      {"datum.alpha", [](Scenario& s, const ConfigEntry& e) { datum(s).alpha = as_positive(e); }},
      {"datum.theta", [](Scenario& s, const ConfigEntry& e) { datum(s).theta = as_positive(e); }},
      {"datum.scale", [](Scenario& s, const ConfigEntry& e) { datum(s).scale = as_nonnegative(e); }},
      {"datum.table", [](Scenario& s, const ConfigEntry& e) { datum(s).table = e.value; }},

      {"family.kind", [](Scenario& s, const ConfigEntry& e) {
         family(s).kind = as_choice(e, {"amplitude", "width"});
       }},
      {"family.a", [](Scenario& s, const ConfigEntry& e) { family(s).a = as_double(e); }},
      {"family.b", [](Scenario& s, const ConfigEntry& e) { family(s).b = as_double(e); }},
      {"family.amplitude", [](Scenario& s, const ConfigEntry& e) { family(s).amplitude = as_positive(e); }},
      {"family.center", [](Scenario& s, const ConfigEntry& e) { family(s).center = as_double(e); }},

      {"sigma.min", [](Scenario& s, const ConfigEntry& e) { s.sigma_min = as_positive(e); }},
      {"sigma.max", [](Scenario& s, const ConfigEntry& e) { s.sigma_max = as_positive(e); }},
      {"sigma.tol", [](Scenario& s, const ConfigEntry& e) { s.sigma_tol = as_positive(e); }},
      {"sigmas", [](Scenario& s, const ConfigEntry& e) {
         s.sigmas = as_list(e);
         for (double v : s.sigmas) {
           if (v < 0.0) config_error(e, "sigmas must be nonnegative");
         }
       }},

      {"grid.z_min", [](Scenario& s, const ConfigEntry& e) {
         s.z_min = as_double(e);
         if (s.z_min >= 0.0) config_error(e, "must be negative");
       }},
      {"grid.z_max", [](Scenario& s, const ConfigEntry& e) { s.z_max = as_positive(e); }},
      {"grid.dz", [](Scenario& s, const ConfigEntry& e) { s.dz = as_positive(e); }},

      {"solver.dt", [](Scenario& s, const ConfigEntry& e) { s.solver.dt = as_positive(e); }},
      {"solver.horizon", [](Scenario& s, const ConfigEntry& e) { s.solver.horizon = as_positive(e); }},
      {"solver.snapshot_every", [](Scenario& s, const ConfigEntry& e) { s.solver.snapshot_every = as_positive(e); }},
      {"solver.scheme", [](Scenario& s, const ConfigEntry& e) {
         s.solver.scheme = as_choice(e, {"imex_euler", "crank_nicolson"}) == "imex_euler" ? TimeScheme::ImexEuler
                                                                                         : TimeScheme::CrankNicolsonImex;
       }},
      {"solver.advection", [](Scenario& s, const ConfigEntry& e) {
         const std::string v = as_choice(e, {"auto", "centered", "upwind"});
         s.solver.advection = v == "auto" ? AdvectionScheme::Auto
                              : v == "centered" ? AdvectionScheme::Centered
                                                : AdvectionScheme::Upwind;
       }},
      {"solver.interface", [](Scenario& s, const ConfigEntry& e) {
         s.solver.interface =
             as_choice(e, {"averaged", "favourable"}) == "averaged" ? InterfaceRule::Averaged : InterfaceRule::Favourable;
       }},
      {"solver.right", [](Scenario& s, const ConfigEntry& e) {
         s.solver.right =
             as_choice(e, {"dirichlet", "zero_flux"}) == "dirichlet" ? RightBoundary::Dirichlet : RightBoundary::ZeroFlux;
       }},

      {"classifier.eps_extinct", [](Scenario& s, const ConfigEntry& e) { s.classifier.eps_extinct = as_positive(e); }},
      {"classifier.eps_spread", [](Scenario& s, const ConfigEntry& e) { s.classifier.eps_spread = as_positive(e); }},
      {"classifier.eps_ground", [](Scenario& s, const ConfigEntry& e) { s.classifier.eps_ground = as_positive(e); }},
      {"classifier.window", [](Scenario& s, const ConfigEntry& e) { s.classifier.window = as_positive(e); }},
      {"classifier.dwell", [](Scenario& s, const ConfigEntry& e) { s.classifier.dwell = as_positive(e); }},
      {"classifier.horizon", [](Scenario& s, const ConfigEntry& e) { s.classifier.horizon = as_positive(e); }},

      {"shooting.tol", [](Scenario& s, const ConfigEntry& e) { s.shooting.tol = as_positive(e); }},
      {"shooting.eps_origin", [](Scenario& s, const ConfigEntry& e) { s.shooting.eps_origin = as_positive(e); }},
      {"shooting.eps_glue", [](Scenario& s, const ConfigEntry& e) { s.shooting.eps_glue = as_positive(e); }},
      {"shooting.eps_tail", [](Scenario& s, const ConfigEntry& e) { s.shooting.eps_tail = as_positive(e); }},
      {"shooting.delta_manifold", [](Scenario& s, const ConfigEntry& e) { s.shooting.delta_manifold = as_positive(e); }},
      {"shooting.tol_alpha", [](Scenario& s, const ConfigEntry& e) { s.shooting.tol_alpha = as_positive(e); }},
      {"shooting.horizon", [](Scenario& s, const ConfigEntry& e) { s.shooting.horizon = as_positive(e); }},
      {"shooting.sample_dz", [](Scenario& s, const ConfigEntry& e) { s.shooting.sample_dz = as_positive(e); }},

      {"critical_speed.tol_c", [](Scenario& s, const ConfigEntry& e) { s.tol_c = as_positive(e); }},
      {"portrait.alphas", [](Scenario& s, const ConfigEntry& e) {
         s.portrait_alphas = as_list(e);
         for (double a : s.portrait_alphas) {
           if (!(a > 0.0)) config_error(e, "amplitudes must be positive");
         }
       }},
      {"stationary.alphas", [](Scenario& s, const ConfigEntry& e) {
         s.stationary_alphas = as_list(e);
         for (double a : s.stationary_alphas) {
           if (!(a > 0.0)) config_error(e, "amplitudes must be positive");
         }
       }},

      {"diagnose.reference", [](Scenario& s, const ConfigEntry& e) {
         s.diagnose.reference = as_choice(e, {"auto", "invasion", "critical", "none"});
       }},
      {"diagnose.interval", [](Scenario& s, const ConfigEntry& e) {
         const std::vector<double> v = as_list(e);
         if (v.size() != 2 || !(v[0] < v[1])) config_error(e, "expected 'a, b' with a < b");
         s.diagnose.interval = std::make_pair(v[0], v[1]);
       }},
      {"diagnose.gamma", [](Scenario& s, const ConfigEntry& e) { s.diagnose.gamma = as_positive(e); }},
      {"diagnose.calibrate_fraction", [](Scenario& s, const ConfigEntry& e) {
         s.diagnose.calibrate_fraction = as_positive(e);
         if (s.diagnose.calibrate_fraction > 1.0) config_error(e, "must not exceed 1");
       }},
      {"diagnose.energy_cutoff", [](Scenario& s, const ConfigEntry& e) { s.diagnose.energy_cutoff = as_double(e); }},

      {"export.fixed_frame", [](Scenario& s, const ConfigEntry& e) { s.fixed_frame = as_bool(e); }},
      {"export.snapshots", [](Scenario& s, const ConfigEntry& e) { s.export_snapshots = as_bool(e); }},
  };
  return table;
}

void require(bool ok, const std::string& key, const std::string& msg) {
  if (!ok) throw Error(ErrorKind::ConfigError, key + ": " + msg);
}

bool wants(const Scenario& s, const std::string& analysis) {
  return std::find(s.analyses.begin(), s.analyses.end(), analysis) != s.analyses.end();
}

void validate(const Scenario& s) {
  require(!s.analyses.empty(), "analyses", "no analysis requested");
  for (const char* a : {"stationary", "evolve", "classify", "diagnose", "sigma-star"}) {
    if (wants(s, a)) require(s.speed.has_value(), "speed", std::string("required by analysis '") + a + "'");
  }
  if (wants(s, "portrait")) require(s.speed || !s.speeds.empty(), "speeds", "required by analysis 'portrait'");
  if (wants(s, "evolve")) require(s.datum.has_value(), "datum.kind", "required by analysis 'evolve'");
  if (wants(s, "sigma-star")) {
    require(s.family.has_value(), "family.kind", "required by analysis 'sigma-star'");
    require(s.sigma_max > s.sigma_min, "sigma.max", "must exceed sigma.min");
  }
  if (wants(s, "sweep")) {
    require(s.family.has_value(), "family.kind", "required by analysis 'sweep'");
    require(!s.speeds.empty(), "speeds", "required by analysis 'sweep'");
    require(!s.sigmas.empty(), "sigmas", "required by analysis 'sweep'");
  }
  if (s.model.kind == "table") require(!s.model.table.empty(), "model.table", "required when model.kind = table");
  if (s.datum) {
    const DatumSpec& d = *s.datum;
    if (d.kind == "box") require(d.a <= d.b, "datum.b", "must not be below datum.a");
    if (d.kind == "table") require(!d.table.empty(), "datum.table", "required when datum.kind = table");
    if (d.kind == "ground") require(d.alpha.has_value(), "datum.alpha", "required when datum.kind = ground");
  }
  if (s.family && s.family->kind == "amplitude") require(s.family->a < s.family->b, "family.b", "must exceed family.a");
  s.classifier.validate();
}

std::pair<std::vector<double>, std::vector<double>> read_two_columns(const fs::path& path, const std::string& key) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, key + ": cannot open '" + path.string() + "'");
  std::vector<double> x, y;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorKind::ConfigError, key + ": expected two CSV columns");
    const ConfigEntry e{key, line, 0};
    if (header) {
      header = false;
      const std::string first = trim(std::string_view(line).substr(0, comma));
      double probe = 0.0;
      if (std::from_chars(first.data(), first.data() + first.size(), probe).ec != std::errc()) continue;
    }
    x.push_back(to_double(e, std::string_view(line).substr(0, comma)));
    y.push_back(to_double(e, std::string_view(line).substr(comma + 1)));
  }
  return {x, y};
}

GrowthModel make_model(const ModelSpec& m) {
  if (m.kind == "kpp") return kpp_model(m.s_max.value_or(1.5));
  if (m.kind == "figure1") return figure1_model(m.s_max.value_or(3.0));
  if (m.kind == "cubic_allee") return cubic_allee_model(m.nu, m.s_max.value_or(1.5));
  auto [s, g] = read_two_columns(m.table, "model.table");
  return tabulated_model(std::move(s), std::move(g));
}

// State shared between analyses of one scenario run.
struct Context {
  const Scenario& scenario;
  fs::path out;
  std::ostream& log;
  ShiftedReaction reaction;
  Grid1D grid;
  std::optional<MinimalSpeed> c_star;
  std::optional<References> refs;
  std::optional<Trace> trace;
  std::optional<Outcome> outcome;

  double speed() const { return *scenario.speed; }

  const MinimalSpeed& minimal() {
    if (!c_star) {
      ShootingTolerances tol = scenario.shooting;
      tol.tol_c = std::min(scenario.tol_c, tol.tol_c);
      c_star = minimal_speed(reaction.growth(), tol);
    }
    return *c_star;
  }

  const References& references() {
    if (!refs) refs = make_references(reaction, speed(), scenario.shooting);
    return *refs;
  }

  ThresholdOptions threshold_options() const {
    ThresholdOptions o;
    o.workers = scenario.workers;
    return o;
  }
};

std::string regime(Context& ctx, double c) {
  const double lin = linear_speed(ctx.reaction.growth());
  if (c < lin) return "hair_trigger";
  if (c < ctx.minimal().value) return "bistable";
  return "extinction";
}

InitialDatum make_datum(Context& ctx) {
  const DatumSpec& d = *ctx.scenario.datum;
  const double c = ctx.speed();
  const ShootingTolerances& tol = ctx.scenario.shooting;
  if (d.kind == "box") return InitialDatum::box(d.amplitude, d.a, d.b);
  if (d.kind == "table") {
    auto [z, u] = read_two_columns(d.table, "datum.table");
    return InitialDatum::tabulated(std::move(z), std::move(u));
  }
  if (d.kind == "invasion") return InitialDatum::profile(invasion_state(ctx.reaction, c, tol), d.scale);
  if (d.kind == "ground") return InitialDatum::profile(ground_state(ctx.reaction, c, *d.alpha, tol), d.scale);
  if (d.kind == "critical_ground") return InitialDatum::profile(critical_ground_state(ctx.reaction, c, tol), d.scale);
  if (d.kind == "bump") {
    const double theta = d.theta.value_or(0.5 * (theta_critical(ctx.reaction, c, tol) + 1.0));
    return InitialDatum::bump(spreading_bump(ctx.reaction, c, theta, tol), d.scale);
  }
  const AlphaStar as = alpha_star(ctx.reaction, c, tol);
  return InitialDatum::cap(extinction_cap(ctx.reaction, c, d.alpha.value_or(0.5 * as.value), tol, as), d.scale);
}

OrderedFamily make_family(const FamilySpec& f) {
  return f.kind == "amplitude" ? OrderedFamily::amplitude(f.a, f.b) : OrderedFamily::width(f.amplitude, f.center);
}

void run_portrait(Context& ctx) {
  std::vector<double> speeds = ctx.scenario.speeds;
  if (speeds.empty()) speeds.push_back(ctx.speed());
  json summary = {{"linear_speed", linear_speed(ctx.reaction.growth())}, {"c_star", ctx.minimal().value}};
  json panels = json::array();
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    const double c = speeds[k];
    const auto curves = phase_portrait(ctx.reaction, c, ctx.scenario.portrait_alphas, ctx.scenario.shooting);
    const std::string file = "portrait_" + std::to_string(k) + ".csv";
    write_portrait_csv(ctx.out / file, curves);
    json ids = json::array();
    for (const PortraitCurve& pc : curves) {
      ids.push_back({{"id", pc.id},
                     {"tag", pc.tag},
                     {"alpha", pc.alpha},
                     {"terminal_event", to_string(pc.trajectory.terminal_event)},
                     {"terminal_z", pc.trajectory.terminal_z}});
    }
    panels.push_back({{"c", c}, {"regime", regime(ctx, c)}, {"file", file}, {"curves", ids}});
    ctx.log << "portrait: c = " << format_double(c) << " -> " << file << " (" << curves.size() << " curves)\n";
  }
  summary["panels"] = panels;
  write_json(ctx.out / "portrait.json", summary);
}

void write_profile(Context& ctx, const std::string& stem, const StationaryProfile& p) {
  write_profile_csv(ctx.out / (stem + ".csv"), p);
  json header = profile_header(p);
  if (p.kind != ProfileKind::Invasion) {
    const DecayFit fit = fit_decay_rate(p, default_fit_window(p));
    header["decay_fit"] = {{"rate", fit.rate},
                           {"stderr", fit.stderr_rate},
                           {"ci95", fit.ci95},
                           {"n", fit.n},
                           {"window", {fit.window.first, fit.window.second}},
                           {"critical_speed", fit.critical_speed}};
    header["left_tail_rate"] = left_tail_rate(p);
  }
  write_json(ctx.out / (stem + ".json"), header);
}

void run_stationary(Context& ctx) {
  const double c = ctx.speed();
  const ShootingTolerances& tol = ctx.scenario.shooting;
  write_profile(ctx, "invasion", invasion_state(ctx.reaction, c, tol));
  const LinearRates rates = linear_rates(ctx.reaction, c);
  json summary = {{"c", c}, {"regime", regime(ctx, c)}, {"mu_c", rates.mu_c}};
  if (rates.lambda_minus) {
    summary["lambda_minus"] = *rates.lambda_minus;
    summary["lambda_plus"] = *rates.lambda_plus;
    const AlphaStar as = alpha_star(ctx.reaction, c, tol);
    summary["alpha_star"] = to_json(as);
    const double theta_c = theta_critical(ctx.reaction, c, tol);
    summary["theta_c"] = theta_c;
    if (!as.saturated) write_profile(ctx, "critical_ground", critical_ground_state(ctx.reaction, c, tol, as));
    for (std::size_t k = 0; k < ctx.scenario.stationary_alphas.size(); ++k) {
      write_profile(ctx, "ground_" + std::to_string(k),
                    ground_state(ctx.reaction, c, ctx.scenario.stationary_alphas[k], tol, as));
    }
    if (theta_c < 1.0) {
      const CompactBump bump = spreading_bump(ctx.reaction, c, 0.5 * (theta_c + 1.0), tol);
      write_bump_csv(ctx.out / "spreading_bump.csv", bump.samples);
      summary["spreading_bump"] = {{"theta", bump.theta}, {"z_left", bump.z_left}, {"z_right", bump.z_right}};
    }
  } else {
    require(ctx.scenario.stationary_alphas.empty(), "stationary.alphas", "no ground states below 2 sqrt(g'(0))");
  }
  write_json(ctx.out / "stationary.json", summary);
  ctx.log << "stationary: c = " << format_double(c) << " regime " << summary["regime"].get<std::string>() << '\n';
}

void run_evolve(Context& ctx, bool classify_too) {
  const Scenario& s = ctx.scenario;
  const InitialDatum u0 = make_datum(ctx);
  SolverConfig solver = s.solver;
  solver.keep_fields = true;
  const References& refs = ctx.references();
  if (classify_too) {
    ClassifiedRun run = run_and_classify(u0, ctx.reaction, ctx.speed(), ctx.grid, solver, refs, s.classifier);
    ctx.trace = std::move(run.trace);
    ctx.outcome = run.outcome;
  } else {
    ctx.trace = evolve(u0, ctx.reaction, ctx.speed(), ctx.grid, solver, classifier_observers(ctx.grid, refs, s.classifier));
  }
  const Trace& tr = *ctx.trace;
  if (s.export_snapshots) write_snapshots_csv(ctx.out / "snapshots.csv", tr, ctx.grid, ctx.speed(), s.fixed_frame);
  write_observers_csv(ctx.out / "observers.csv", tr);
  write_json(ctx.out / "evolve.json", {{"datum", u0.label()},
                                        {"c", ctx.speed()},
                                        {"dt", tr.dt},
                                        {"dz", ctx.grid.dz},
                                        {"z_range", {ctx.grid.z_min, ctx.grid.z_max}},
                                        {"t_end", tr.times.empty() ? 0.0 : tr.times.back()},
                                        {"stopped_early", tr.stopped_early},
                                        {"max_bound_excess", tr.max_bound_excess},
                                        {"warnings", tr.warnings}});
  ctx.log << "evolve: " << u0.label() << ", " << tr.times.size() << " snapshots\n";
}

void run_classify(Context& ctx) {
  write_json(ctx.out / "outcome.json", to_json(*ctx.outcome));
  ctx.log << "classify: " << to_string(ctx.outcome->verdict) << " at t = " << format_double(ctx.outcome->decided_at)
          << '\n';
}

void run_diagnose(Context& ctx) {
  const Scenario& s = ctx.scenario;
  const Trace& tr = *ctx.trace;
  const double c = ctx.speed();
  const References& refs = ctx.references();
  json report;

  std::string which = s.diagnose.reference;
  if (which == "auto") which = refs.critical ? "critical" : "invasion";
  if (which == "critical" && !refs.critical) {
    throw Error(ErrorKind::MissingReference, "no critical ground state at c = " + format_double(c));
  }
  if (which != "none") {
    const StationaryProfile& p = which == "critical" ? *refs.critical : *refs.invasion;
    const std::vector<double> sampled = p.sample(ctx.grid.nodes());
    SolverConfig solver = s.solver;
    const auto discrete = discrete_stationary(sampled, ctx.reaction, c, ctx.grid, solver);
    const std::pair<double, double> interval =
        s.diagnose.interval.value_or(which == "critical" ? std::make_pair(-10.0, 10.0)
                                                         : std::make_pair(ctx.grid.z_min, std::min(150.0, ctx.grid.z_max - 20.0)));
    json zn = {{"reference", which}, {"discrete_reference", discrete.has_value()},
               {"interval", {interval.first, interval.second}}};
    try {
      const ZeroNumberSeries series = zero_number_trace(tr, discrete ? *discrete : sampled, ctx.grid, interval);
      write_zero_number_csv(ctx.out / "zero_number.csv", series);
      zn.update(to_json(series));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EndpointVanishes) throw;
      zn["error"] = e.what();
    }
    report["zero_number"] = zn;
  }

  const double cutoff = s.diagnose.energy_cutoff.value_or(ctx.grid.z_max - 1.0);
  CsvWriter energy_csv(ctx.out / "energy.csv", {"t", "energy"});
  int skipped = 0;
  for (const Field& f : tr.snapshots) {
    try {
      energy_csv.row({f.t, energy(f, ctx.grid, ctx.reaction, c, cutoff)});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::TailTooFat) throw;
      ++skipped;
    }
  }
  report["energy"] = {{"right_cutoff", cutoff}, {"skipped_snapshots", skipped}};

  const double lin = linear_speed(ctx.reaction.growth());
  if (c >= lin) {
    const double gamma = s.diagnose.gamma.value_or(default_gamma(ctx.reaction, c));
    const double t_cal = s.diagnose.calibrate_fraction * (tr.times.empty() ? 0.0 : tr.times.back());
    const auto cal = calibrate_envelope(tr, ctx.grid, ctx.reaction, c, gamma, 0.0, t_cal);
    if (cal) {
      json env = to_json(exponential_bound_check(tr, ctx.grid, ctx.reaction, c, gamma, cal->eps, cal->z_eps));
      env["gamma"] = gamma;
      env["calibrated_until"] = t_cal;
      report["envelope"] = env;
    } else {
      report["envelope"] = {{"gamma", gamma}, {"calibrated_until", t_cal}, {"error", "no admissible (eps, Z)"}};
    }
  } else {
    report["envelope"] = {{"error", "c below 2 sqrt(g'(0)): no decay envelope"}};
  }
  write_json(ctx.out / "diagnostics.json", report);
  ctx.log << "diagnose: written diagnostics.json\n";
}

void run_critical_speed(Context& ctx) {
  const Scenario& s = ctx.scenario;
  const MinimalSpeed& ms = ctx.minimal();
  write_json(ctx.out / "c_star.json", {{"model", ctx.reaction.growth().name()},
                                        {"c_star", ms.value},
                                        {"bracket", {ms.lo, ms.hi}},
                                        {"tol_c", s.tol_c},
                                        {"linear_speed", linear_speed(ctx.reaction.growth())}});
  ctx.log << "critical-speed: c* = " << format_double(ms.value) << '\n';
  if (!s.datum) return;
  const double lin = linear_speed(ctx.reaction.growth());
  // Profile-based data need a speed; default to the middle of the bistable range.
  const InitialDatum u0 = [&] {
    Scenario at = s;
    at.speed = s.speed.value_or(0.5 * (lin + ms.value));
    Context sub{at, ctx.out, ctx.log, ctx.reaction, ctx.grid, ctx.c_star, {}, {}, {}};
    return make_datum(sub);
  }();
  const ThresholdResult r = find_critical_speed(u0, ctx.reaction, ctx.grid, s.solver, s.classifier, s.tol_c,
                                                ctx.threshold_options());
  write_json(ctx.out / "critical_speed.json", to_json(r));
  write_probes_csv(ctx.out / "critical_speed_probes.csv", r.runs);
  ctx.log << "critical-speed: c(u0) = " << format_double(r.value) << " for " << u0.label() << '\n';
}

void run_sigma_star(Context& ctx) {
  const Scenario& s = ctx.scenario;
  const ThresholdResult r = find_sigma_star(make_family(*s.family), ctx.reaction, ctx.speed(), ctx.grid, s.solver,
                                            s.classifier, s.sigma_tol, {s.sigma_min, s.sigma_max},
                                            ctx.threshold_options());
  write_json(ctx.out / "sigma_star.json", to_json(r));
  write_probes_csv(ctx.out / "sigma_star_probes.csv", r.runs);
  ctx.log << "sigma-star: [" << format_double(r.lo) << ", " << format_double(r.hi) << "]\n";
}

void run_sweep(Context& ctx) {
  const Scenario& s = ctx.scenario;
  const auto rows = sweep(make_family(*s.family), ctx.reaction, s.speeds, s.sigmas, ctx.grid, s.solver,
                          s.classifier, ctx.threshold_options());
  write_sweep_csv(ctx.out / "sweep.csv", rows);
  ctx.log << "sweep: " << rows.size() << " runs\n";
}

const char* module_of(const std::string& analysis) {
  if (analysis == "portrait" || analysis == "stationary") return "phase_plane";
  if (analysis == "evolve") return "pde_solver";
  if (analysis == "classify") return "classifier";
  if (analysis == "diagnose") return "diagnostics";
  if (analysis == "setup") return "reaction";
  return "thresholds";
}

bool is_validation(ErrorKind k) {
  return k == ErrorKind::ConfigError || k == ErrorKind::InvalidArgument || k == ErrorKind::DomainError ||
         k == ErrorKind::MonotonicityViolation;
}

}  // namespace

std::vector<ConfigEntry> parse_config(std::string_view text) {
  std::vector<ConfigEntry> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    ConfigEntry e{trim(std::string_view(stripped).substr(0, eq)), trim(std::string_view(stripped).substr(eq + 1)),
                  line_no};
    if (e.key.empty()) throw Error(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": empty key");
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<ConfigEntry> read_config(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> resolve_analyses(const std::vector<std::string>& requested) {
  std::vector<std::string> wanted = requested;
  const auto has = [&](const char* a) { return std::find(wanted.begin(), wanted.end(), a) != wanted.end(); };
  if ((has("classify") || has("diagnose")) && !has("evolve")) wanted.push_back("evolve");
  std::vector<std::string> ordered;
  for (const std::string& a : kAnalysisOrder) {
    if (std::find(wanted.begin(), wanted.end(), a) != wanted.end()) ordered.push_back(a);
  }
  return ordered;
}

Scenario build_scenario(const std::vector<ConfigEntry>& entries) {
  Scenario s;
  const auto& table = setters();
  for (const ConfigEntry& e : entries) {
    const auto it = table.find(e.key);
    if (it == table.end()) config_error(e, "unknown key");
    it->second(s, e);
  }
  s.analyses = resolve_analyses(s.analyses);
  validate(s);
  return s;
}

int run_scenario(const Scenario& scenario, const fs::path& out, std::ostream& log) {
  std::string current = "setup";
  try {
    fs::create_directories(out);
    Context ctx{scenario, out, log, ShiftedReaction(make_model(scenario.model), scenario.model.rho),
                Grid1D::make(scenario.z_min, scenario.z_max, scenario.dz), {}, {}, {}, {}};
    for (const std::string& a : scenario.analyses) {
      current = a;
      if (a == "portrait") run_portrait(ctx);
      if (a == "stationary") run_stationary(ctx);
      if (a == "evolve") run_evolve(ctx, wants(scenario, "classify"));
      if (a == "classify") run_classify(ctx);
      if (a == "diagnose") run_diagnose(ctx);
      if (a == "critical-speed") run_critical_speed(ctx);
      if (a == "sigma-star") run_sigma_star(ctx);
      if (a == "sweep") run_sweep(ctx);
    }
    return 0;
  } catch (const Error& e) {
    const int code = is_validation(e.kind()) ? 2 : 3;
    log << "error in " << current << ": " << e.what() << '\n';
    std::error_code ec;
    if (fs::is_directory(out, ec)) {
      write_json(out / "error.json", {{"exit_code", code},
                                      {"analysis", current},
                                      {"module", module_of(current)},
                                      {"kind", std::string(to_string(e.kind()))},
                                      {"message", e.what()}});
    }
    return code;
  } catch (const std::exception& e) {
    log << "error in " << current << ": " << e.what() << '\n';
    std::error_code ec;
    if (fs::is_directory(out, ec)) {
      write_json(out / "error.json", {{"exit_code", 3},
                                      {"analysis", current},
                                      {"module", module_of(current)},
                                      {"kind", "Exception"},
                                      {"message", e.what()}});
    }
    return 3;
  }
}

int run_config(const std::vector<ConfigEntry>& entries, const fs::path& out, std::ostream& log) {
  Scenario s;
  try {
    s = build_scenario(entries);
  } catch (const Error& e) {
    log << e.what() << '\n';
    return 2;
  }
  return run_scenario(s, out, log);
}

}  // namespace rangeshift
