#include "rangeshift/io.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "rangeshift/error.hpp"

namespace rangeshift {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header)
    : CsvWriter(path, std::vector<std::string>(header)) {}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != columns_) throw Error(ErrorKind::InvalidArgument, "CSV row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [this](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, double>) {
            out_ << format_double(v);
          } else if constexpr (std::is_same_v<T, long>) {
            out_ << v;
          } else {
            out_ << v;
          }
        },
        cells[i]);
  }
  out_ << '\n';
}

void write_snapshots_csv(const std::filesystem::path& path, const Trace& trace, const Grid1D& grid, double c,
                         bool fixed_frame) {
  std::vector<std::string> header = {"t", "z"};
  if (fixed_frame) header.push_back("x");
  header.push_back("u");
  CsvWriter w(path, header);
  for (const Field& f : trace.snapshots) {
    for (int i = 0; i < grid.n; ++i) {
      const double z = grid.z(i);
      const double u = f.u[static_cast<std::size_t>(i)];
      if (fixed_frame) {
        w.row({f.t, z, z + c * f.t, u});
      } else {
        w.row({f.t, z, u});
      }
    }
  }
}

void write_observers_csv(const std::filesystem::path& path, const Trace& trace) {
  CsvWriter w(path, {"t", "name", "value"});
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    for (const auto& [name, values] : trace.series) w.row({trace.times[k], name, values[k]});
  }
}

namespace {

// JSON has no infinities or NaN; store them as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double read_number(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  return j.get<double>();
}

std::string degenerate_name(Degenerate d) {
  switch (d) {
    case Degenerate::None: return "none";
    case Degenerate::AtLowEnd: return "at_low_end";
    case Degenerate::AtHighEnd: return "at_high_end";
  }
  return "none";
}

Probe probe_from_json(const json& j) {
  Probe p;
  p.param = read_number(j.at("param"));
  p.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  if (!j.at("settled").is_null()) p.settled = verdict_from_string(j.at("settled").get<std::string>());
  p.decided_at = read_number(j.at("decided_at"));
  p.horizon_used = read_number(j.at("horizon_used"));
  p.min_dist_ground = read_number(j.at("min_dist_ground"));
  p.t_min_dist_ground = read_number(j.at("t_min_dist_ground"));
  return p;
}

}  // namespace

json to_json(const ClassifierConfig& c) {
  return {{"eps_extinct", c.eps_extinct}, {"eps_spread", c.eps_spread}, {"eps_ground", c.eps_ground},
          {"window", c.window},           {"dwell", c.dwell},           {"horizon", c.horizon}};
}

json to_json(const Outcome& o, bool with_evidence) {
  json j;
  j["verdict"] = to_string(o.verdict);
  j["decided_at"] = o.decided_at;
  j["horizon_used"] = o.horizon_used;
  j["resolution"] = o.resolution ? json(to_string(*o.resolution)) : json(nullptr);
  j["resolved_at"] = o.resolved_at;
  j["min_dist_ground"] = number(o.min_dist_ground);
  j["t_min_dist_ground"] = o.t_min_dist_ground;
  j["config"] = to_json(o.config);
  json ev = json::array();
  if (with_evidence) {
    for (const Evidence& e : o.evidence) ev.push_back({{"metric", e.metric}, {"time", e.time}, {"value", number(e.value)}});
  }
  j["evidence"] = ev;
  return j;
}

json to_json(const Probe& p) {
  return {{"param", number(p.param)},
          {"verdict", to_string(p.verdict)},
          {"settled", p.settled ? json(to_string(*p.settled)) : json(nullptr)},
          {"decided_at", number(p.decided_at)},
          {"horizon_used", number(p.horizon_used)},
          {"min_dist_ground", number(p.min_dist_ground)},
          {"t_min_dist_ground", number(p.t_min_dist_ground)}};
}

json to_json(const ThresholdResult& r) {
  json runs = json::array();
  for (const Probe& p : r.runs) runs.push_back(to_json(p));
  return {{"parameter", r.parameter},
          {"bracket", {number(r.lo), number(r.hi)}},
          {"outcome_lo", to_string(r.outcome_lo)},
          {"outcome_hi", to_string(r.outcome_hi)},
          {"degenerate", degenerate_name(r.degenerate)},
          {"value", number(r.value)},
          {"raw_value", number(r.raw_value)},
          {"clamped", r.clamped},
          {"midpoint", r.midpoint ? to_json(*r.midpoint) : json(nullptr)},
          {"runs", runs}};
}

ThresholdResult threshold_from_json(const json& j) {
  ThresholdResult r;
  r.parameter = j.at("parameter").get<std::string>();
  r.lo = read_number(j.at("bracket").at(0));
  r.hi = read_number(j.at("bracket").at(1));
  r.outcome_lo = verdict_from_string(j.at("outcome_lo").get<std::string>());
  r.outcome_hi = verdict_from_string(j.at("outcome_hi").get<std::string>());
  const std::string d = j.at("degenerate").get<std::string>();
  r.degenerate = d == "at_low_end" ? Degenerate::AtLowEnd : d == "at_high_end" ? Degenerate::AtHighEnd : Degenerate::None;
  r.value = read_number(j.at("value"));
  r.raw_value = read_number(j.at("raw_value"));
  r.clamped = j.at("clamped").get<bool>();
  if (!j.at("midpoint").is_null()) r.midpoint = probe_from_json(j.at("midpoint"));
  for (const json& p : j.at("runs")) r.runs.push_back(probe_from_json(p));
  return r;
}

json to_json(const ZeroNumberSeries& z) {
  json inc = json::array();
  for (const auto& i : z.increases) {
    inc.push_back({{"t", z.times[i.index]}, {"from", i.from}, {"to", i.to}, {"artifact", i.artifact}});
  }
  json drops = json::array();
  for (const std::size_t k : z.drops) drops.push_back(z.times[k]);
  return {{"times", z.times}, {"counts", z.counts}, {"increases", inc}, {"drop_times", drops},
          {"nonincreasing", z.nonincreasing}};
}

json to_json(const EnvelopeReport& r) {
  return {{"pass", r.pass},
          {"critical_form", r.critical_form},
          {"rate", r.rate},
          {"eps", r.eps},
          {"z_eps", r.z_eps},
          {"worst_ratio", number(r.worst_ratio)},
          {"worst_t", r.worst_t},
          {"worst_z", r.worst_z},
          {"first_failure_t", r.first_failure_t ? json(*r.first_failure_t) : json(nullptr)},
          {"times", r.times},
          {"ratio_per_snapshot", r.ratio_per_snapshot}};
}

void write_profile_csv(const std::filesystem::path& path, const StationaryProfile& profile, double z_left) {
  CsvWriter w(path, {"z", "p", "dp"});
  const auto& rs = profile.right_samples;
  const double h = rs.size() > 1 ? rs[1].z - rs[0].z : 1e-2;
  const long n_left = static_cast<long>(std::ceil(-z_left / h));
  for (long k = n_left; k >= 1; --k) {
    const double z = -static_cast<double>(k) * h;
    w.row({z, profile.value_at(z), profile.slope_at(z)});
  }
  for (const PhasePoint& s : rs) w.row({s.z, s.p, s.dp});
}

json profile_header(const StationaryProfile& profile) {
  json j = {{"kind", to_string(profile.kind)},
            {"c", profile.c},
            {"rho", profile.rho},
            {"alpha", profile.alpha},
            {"mu_c", profile.mu_c},
            {"glue_slope", profile.glue_slope},
            {"tail_rate", profile.tail_rate},
            {"z_end", profile.z_end()},
            {"tolerances", to_json(profile.tolerances)}};
  j["fitted_decay"] = profile.fitted_decay ? json(*profile.fitted_decay) : json(nullptr);
  return j;
}

void write_portrait_csv(const std::filesystem::path& path, const std::vector<PortraitCurve>& curves) {
  CsvWriter w(path, {"id", "tag", "alpha", "z", "p", "dp"});
  for (const PortraitCurve& c : curves) {
    for (const PhasePoint& s : c.trajectory.samples) w.row({static_cast<long>(c.id), c.tag, c.alpha, s.z, s.p, s.dp});
  }
}

void write_bump_csv(const std::filesystem::path& path, const std::vector<PhasePoint>& samples) {
  CsvWriter w(path, {"z", "p", "dp"});
  for (const PhasePoint& s : samples) w.row({s.z, s.p, s.dp});
}

void write_zero_number_csv(const std::filesystem::path& path, const ZeroNumberSeries& z) {
  CsvWriter w(path, {"t", "count"});
  for (std::size_t k = 0; k < z.times.size(); ++k) w.row({z.times[k], static_cast<long>(z.counts[k])});
}

void write_probes_csv(const std::filesystem::path& path, const std::vector<Probe>& probes) {
  CsvWriter w(path, {"parameter", "verdict", "settled", "decided_at", "horizon_used", "min_dist_ground",
                     "t_min_dist_ground"});
  for (const Probe& p : probes) {
    w.row({p.param, to_string(p.verdict), p.settled ? to_string(*p.settled) : std::string(), p.decided_at,
           p.horizon_used, p.min_dist_ground, p.t_min_dist_ground});
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  CsvWriter w(path, {"c", "sigma", "verdict", "settled", "decided_at", "horizon_used", "min_dist_ground"});
  for (const SweepRow& r : rows) {
    const Probe& p = r.probe;
    w.row({r.c, r.sigma, to_string(p.verdict), p.settled ? to_string(*p.settled) : std::string(), p.decided_at,
           p.horizon_used, p.min_dist_ground});
  }
}

json to_json(const ShootingTolerances& t) {
  return {{"tol", t.tol},
          {"atol_scale", t.atol_scale},
          {"eps_origin", t.eps_origin},
          {"eps_glue", t.eps_glue},
          {"eps_tail", t.eps_tail},
          {"delta_manifold", t.delta_manifold},
          {"tol_alpha", t.tol_alpha},
          {"tol_c", t.tol_c},
          {"p_floor", t.p_floor},
          {"horizon", t.horizon},
          {"sample_dz", t.sample_dz}};
}

json to_json(const AlphaStar& a) {
  return {{"value", a.value}, {"lo", a.lo}, {"hi", a.hi}, {"p_plus0", a.p_plus0}, {"saturated", a.saturated}};
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace rangeshift
