#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rangeshift/classifier.hpp"
#include "rangeshift/pde.hpp"
#include "rangeshift/phase_plane.hpp"
#include "rangeshift/thresholds.hpp"

namespace rangeshift {

/// One `key = value` line of a config document.
struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;  // 0 for command-line overrides
};

/// Flat key-value document: `#` starts a comment, keys may be dotted.
std::vector<ConfigEntry> parse_config(std::string_view text);
std::vector<ConfigEntry> read_config(const std::filesystem::path& path);

struct ModelSpec {
  std::string kind = "kpp";  // kpp | figure1 | cubic_allee | table
  double nu = 4.0;
  std::optional<double> s_max;
  std::filesystem::path table;  // CSV with columns s, g
  double rho = 1.0;
};

struct DatumSpec {
  // box | table | invasion | ground | critical_ground | bump | cap
  std::string kind = "box";
  double amplitude = 1.0;
  double a = 0.0;
  double b = 1.0;
  std::optional<double> alpha;  // ground, cap; cap defaults to alpha*/2
  std::optional<double> theta;  // bump; defaults to (theta_c + 1)/2
  double scale = 1.0;
  std::filesystem::path table;  // CSV with columns z, u
};

struct FamilySpec {
  std::string kind = "amplitude";  // amplitude: sigma chi_[a,b]; width: amplitude chi_[center-sigma, center+sigma]
  double a = 0.0;
  double b = 1.0;
  double amplitude = 1.0;
  double center = 0.0;
};

struct DiagnoseSpec {
  std::string reference = "auto";  // auto | invasion | critical | none
  std::optional<std::pair<double, double>> interval;
  std::optional<double> gamma;
  double calibrate_fraction = 0.5;  // envelope calibrated on t <= fraction * T, checked on all of it
  std::optional<double> energy_cutoff;
};

struct Scenario {
  std::string name = "scenario";
  std::vector<std::string> analyses;  // closed under prerequisites, in execution order
  ModelSpec model;
  std::optional<double> speed;
  std::vector<double> speeds;
  std::optional<DatumSpec> datum;
  std::optional<FamilySpec> family;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double sigma_tol = 1e-3;
  std::vector<double> sigmas;
  double z_min = -40.0;
  double z_max = 200.0;
  double dz = 0.05;
  SolverConfig solver;
  ClassifierConfig classifier;
  ShootingTolerances shooting;
  double tol_c = 1e-3;
  std::vector<double> portrait_alphas = {0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
  std::vector<double> stationary_alphas;
  DiagnoseSpec diagnose;
  bool fixed_frame = false;
  bool export_snapshots = true;
  int workers = 1;
};

/// Validates and resolves the entries; later entries override earlier ones.
/// Throws ConfigError naming the offending key.
Scenario build_scenario(const std::vector<ConfigEntry>& entries);

/// Prerequisite closure of the requested analyses, in execution order.
std::vector<std::string> resolve_analyses(const std::vector<std::string>& requested);

/// Runs every analysis and writes its artifacts under `out`. Returns 0 on
/// success, 2 on a validation error, 3 on a numerical failure (error.json).
int run_scenario(const Scenario& scenario, const std::filesystem::path& out, std::ostream& log);

/// Parses, validates and runs in one go, mapping config errors to exit 2.
int run_config(const std::vector<ConfigEntry>& entries, const std::filesystem::path& out, std::ostream& log);

}  // namespace rangeshift
