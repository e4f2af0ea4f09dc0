#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "rangeshift/classifier.hpp"
#include "rangeshift/diagnostics.hpp"
#include "rangeshift/thresholds.hpp"

namespace rangeshift {

/// Shortest decimal that round-trips, independent of the global locale.
std::string format_double(double v);

class CsvWriter {
 public:
  using Cell = std::variant<double, long, std::string>;

  CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string> header);
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(const std::vector<Cell>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// (t, z, u) per node and snapshot; adds x = z + c t when fixed_frame.
void write_snapshots_csv(const std::filesystem::path& path, const Trace& trace, const Grid1D& grid, double c,
                         bool fixed_frame);
/// (t, name, value) long format.
void write_observers_csv(const std::filesystem::path& path, const Trace& trace);

/// z, p, dp: analytic left tail on [z_left, 0) then the stored right samples.
void write_profile_csv(const std::filesystem::path& path, const StationaryProfile& profile, double z_left = -10.0);
nlohmann::json profile_header(const StationaryProfile& profile);
/// id, tag, alpha, z, p, dp for every curve.
void write_portrait_csv(const std::filesystem::path& path, const std::vector<PortraitCurve>& curves);
void write_bump_csv(const std::filesystem::path& path, const std::vector<PhasePoint>& samples);
/// t, count.
void write_zero_number_csv(const std::filesystem::path& path, const ZeroNumberSeries& z);
/// parameter, verdict, settled, decided_at, horizon_used, min_dist_ground, t_min_dist_ground.
void write_probes_csv(const std::filesystem::path& path, const std::vector<Probe>& probes);
/// Long-format (c, sigma) outcome diagram.
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

nlohmann::json to_json(const ShootingTolerances& t);
nlohmann::json to_json(const Outcome& o, bool with_evidence = true);
nlohmann::json to_json(const ClassifierConfig& c);
nlohmann::json to_json(const Probe& p);
nlohmann::json to_json(const ThresholdResult& r);
ThresholdResult threshold_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ZeroNumberSeries& z);
nlohmann::json to_json(const EnvelopeReport& r);
nlohmann::json to_json(const AlphaStar& a);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace rangeshift
