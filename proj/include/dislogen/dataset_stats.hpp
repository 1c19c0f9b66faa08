#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "dislogen/distributions.hpp"
#include "dislogen/stats.hpp"

namespace dislogen::stats {

// Microstructure features pooled over many scene records.
struct FeatureSamples {
  std::size_t records = 0;
  std::vector<int> pileups;                  // per record
  std::vector<int> requested_dislocations;   // per pileup, as drawn
  std::vector<int> realized_dislocations;    // per pileup, after the scene cap
  std::vector<double> slip_width;            // per pileup
  std::vector<double> slip_direction;        // per pileup
  std::vector<double> spacing;               // per consecutive dislocation pair
  std::vector<std::string> distributions;    // distinct distribution ids seen

  void add_record(const nlohmann::json& record);
};

// Every params_*.json under `dir`, recursively, in path order. Throws
// SchemaError listing unreadable records and IoError when none are found.
FeatureSamples collect_features(const std::filesystem::path& dir);

struct FeatureReport {
  std::string name;
  std::size_t samples = 0;
  Histogram histogram;
  std::optional<ChiSquareResult> test;  // only with a reference distribution
};

struct StatsReport {
  std::size_t records = 0;
  std::string distribution;  // empty when no reference was available
  std::vector<FeatureReport> features;
};

// Histograms of the five features; with `dist`, chi-square tests against it.
// Counts per pileup are tested on the requested values.
StatsReport summarize(const FeatureSamples& s, const microstructure::FeatureDistributions* dist);

nlohmann::json to_json(const StatsReport& r);

// summary.json plus one <feature>.csv histogram per feature.
void write_stats(const StatsReport& r, const std::filesystem::path& out_dir);

}  // namespace dislogen::stats
