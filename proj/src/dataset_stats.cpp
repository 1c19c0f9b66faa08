#include "dislogen/dataset_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <regex>

#include "dislogen/errors.hpp"

namespace dislogen::stats {

using nlohmann::json;

void FeatureSamples::add_record(const json& record) {
  const auto& pileups_json = record.at("microstructure").at("pileups");
  pileups.push_back(static_cast<int>(pileups_json.size()));
  for (const auto& p : pileups_json) {
    const int realized = static_cast<int>(p.at("dislocations").size());
    realized_dislocations.push_back(realized);
    requested_dislocations.push_back(p.value("requested_dislocations", realized));
    slip_width.push_back(p.at("trace").at("delta_d").get<double>());
    slip_direction.push_back(p.at("trace").at("alpha").get<double>());
    for (const auto& o : p.at("offsets")) spacing.push_back(o.get<double>());
  }
  const auto id = record.value("distribution", std::string());
  if (std::find(distributions.begin(), distributions.end(), id) == distributions.end()) {
    distributions.push_back(id);
  }
  ++records;
}

FeatureSamples collect_features(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory", dir.string());
  static const std::regex name(R"(params_\d+\.json)");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && std::regex_match(e.path().filename().string(), name)) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no params_*.json records found", dir.string());

  FeatureSamples s;
  std::vector<std::string> bad;
  for (const auto& f : files) {
    try {
      std::ifstream in(f);
      s.add_record(json::parse(in));
    } catch (const json::exception&) {
      bad.push_back(f.string());
    }
  }
  if (!bad.empty()) {
    std::string list;
    for (const auto& b : bad) list += (list.empty() ? "" : ", ") + b;
    throw SchemaError("unreadable scene records: " + list);
  }
  return s;
}

namespace {

std::vector<double> as_double(const std::vector<int>& v) { return {v.begin(), v.end()}; }

// Unit-wide bins centered on each integer value.
std::vector<double> integer_edges(int lo, int hi) {
  std::vector<double> e;
  for (int v = lo; v <= hi + 1; ++v) e.push_back(v - 0.5);
  return e;
}

std::pair<int, int> int_range(const std::vector<int>& v, const microstructure::DiscreteDistribution* d) {
  if (d) return {*std::min_element(d->values.begin(), d->values.end()), d->max_value()};
  if (v.empty()) return {0, 0};
  return {*std::min_element(v.begin(), v.end()), *std::max_element(v.begin(), v.end())};
}

FeatureReport discrete_feature(std::string name, const std::vector<int>& v,
                               const microstructure::DiscreteDistribution* d) {
  const auto [lo, hi] = int_range(v, d);
  FeatureReport r{std::move(name), v.size(), histogram(as_double(v), integer_edges(lo, hi)), {}};
  if (d && !v.empty()) r.test = chi_square_discrete(v, *d);
  return r;
}

FeatureReport continuous_feature(std::string name, const std::vector<double>& v,
                                 const microstructure::ContinuousDistribution* d) {
  double lo = 0, hi = 1;
  if (d) {
    lo = d->lower();
    hi = d->upper();
  } else if (!v.empty()) {
    lo = *std::min_element(v.begin(), v.end());
    hi = *std::max_element(v.begin(), v.end());
    if (hi <= lo) hi = lo + 1;
  }
  FeatureReport r{std::move(name), v.size(), histogram(v, linear_edges(lo, hi, 20)), {}};
  if (d && !v.empty()) r.test = chi_square_continuous(v, *d);
  return r;
}

}  // namespace

StatsReport summarize(const FeatureSamples& s, const microstructure::FeatureDistributions* dist) {
  StatsReport r;
  r.records = s.records;
  if (dist) r.distribution = dist->id;
  r.features.push_back(discrete_feature("pileups", s.pileups, dist ? &dist->number_of_pileups : nullptr));
  r.features.push_back(discrete_feature("dislocations_per_pileup", s.requested_dislocations,
                                        dist ? &dist->dislocations_per_pileup : nullptr));
  auto realized = discrete_feature("realized_dislocations_per_pileup", s.realized_dislocations, nullptr);
  r.features.push_back(std::move(realized));
  r.features.push_back(continuous_feature("slip_width", s.slip_width, dist ? &dist->slip_width : nullptr));
  r.features.push_back(
      continuous_feature("slip_direction", s.slip_direction, dist ? &dist->slip_direction : nullptr));
  r.features.push_back(continuous_feature("spacing", s.spacing, dist ? &dist->nearest_spacing : nullptr));
  return r;
}

json to_json(const StatsReport& r) {
  json features = json::object();
  for (const auto& f : r.features) {
    json entry{{"samples", f.samples}, {"edges", f.histogram.edges}, {"counts", f.histogram.counts}};
    if (f.test) {
      entry["chi_square"] = {{"statistic", f.test->statistic}, {"dof", f.test->dof}, {"p_value", f.test->p_value}};
    } else {
      entry["chi_square"] = nullptr;
    }
    features[f.name] = std::move(entry);
  }
  return json{{"records", r.records},
              {"distribution", r.distribution.empty() ? json(nullptr) : json(r.distribution)},
              {"features", std::move(features)}};
}

void write_stats(const StatsReport& r, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + ec.message(), out_dir.string());
  {
    std::ofstream out(out_dir / "summary.json");
    out << to_json(r).dump(2) << "\n";
    if (!out) throw IoError("cannot write", (out_dir / "summary.json").string());
  }
  for (const auto& f : r.features) {
    const auto path = out_dir / (f.name + ".csv");
    std::ofstream out(path);
    out.precision(10);
    out << "bin_lo,bin_hi,count\n";
    for (std::size_t b = 0; b < f.histogram.counts.size(); ++b) {
      out << f.histogram.edges[b] << ',' << f.histogram.edges[b + 1] << ',' << f.histogram.counts[b] << '\n';
    }
    if (!out) throw IoError("cannot write", path.string());
  }
}

}  // namespace dislogen::stats
