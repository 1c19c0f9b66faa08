#include "dislogen/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "dislogen/errors.hpp"

namespace dislogen::microstructure {

using nlohmann::json;

DiscreteDistribution DiscreteDistribution::uniform(int lo, int hi) {
  DiscreteDistribution d;
  for (int v = lo; v <= hi; ++v) {
    d.values.push_back(v);
    d.weights.push_back(1.0);
  }
  return d;
}

int DiscreteDistribution::sample(Rng& rng) const {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (u < weights[i]) return values[i];
    u -= weights[i];
  }
  return values.back();
}

double DiscreteDistribution::probability(int value) const {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double p = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == value) p += weights[i];
  }
  return p / total;
}

int DiscreteDistribution::max_value() const {
  return *std::max_element(values.begin(), values.end());
}

void DiscreteDistribution::validate(const std::string& name) const {
  if (values.empty() || values.size() != weights.size()) {
    throw ConfigError(name + ": values and weights must be non-empty and equally long");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError(name + ": negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError(name + ": weights sum to zero");
}

ContinuousDistribution ContinuousDistribution::uniform(double lo, double hi) {
  return {{lo, hi}, {1.0}};
}

double ContinuousDistribution::sample(Rng& rng) const {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = rng.uniform() * total;
  std::size_t bin = weights.size() - 1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) {
      bin = i;
      break;
    }
    u -= weights[i];
  }
  return rng.uniform(edges[bin], edges[bin + 1]);
}

double ContinuousDistribution::cdf(double x) const {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (x >= edges[i + 1]) {
      acc += weights[i];
    } else if (x > edges[i]) {
      acc += weights[i] * (x - edges[i]) / (edges[i + 1] - edges[i]);
      break;
    } else {
      break;
    }
  }
  return acc / total;
}

void ContinuousDistribution::validate(const std::string& name) const {
  if (edges.size() < 2 || weights.size() + 1 != edges.size()) {
    throw ConfigError(name + ": need n+1 edges for n weights");
  }
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    if (!(edges[i + 1] > edges[i])) throw ConfigError(name + ": edges must increase");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw ConfigError(name + ": negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw ConfigError(name + ": weights sum to zero");
}

FeatureDistributions FeatureDistributions::m2() {
  FeatureDistributions d;
  d.id = "M2";
  d.number_of_pileups = DiscreteDistribution::uniform(1, 3);
  d.dislocations_per_pileup = DiscreteDistribution::uniform(1, 8);
  d.slip_direction = ContinuousDistribution::uniform(0.0, 180.0);
  d.slip_width = ContinuousDistribution::uniform(100.0, 400.0);
  d.nearest_spacing = ContinuousDistribution::uniform(2.0, 40.0);
  return d;
}

FeatureDistributions FeatureDistributions::m1_placeholder() {
  FeatureDistributions d;
  d.id = "M1";
  d.number_of_pileups = {{1, 2, 3, 4}, {0.2, 0.4, 0.3, 0.1}};
  d.dislocations_per_pileup = {{1, 2, 3, 4}, {0.1, 0.5, 0.25, 0.15}};
  d.slip_width = {{150.0, 200.0, 250.0, 300.0, 350.0}, {0.15, 0.35, 0.35, 0.15}};
  d.slip_direction = {{20.0, 40.0, 60.0, 80.0}, {0.2, 0.6, 0.2}};
  d.nearest_spacing = {{5.0, 10.0, 20.0, 40.0}, {0.3, 0.5, 0.2}};
  return d;
}

FeatureDistributions FeatureDistributions::resolve(const std::string& name_or_path) {
  if (name_or_path == "M2" || name_or_path == "m2") return m2();
  if (name_or_path == "M1" || name_or_path == "m1") return m1_placeholder();
  return load(name_or_path);
}

FeatureDistributions FeatureDistributions::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature distribution file", path.string());
  try {
    json j;
    in >> j;
    auto d = j.get<FeatureDistributions>();
    d.validate();
    return d;
  } catch (const json::exception& e) {
    throw ConfigError("malformed feature distribution file " + path.string() + ": " + e.what());
  }
}

void FeatureDistributions::validate() const {
  number_of_pileups.validate("number_of_pileups");
  dislocations_per_pileup.validate("dislocations_per_pileup");
  slip_width.validate("slip_width");
  slip_direction.validate("slip_direction");
  nearest_spacing.validate("nearest_spacing");
  if (number_of_pileups.values.front() < 0 ||
      *std::min_element(dislocations_per_pileup.values.begin(),
                        dislocations_per_pileup.values.end()) < 1) {
    throw ConfigError("pileup and dislocation counts must be positive");
  }
  if (!(slip_width.lower() > 0.0)) throw ConfigError("slip_width must be positive");
  if (nearest_spacing.lower() < 0.0) throw ConfigError("nearest_spacing must be non-negative");
  if (!(jitter >= 0.0)) throw ConfigError("jitter must be non-negative");
  if (max_dislocations < 1) throw ConfigError("max_dislocations must be >= 1");
  for (const auto& s : support_point_library) {
    if (s.points.size() < 3) throw ConfigError("library shapes need at least 3 points");
  }
}

void to_json(json& j, const DiscreteDistribution& d) {
  j = json{{"values", d.values}, {"weights", d.weights}};
}
void from_json(const json& j, DiscreteDistribution& d) {
  if (j.contains("uniform")) {
    d = DiscreteDistribution::uniform(j["uniform"].at(0).get<int>(), j["uniform"].at(1).get<int>());
    return;
  }
  j.at("values").get_to(d.values);
  j.at("weights").get_to(d.weights);
}
void to_json(json& j, const ContinuousDistribution& d) {
  j = json{{"edges", d.edges}, {"weights", d.weights}};
}
void from_json(const json& j, ContinuousDistribution& d) {
  if (j.contains("uniform")) {
    d = ContinuousDistribution::uniform(j["uniform"].at(0).get<double>(),
                                        j["uniform"].at(1).get<double>());
    return;
  }
  j.at("edges").get_to(d.edges);
  j.at("weights").get_to(d.weights);
}
void to_json(json& j, const Shape& s) { j = s.points; }
void from_json(const json& j, Shape& s) { j.get_to(s.points); }

void to_json(json& j, const FeatureDistributions& d) {
  j = json{{"id", d.id},
           {"number_of_pileups", d.number_of_pileups},
           {"dislocations_per_pileup", d.dislocations_per_pileup},
           {"slip_width", d.slip_width},
           {"slip_direction", d.slip_direction},
           {"nearest_spacing", d.nearest_spacing},
           {"support_point_library", d.support_point_library},
           {"library_fraction", d.library_fraction},
           {"jitter", d.jitter},
           {"max_dislocations", d.max_dislocations}};
}

void from_json(const json& j, FeatureDistributions& d) {
  d = FeatureDistributions::m2();
  d.id = j.value("id", std::string("custom"));
  if (j.contains("number_of_pileups")) j["number_of_pileups"].get_to(d.number_of_pileups);
  if (j.contains("dislocations_per_pileup")) j["dislocations_per_pileup"].get_to(d.dislocations_per_pileup);
  if (j.contains("slip_width")) j["slip_width"].get_to(d.slip_width);
  if (j.contains("slip_direction")) j["slip_direction"].get_to(d.slip_direction);
  if (j.contains("nearest_spacing")) j["nearest_spacing"].get_to(d.nearest_spacing);
  if (j.contains("support_point_library")) j["support_point_library"].get_to(d.support_point_library);
  d.library_fraction = j.value("library_fraction", d.library_fraction);
  d.jitter = j.value("jitter", d.jitter);
  d.max_dislocations = j.value("max_dislocations", d.max_dislocations);
}

Shape normalize_shape(const std::vector<Point>& polyline) {
  if (polyline.size() < 3) throw ParameterError("shape needs at least 3 points");
  const Point a = polyline.front();
  const Point chord = polyline.back() - a;
  const double len = norm(chord);
  if (!(len > 0.0)) throw ParameterError("shape endpoints coincide");
  // Rotate so the chord points along +v, then scale it to unit length.
  const Point ev = (1.0 / len) * chord;
  const Point eu{ev.y, -ev.x};
  Shape s;
  for (const Point& p : polyline) {
    const Point d = p - a;
    s.points.push_back({dot(d, eu) / len, dot(d, ev) / len});
  }
  s.points.front() = {0.0, 0.0};
  s.points.back() = {0.0, 1.0};
  return s;
}

std::vector<Shape> import_labelme_shapes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open labelme file", path.string());
  std::vector<Shape> shapes;
  try {
    json j;
    in >> j;
    for (const auto& s : j.at("shapes")) {
      const auto type = s.value("shape_type", std::string("linestrip"));
      if (type != "linestrip" && type != "line") continue;
      std::vector<Point> pts;
      for (const auto& p : s.at("points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      if (pts.size() >= 3) shapes.push_back(normalize_shape(pts));
    }
  } catch (const json::exception& e) {
    throw SchemaError("malformed labelme file " + path.string() + ": " + e.what());
  }
  return shapes;
}

Shape random_parametric_shape(Rng& rng) {
  const bool s_curve = rng.bernoulli(0.3);
  const double bend = rng.uniform(-0.25, 0.25);
  const double lean = rng.uniform(-0.3, 0.3);
  const auto count = static_cast<std::size_t>(rng.uniform_int(4, 7));
  Shape s;
  for (std::size_t k = 0; k < count; ++k) {
    const double v = static_cast<double>(k) / static_cast<double>(count - 1);
    const double profile = s_curve ? 0.5 * std::sin(2.0 * std::numbers::pi * v) : 4.0 * v * (1.0 - v);
    s.points.push_back({bend * profile + lean * v, v});
  }
  return s;
}

}  // namespace dislogen::microstructure
