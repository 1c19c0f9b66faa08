#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "dislogen/geometry.hpp"
#include "dislogen/rng.hpp"

namespace dislogen::microstructure {

// Finite distribution over integer values.
struct DiscreteDistribution {
  std::vector<int> values;
  std::vector<double> weights;  // unnormalized, same length as values

  static DiscreteDistribution uniform(int lo, int hi);

  int sample(Rng& rng) const;
  double probability(int value) const;
  int max_value() const;
  void validate(const std::string& name) const;
};

// Piecewise-uniform density: bin i covers [edges[i], edges[i+1]) with mass
// proportional to weights[i]. A uniform law is a single bin.
struct ContinuousDistribution {
  std::vector<double> edges;
  std::vector<double> weights;

  static ContinuousDistribution uniform(double lo, double hi);

  double sample(Rng& rng) const;
  double cdf(double x) const;
  double lower() const { return edges.front(); }
  double upper() const { return edges.back(); }
  void validate(const std::string& name) const;
};

// A dislocation shape in the slip-band frame. x (u) runs along the traces and
// y (v) across the band: the first point has v = 0 (trace 1), the last v = 1
// (trace 2). Lengths are in units of the slip width.
struct Shape {
  std::vector<Point> points;
  friend bool operator==(const Shape&, const Shape&) = default;
};

// Sampling laws for the five microstructure features plus the shape source.
struct FeatureDistributions {
  std::string id = "M2";
  DiscreteDistribution number_of_pileups;
  DiscreteDistribution dislocations_per_pileup;
  ContinuousDistribution slip_width;      // pixels
  ContinuousDistribution slip_direction;  // degrees
  ContinuousDistribution nearest_spacing; // pixels, along the traces
  std::vector<Shape> support_point_library;
  double library_fraction = 0.5;  // chance of drawing from the library when non-empty
  double jitter = 1.0;            // support-point jitter half-width, pixels
  int max_dislocations = 20;

  // General, uniform ranges.
  static FeatureDistributions m2();
  // Data-matched family with placeholder histograms; replace with measured ones.
  static FeatureDistributions m1_placeholder();

  // "M1", "M2", or a path to a JSON distribution file.
  static FeatureDistributions resolve(const std::string& name_or_path);
  static FeatureDistributions load(const std::filesystem::path& path);

  void validate() const;
};

void to_json(nlohmann::json& j, const DiscreteDistribution& d);
void from_json(const nlohmann::json& j, DiscreteDistribution& d);
void to_json(nlohmann::json& j, const ContinuousDistribution& d);
void from_json(const nlohmann::json& j, ContinuousDistribution& d);
void to_json(nlohmann::json& j, const Shape& s);
void from_json(const nlohmann::json& j, Shape& s);
void to_json(nlohmann::json& j, const FeatureDistributions& d);
void from_json(const nlohmann::json& j, FeatureDistributions& d);

// Normalizes an open polyline into the slip-band frame: the first point maps
// to (0, 0) and the last to (0, 1) by a similarity transform.
Shape normalize_shape(const std::vector<Point>& polyline);

// Reads every line/linestrip annotation of a labelme JSON file as a shape.
std::vector<Shape> import_labelme_shapes(const std::filesystem::path& path);

// Parametric shape: arc (parabolic sagitta) or S-curve with a lean, 4-7 points.
Shape random_parametric_shape(Rng& rng);

}  // namespace dislogen::microstructure
