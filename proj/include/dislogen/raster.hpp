#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "dislogen/background.hpp"
#include "dislogen/grid.hpp"
#include "dislogen/microstructure.hpp"

namespace dislogen::raster {

inline constexpr const char* kSceneSchema = "dislogen.scene/1";

// Appearance ranges for strokes and slip traces.
struct Style {
  // Gray value drawn uniformly in [local_mean - gray_offset_max, local_mean - gray_offset_min].
  double gray_offset_min = 0.1;
  double gray_offset_max = 0.5;
  int thickness_min = 1;
  int thickness_max = 4;
  double trace_contrast = 0.05;     // traces get a contrast uniform in [-c, c]
  double trace_probability = 0.5;   // per pileup
  double edge_softening = 0.0;      // Gaussian sigma on stroke coverage; 0 = hard anti-aliased edge
  // Every stroke darkens the image by at least this much at full coverage.
  double min_darkening = 0.1;

  void validate() const;
  friend bool operator==(const Style&, const Style&) = default;
};

void to_json(nlohmann::json& j, const Style& s);
void from_json(const nlohmann::json& j, Style& s);

struct SceneBundle {
  ScalarGrid image;
  std::vector<BinaryGrid> instance_masks;
  BinaryGrid combined_mask;
  nlohmann::json record;
};

// Mean background value under the curve's centerline.
double local_mean(const microstructure::DislocationCurve& c, const ScalarGrid& bg);

// Draws gray values, thicknesses and slip-trace contrasts into `spec`.
void apply_style(microstructure::MicrostructureSpec& spec, const ScalarGrid& bg, const Style& style,
                 std::uint64_t seed);

// Background with the slip traces drawn in; strokes are subtracted from this.
ScalarGrid draw_slip_traces(const microstructure::MicrostructureSpec& spec, const ScalarGrid& bg);

// Distance from each pixel center to the curve's sampled centerline, limited
// to pixels closer than `reach`; other pixels hold +infinity.
ScalarGrid centerline_distance(const microstructure::DislocationCurve& c, std::size_t rows,
                               std::size_t cols, double reach);

// Pixels within thickness/2 of the centerline plus the pixels containing the
// centerline samples, so thin strokes stay 8-connected.
BinaryGrid stroke_mask(const microstructure::DislocationCurve& c, std::size_t rows, std::size_t cols);

// Renders the scene on `bg`. Gray values and thicknesses come from `spec`.
// The record holds only the microstructure; generate_scene() adds the recipe and seeds.
SceneBundle render(const microstructure::MicrostructureSpec& spec, const ScalarGrid& bg,
                   const Style& style);

struct GeneratorConfig {
  std::string distribution = "M2";  // "M1", "M2" or a distribution file
  background::Mode background_mode = background::Mode::synthetic;
  std::string background_library;   // directory, required for real mode
  microstructure::ImageDims dims;
  Style style;
  background::SyntheticRanges ranges;

  void validate() const;
};

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);

// Full pipeline for one image: background recipe, microstructure, style, render.
SceneBundle generate_scene(const GeneratorConfig& config, std::uint64_t seed,
                           const background::BackgroundLibrary* library = nullptr);
SceneBundle generate_scene(const GeneratorConfig& config,
                           const microstructure::FeatureDistributions& dist, std::uint64_t seed,
                           const background::BackgroundLibrary* library = nullptr);

struct BundleFiles {
  std::filesystem::path image;
  std::vector<std::filesystem::path> masks;
  std::filesystem::path combined;
  std::filesystem::path params;
  std::vector<std::filesystem::path> all() const;
};

BundleFiles bundle_files(const std::filesystem::path& dir, std::size_t index, std::size_t mask_count);

// Writes img_{index}.png, mask_{index}_{k:02}.png (k from 0), mask_{index}_all.png
// and params_{index}.json. Returns the paths written.
BundleFiles emit(const SceneBundle& bundle, const std::filesystem::path& out_dir, std::size_t index);

// Serialized form of the record as written to params_{index}.json.
std::string record_text(const nlohmann::json& record);

// Rebuilds the bundle from a params record.
SceneBundle replay(const nlohmann::json& record,
                   const background::BackgroundLibrary* library = nullptr);

}  // namespace dislogen::raster
