#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dislogen/grid.hpp"

namespace dislogen::background {

// Parameters of the Perlin + white-noise + smoothing pipeline. A filter
// sigma of 0 disables that smoothing step.
struct SyntheticBackgroundRecipe {
  double lambda1 = 60.0;
  double lambda2 = 15.0;
  double w_perlin = 0.3;
  double w_white1 = 0.6;
  double s1 = 1.0;
  double w_white2_scale = 0.3;  // multiplies stddev(P4) for the second white noise
  double s2 = 0.7;
  std::uint64_t seed_perlin1 = 0;
  std::uint64_t seed_perlin2 = 0;
  std::uint64_t seed_white = 0;
  int reseeds = 0;  // times the Perlin seeds were bumped after a constant P3

  friend bool operator==(const SyntheticBackgroundRecipe&,
                         const SyntheticBackgroundRecipe&) = default;
};

// Where a patch is cropped from, and how the crop is mirrored.
struct PatchView {
  std::size_t row_offset = 0;
  std::size_t col_offset = 0;
  bool flip_h = false;  // mirror columns
  bool flip_v = false;  // mirror rows

  friend bool operator==(const PatchView&, const PatchView&) = default;
};

struct RealBackgroundRecipe {
  std::string patch_a;
  std::string patch_b;
  double opacity = 0.5;  // weight of patch_a
  PatchView view_a;
  PatchView view_b;
  std::uint64_t seed = 0;

  friend bool operator==(const RealBackgroundRecipe&, const RealBackgroundRecipe&) = default;
};

using BackgroundRecipe = std::variant<SyntheticBackgroundRecipe, RealBackgroundRecipe>;

enum class Mode { synthetic, real };

Mode parse_mode(const std::string& s);
std::string to_string(Mode m);

// Read-only collection of normalized [0,1] grayscale patches keyed by ID.
class BackgroundLibrary {
 public:
  // Loads `index.json` ({"patches": [{"id": ..., "file": ...}]}) from `dir`,
  // or every *.png in it (ID = file stem) when there is no index.
  static BackgroundLibrary load(const std::filesystem::path& dir);

  // Writes every patch as PNG plus index.json.
  void save(const std::filesystem::path& dir) const;

  void add(std::string id, ScalarGrid patch);

  bool contains(const std::string& id) const { return patches_.count(id) != 0; }
  const ScalarGrid& patch(const std::string& id) const;
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

 private:
  std::vector<std::string> ids_;
  std::map<std::string, ScalarGrid> patches_;
};

// Uniform sampling ranges for synthetic recipes.
struct SyntheticRanges {
  double lambda_min = 10.0, lambda_max = 100.0;
  double w_perlin_min = 0.2, w_perlin_max = 0.4;
  double w_white1_min = 0.5, w_white1_max = 0.7;
  double s1 = 1.0;
  double w_white2_scale_min = 0.2, w_white2_scale_max = 0.4;
  double s2_min = 0.6, s2_max = 0.8;
};

ScalarGrid synth_background(const SyntheticBackgroundRecipe& r, std::size_t rows,
                            std::size_t cols);

// synth_background that bumps both Perlin seeds by one (and counts it in
// `r.reseeds`) whenever the Perlin sum comes out constant.
ScalarGrid synth_background_reseeding(SyntheticBackgroundRecipe& r, std::size_t rows,
                                      std::size_t cols);

ScalarGrid real_background(const RealBackgroundRecipe& r, const BackgroundLibrary& library,
                           std::size_t rows, std::size_t cols);

// Crops `rows` x `cols` at the view offset, then applies the flips.
ScalarGrid crop_patch(const ScalarGrid& patch, const PatchView& view, std::size_t rows,
                      std::size_t cols);

// Real mode needs a non-empty library whose patches cover rows x cols.
BackgroundRecipe sample_background_recipe(std::uint64_t seed, Mode mode,
                                          const BackgroundLibrary* library, std::size_t rows,
                                          std::size_t cols, const SyntheticRanges& ranges = {});

// Dispatches on the recipe type. The synthetic path may reseed `recipe`.
ScalarGrid make_background(BackgroundRecipe& recipe, const BackgroundLibrary* library,
                           std::size_t rows, std::size_t cols);

// Patch IDs referenced by the recipe that `library` lacks (empty when fine).
std::vector<std::string> missing_patches(const BackgroundRecipe& recipe,
                                         const BackgroundLibrary* library);

void to_json(nlohmann::json& j, const SyntheticBackgroundRecipe& r);
void from_json(const nlohmann::json& j, SyntheticBackgroundRecipe& r);
void to_json(nlohmann::json& j, const PatchView& v);
void from_json(const nlohmann::json& j, PatchView& v);
void to_json(nlohmann::json& j, const RealBackgroundRecipe& r);
void from_json(const nlohmann::json& j, RealBackgroundRecipe& r);

void to_json(nlohmann::json& j, const SyntheticRanges& r);
void from_json(const nlohmann::json& j, SyntheticRanges& r);

nlohmann::json recipe_to_json(const BackgroundRecipe& r);
BackgroundRecipe recipe_from_json(const nlohmann::json& j);

}  // namespace dislogen::background
