#include "dislogen/raster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "dislogen/errors.hpp"
#include "dislogen/noise.hpp"
#include "dislogen/png_io.hpp"
#include "dislogen/rng.hpp"

namespace dislogen::raster {

using microstructure::DislocationCurve;
using microstructure::MicrostructureSpec;
using nlohmann::json;

void Style::validate() const {
  if (!(gray_offset_min >= 0.0 && gray_offset_min <= gray_offset_max)) {
    throw ConfigError("style: need 0 <= gray_offset_min <= gray_offset_max");
  }
  if (thickness_min < 1 || thickness_min > thickness_max) {
    throw ConfigError("style: need 1 <= thickness_min <= thickness_max");
  }
  if (!(trace_contrast >= 0.0)) throw ConfigError("style: trace_contrast must be >= 0");
  if (!(trace_probability >= 0.0 && trace_probability <= 1.0)) {
    throw ConfigError("style: trace_probability must be in [0,1]");
  }
  if (!(edge_softening >= 0.0)) throw ConfigError("style: edge_softening must be >= 0");
  if (!(min_darkening > 0.0)) throw ConfigError("style: min_darkening must be > 0");
}

void to_json(json& j, const Style& s) {
  j = json{{"gray_offset_min", s.gray_offset_min},   {"gray_offset_max", s.gray_offset_max},
           {"thickness_min", s.thickness_min},       {"thickness_max", s.thickness_max},
           {"trace_contrast", s.trace_contrast},     {"trace_probability", s.trace_probability},
           {"edge_softening", s.edge_softening},     {"min_darkening", s.min_darkening}};
}

void from_json(const json& j, Style& s) {
  s = Style{};
  s.gray_offset_min = j.value("gray_offset_min", s.gray_offset_min);
  s.gray_offset_max = j.value("gray_offset_max", s.gray_offset_max);
  s.thickness_min = j.value("thickness_min", s.thickness_min);
  s.thickness_max = j.value("thickness_max", s.thickness_max);
  s.trace_contrast = j.value("trace_contrast", s.trace_contrast);
  s.trace_probability = j.value("trace_probability", s.trace_probability);
  s.edge_softening = j.value("edge_softening", s.edge_softening);
  s.min_darkening = j.value("min_darkening", s.min_darkening);
}

namespace {

std::size_t nearest_index(double v, std::size_t n) {
  const double r = std::round(v);
  if (r <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(r), n - 1);
}

double stroke_contrast(const DislocationCurve& c, const ScalarGrid& bg, const Style& style) {
  return std::max(local_mean(c, bg) - c.gray_value, style.min_darkening);
}

}  // namespace

double local_mean(const DislocationCurve& c, const ScalarGrid& bg) {
  const auto pts = microstructure::sample_curve(c, 1.0);
  double sum = 0.0;
  for (const Point& p : pts) sum += bg(nearest_index(p.y, bg.rows()), nearest_index(p.x, bg.cols()));
  return sum / static_cast<double>(pts.size());
}

void apply_style(MicrostructureSpec& spec, const ScalarGrid& bg, const Style& style,
                 std::uint64_t seed) {
  style.validate();
  for (std::size_t p = 0; p < spec.pileups.size(); ++p) {
    auto& pileup = spec.pileups[p];
    Rng rng(derive_seed(seed, p));
    pileup.trace_contrast = rng.bernoulli(style.trace_probability)
                                ? rng.uniform(-style.trace_contrast, style.trace_contrast)
                                : 0.0;
    for (auto& c : pileup.dislocations) {
      c.thickness = static_cast<double>(rng.uniform_int(style.thickness_min, style.thickness_max));
      const double m = local_mean(c, bg);
      c.gray_value = std::clamp(rng.uniform(m - style.gray_offset_max, m - style.gray_offset_min), 0.0, 1.0);
    }
  }
}

ScalarGrid draw_slip_traces(const MicrostructureSpec& spec, const ScalarGrid& bg) {
  ScalarGrid out = bg;
  bool drawn = false;
  for (const auto& pileup : spec.pileups) {
    if (pileup.trace_contrast == 0.0) continue;
    drawn = true;
    const Point n = pileup.trace.normal();
    for (double shift : {0.0, pileup.trace.delta_d}) {
      const Point on_line = pileup.trace.anchor + shift * n;
      for (std::size_t r = 0; r < out.rows(); ++r) {
        for (std::size_t c = 0; c < out.cols(); ++c) {
          const Point px{static_cast<double>(c), static_cast<double>(r)};
          const double a = 1.0 - std::abs(dot(px - on_line, n));
          if (a > 0.0) out(r, c) += a * pileup.trace_contrast;
        }
      }
    }
  }
  return drawn ? noise::clip01(out) : out;
}

ScalarGrid centerline_distance(const DislocationCurve& c, std::size_t rows, std::size_t cols,
                               double reach) {
  ScalarGrid d(rows, cols, std::numeric_limits<double>::infinity());
  const auto pts = microstructure::sample_curve(c, 4.0);
  const auto lo_index = [&](double v) {
    return static_cast<long>(std::max(0.0, std::ceil(v)));
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point a = pts[i], b = pts[i + 1];
    const long r0 = lo_index(std::min(a.y, b.y) - reach);
    const long c0 = lo_index(std::min(a.x, b.x) - reach);
    const long r1 = std::min<long>(static_cast<long>(rows) - 1,
                                   static_cast<long>(std::floor(std::max(a.y, b.y) + reach)));
    const long c1 = std::min<long>(static_cast<long>(cols) - 1,
                                   static_cast<long>(std::floor(std::max(a.x, b.x) + reach)));
    for (long r = r0; r <= r1; ++r) {
      for (long col = c0; col <= c1; ++col) {
        const double dist =
            distance_to_segment({static_cast<double>(col), static_cast<double>(r)}, a, b);
        if (dist < reach && dist < d(r, col)) d(r, col) = dist;
      }
    }
  }
  return d;
}

BinaryGrid stroke_mask(const DislocationCurve& c, std::size_t rows, std::size_t cols) {
  const double half = 0.5 * c.thickness;
  const auto d = centerline_distance(c, rows, cols, half + 1.0);
  BinaryGrid mask(rows, cols, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) mask.values()[i] = d.values()[i] <= half ? 1 : 0;
  for (const Point& p : microstructure::sample_curve(c, 4.0)) {
    mask(nearest_index(p.y, rows), nearest_index(p.x, cols)) = 1;
  }
  return mask;
}

SceneBundle render(const MicrostructureSpec& spec, const ScalarGrid& bg, const Style& style) {
  if (bg.rows() != spec.dims.rows || bg.cols() != spec.dims.cols) {
    throw DimensionError("background is " + std::to_string(bg.rows()) + "x" +
                         std::to_string(bg.cols()) + " but the scene is " +
                         std::to_string(spec.dims.rows) + "x" + std::to_string(spec.dims.cols));
  }
  const std::size_t rows = bg.rows(), cols = bg.cols();
  SceneBundle out;
  out.image = draw_slip_traces(spec, bg);
  out.combined_mask = BinaryGrid(rows, cols, 0);

  for (const auto& pileup : spec.pileups) {
    for (const auto& curve : pileup.dislocations) {
      const double half = 0.5 * curve.thickness;
      const double blur_reach = style.edge_softening > 0.0 ? std::ceil(3.0 * style.edge_softening) : 0.0;
      const auto d = centerline_distance(curve, rows, cols, half + 1.0 + blur_reach);
      ScalarGrid coverage(rows, cols, 0.0);
      for (std::size_t i = 0; i < coverage.size(); ++i) {
        coverage.values()[i] = std::clamp(half + 0.5 - d.values()[i], 0.0, 1.0);
      }
      if (style.edge_softening > 0.0) {
        coverage = noise::gaussian_filter(coverage, {style.edge_softening});
      }
      const double k = stroke_contrast(curve, bg, style);
      for (std::size_t i = 0; i < coverage.size(); ++i) {
        const double a = coverage.values()[i];
        if (a > 0.0) out.image.values()[i] = std::max(0.0, out.image.values()[i] - a * k);
      }

      auto mask = stroke_mask(curve, rows, cols);
      for (std::size_t i = 0; i < mask.size(); ++i) out.combined_mask.values()[i] |= mask.values()[i];
      out.instance_masks.push_back(std::move(mask));
    }
  }
  out.record = json{{"schema", kSceneSchema},
                    {"dims", {rows, cols}},
                    {"style", style},
                    {"microstructure", spec}};
  return out;
}

void GeneratorConfig::validate() const {
  if (dims.rows < 16 || dims.cols < 16) throw ConfigError("image dimensions must be at least 16x16");
  if (background_mode == background::Mode::real && background_library.empty()) {
    throw ConfigError("real backgrounds need background.library");
  }
  style.validate();
}

void to_json(json& j, const GeneratorConfig& c) {
  j = json{{"distribution", c.distribution},
           {"rows", c.dims.rows},
           {"cols", c.dims.cols},
           {"background",
            {{"mode", background::to_string(c.background_mode)},
             {"library", c.background_library},
             {"ranges", c.ranges}}},
           {"style", c.style}};
}

void from_json(const json& j, GeneratorConfig& c) {
  c = GeneratorConfig{};
  c.distribution = j.value("distribution", c.distribution);
  c.dims.rows = j.value("rows", c.dims.rows);
  c.dims.cols = j.value("cols", c.dims.cols);
  if (j.contains("background")) {
    const auto& b = j["background"];
    c.background_mode = background::parse_mode(b.value("mode", std::string("synthetic")));
    c.background_library = b.value("library", std::string());
    if (b.contains("ranges")) b["ranges"].get_to(c.ranges);
  }
  if (j.contains("style")) j["style"].get_to(c.style);
}

namespace {

json scene_record(const MicrostructureSpec& spec, const background::BackgroundRecipe& recipe,
                  const Style& style, const json& seeds) {
  return json{{"schema", kSceneSchema},
              {"dims", {spec.dims.rows, spec.dims.cols}},
              {"seeds", seeds},
              {"distribution", spec.distribution_id},
              {"background", background::recipe_to_json(recipe)},
              {"style", style},
              {"microstructure", spec}};
}

}  // namespace

SceneBundle generate_scene(const GeneratorConfig& config, std::uint64_t seed,
                           const background::BackgroundLibrary* library) {
  return generate_scene(config, microstructure::FeatureDistributions::resolve(config.distribution),
                        seed, library);
}

SceneBundle generate_scene(const GeneratorConfig& config,
                           const microstructure::FeatureDistributions& dist, std::uint64_t seed,
                           const background::BackgroundLibrary* library) {
  config.validate();
  const std::uint64_t bg_seed = derive_seed(seed, 1);
  const std::uint64_t scene_seed = derive_seed(seed, 2);
  const std::uint64_t style_seed = derive_seed(seed, 3);
  const auto rows = config.dims.rows, cols = config.dims.cols;

  auto recipe = background::sample_background_recipe(bg_seed, config.background_mode, library,
                                                      rows, cols, config.ranges);
  const ScalarGrid bg = background::make_background(recipe, library, rows, cols);
  auto spec = microstructure::sample_microstructure(dist, scene_seed, config.dims);
  apply_style(spec, bg, config.style, style_seed);

  SceneBundle bundle = render(spec, bg, config.style);
  bundle.record = scene_record(spec, recipe, config.style,
                               json{{"scene", seed},
                                    {"background", bg_seed},
                                    {"microstructure", scene_seed},
                                    {"style", style_seed}});
  return bundle;
}

std::vector<std::filesystem::path> BundleFiles::all() const {
  std::vector<std::filesystem::path> out{image};
  out.insert(out.end(), masks.begin(), masks.end());
  out.push_back(combined);
  out.push_back(params);
  return out;
}

BundleFiles bundle_files(const std::filesystem::path& dir, std::size_t index, std::size_t mask_count) {
  BundleFiles f;
  const std::string i = std::to_string(index);
  f.image = dir / ("img_" + i + ".png");
  for (std::size_t k = 0; k < mask_count; ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "mask_%zu_%02zu.png", index, k);
    f.masks.push_back(dir / name);
  }
  f.combined = dir / ("mask_" + i + "_all.png");
  f.params = dir / ("params_" + i + ".json");
  return f;
}

std::string record_text(const json& record) { return record.dump(2) + "\n"; }

BundleFiles emit(const SceneBundle& bundle, const std::filesystem::path& out_dir, std::size_t index) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory: " + ec.message(), out_dir.string());
  const auto files = bundle_files(out_dir, index, bundle.instance_masks.size());
  png::write_gray8(files.image, png::quantize(bundle.image));
  for (std::size_t k = 0; k < bundle.instance_masks.size(); ++k) {
    png::write_gray8(files.masks[k], png::mask_to_gray8(bundle.instance_masks[k]));
  }
  png::write_gray8(files.combined, png::mask_to_gray8(bundle.combined_mask));

  // Write then rename so a present params file marks a complete bundle.
  const auto tmp = std::filesystem::path(files.params.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    out << record_text(bundle.record);
    if (!out) throw IoError("cannot write parameter record", tmp.string());
  }
  std::filesystem::rename(tmp, files.params, ec);
  if (ec) throw IoError("cannot write parameter record: " + ec.message(), files.params.string());
  return files;
}

SceneBundle replay(const json& record, const background::BackgroundLibrary* library) {
  const std::string schema = record.value("schema", std::string());
  if (schema != kSceneSchema) {
    throw SchemaError("unsupported scene schema '" + schema + "' (expected " + kSceneSchema + ")");
  }
  MicrostructureSpec spec;
  Style style;
  background::BackgroundRecipe recipe;
  try {
    spec = record.at("microstructure").get<MicrostructureSpec>();
    style = record.at("style").get<Style>();
    recipe = background::recipe_from_json(record.at("background"));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed scene record: ") + e.what());
  }
  const auto missing = background::missing_patches(recipe, library);
  if (!missing.empty()) {
    std::string ids;
    for (const auto& id : missing) ids += (ids.empty() ? "" : ", ") + id;
    throw DependencyError("scene needs background patches not in the library: " + ids, missing);
  }
  const ScalarGrid bg = background::make_background(recipe, library, spec.dims.rows, spec.dims.cols);
  SceneBundle bundle = render(spec, bg, style);
  bundle.record = scene_record(spec, recipe, style, record.value("seeds", json::object()));
  return bundle;
}

}  // namespace dislogen::raster
