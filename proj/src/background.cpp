#include "dislogen/background.hpp"

#include <algorithm>
#include <fstream>

#include "dislogen/noise.hpp"
#include "dislogen/png_io.hpp"
#include "dislogen/rng.hpp"

namespace dislogen::background {

namespace fs = std::filesystem;
using nlohmann::json;

Mode parse_mode(const std::string& s) {
  if (s == "synthetic" || s == "perlin") return Mode::synthetic;
  if (s == "real") return Mode::real;
  throw ConfigError("unknown background mode '" + s + "'");
}

std::string to_string(Mode m) { return m == Mode::synthetic ? "synthetic" : "real"; }

BackgroundLibrary BackgroundLibrary::load(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("background library is not a directory", dir.string());
  std::vector<std::pair<std::string, fs::path>> entries;
  const fs::path index = dir / "index.json";
  if (fs::exists(index)) {
    std::ifstream in(index);
    json j;
    try {
      in >> j;
      for (const auto& e : j.at("patches")) {
        entries.emplace_back(e.at("id").get<std::string>(), dir / e.at("file").get<std::string>());
      }
    } catch (const json::exception& e) {
      throw SchemaError("malformed background index " + index.string() + ": " + e.what());
    }
  } else {
    for (const auto& f : fs::directory_iterator(dir)) {
      if (f.path().extension() == ".png") entries.emplace_back(f.path().stem().string(), f.path());
    }
    std::sort(entries.begin(), entries.end());
  }

  BackgroundLibrary lib;
  for (const auto& [id, path] : entries) {
    if (!fs::exists(path)) throw IoError("missing file for background patch '" + id + "'", path.string());
    lib.add(id, png::dequantize(png::read_gray8(path)));
  }
  return lib;
}

void BackgroundLibrary::save(const fs::path& dir) const {
  fs::create_directories(dir);
  json entries = json::array();
  for (const auto& id : ids_) {
    const std::string file = id + ".png";
    png::write_gray8(dir / file, png::quantize(patches_.at(id)));
    entries.push_back({{"id", id}, {"file", file}});
  }
  std::ofstream out(dir / "index.json");
  out << json{{"patches", entries}}.dump(2) << '\n';
  if (!out) throw IoError("cannot write background index", (dir / "index.json").string());
}

void BackgroundLibrary::add(std::string id, ScalarGrid patch) {
  if (patch.empty()) throw ParameterError("background patch '" + id + "' is empty");
  if (!contains(id)) ids_.push_back(id);
  patches_[std::move(id)] = std::move(patch);
}

const ScalarGrid& BackgroundLibrary::patch(const std::string& id) const {
  auto it = patches_.find(id);
  if (it == patches_.end()) {
    throw DependencyError("background patch '" + id + "' not in library", {id});
  }
  return it->second;
}

ScalarGrid synth_background(const SyntheticBackgroundRecipe& r, std::size_t rows,
                            std::size_t cols) {
  using namespace noise;
  const ScalarGrid p1 = perlin({r.lambda1, r.seed_perlin1}, rows, cols);
  const ScalarGrid p2 = perlin({r.lambda2, r.seed_perlin2}, rows, cols);

  ScalarGrid p3(rows, cols);
  for (std::size_t i = 0; i < p3.size(); ++i) {
    p3.values()[i] = p1.values()[i] + r.w_perlin * p2.values()[i];
  }

  ScalarGrid p4 = normalize01(p3);
  if (r.w_white1 != 0.0) {
    const ScalarGrid x1 = white_noise(r.seed_white, rows, cols, -1.0, 1.0);
    for (std::size_t i = 0; i < p4.size(); ++i) p4.values()[i] += r.w_white1 * x1.values()[i];
  }

  ScalarGrid p6 = r.s1 > 0.0 ? gaussian_filter(p4, {r.s1}) : p4;
  const double w_white2 = r.w_white2_scale * stddev(p4);
  if (w_white2 != 0.0) {
    const ScalarGrid x2 = white_noise(derive_seed(r.seed_white, 2), rows, cols, -1.0, 1.0);
    for (std::size_t i = 0; i < p6.size(); ++i) p6.values()[i] += w_white2 * x2.values()[i];
  }

  if (r.s2 > 0.0) return clip01(gaussian_filter(p6, {r.s2}));
  return clip01(p6);
}

ScalarGrid synth_background_reseeding(SyntheticBackgroundRecipe& r, std::size_t rows,
                                      std::size_t cols) {
  constexpr int kMaxReseeds = 16;
  for (;;) {
    try {
      return synth_background(r, rows, cols);
    } catch (const DegenerateInputError&) {
      if (r.reseeds >= kMaxReseeds) throw;
      ++r.seed_perlin1;
      ++r.seed_perlin2;
      ++r.reseeds;
    }
  }
}

ScalarGrid crop_patch(const ScalarGrid& patch, const PatchView& view, std::size_t rows,
                      std::size_t cols) {
  if (view.row_offset + rows > patch.rows() || view.col_offset + cols > patch.cols()) {
    throw ParameterError("background patch of " + std::to_string(patch.rows()) + "x" +
                         std::to_string(patch.cols()) + " does not cover a " +
                         std::to_string(rows) + "x" + std::to_string(cols) + " crop at (" +
                         std::to_string(view.row_offset) + "," +
                         std::to_string(view.col_offset) + ")");
  }
  ScalarGrid out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t sr = view.row_offset + (view.flip_v ? rows - 1 - r : r);
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t sc = view.col_offset + (view.flip_h ? cols - 1 - c : c);
      out(r, c) = patch(sr, sc);
    }
  }
  return out;
}

ScalarGrid real_background(const RealBackgroundRecipe& r, const BackgroundLibrary& library,
                           std::size_t rows, std::size_t cols) {
  if (!(r.opacity >= 0.0 && r.opacity <= 1.0)) throw ParameterError("opacity must be in [0,1]");
  const ScalarGrid a = crop_patch(library.patch(r.patch_a), r.view_a, rows, cols);
  const ScalarGrid b = crop_patch(library.patch(r.patch_b), r.view_b, rows, cols);
  ScalarGrid out(rows, cols);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.values()[i] = r.opacity * a.values()[i] + (1.0 - r.opacity) * b.values()[i];
  }
  return noise::clip01(out);
}

namespace {

PatchView sample_view(Rng& rng, const ScalarGrid& patch, const std::string& id, std::size_t rows,
                      std::size_t cols) {
  if (patch.rows() < rows || patch.cols() < cols) {
    throw ParameterError("background patch '" + id + "' is smaller than the target image");
  }
  PatchView v;
  v.row_offset = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(patch.rows() - rows)));
  v.col_offset = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(patch.cols() - cols)));
  v.flip_h = rng.bernoulli(0.5);
  v.flip_v = rng.bernoulli(0.5);
  return v;
}

}  // namespace

BackgroundRecipe sample_background_recipe(std::uint64_t seed, Mode mode,
                                          const BackgroundLibrary* library, std::size_t rows,
                                          std::size_t cols, const SyntheticRanges& ranges) {
  Rng rng(seed);
  if (mode == Mode::synthetic) {
    SyntheticBackgroundRecipe r;
    r.lambda1 = rng.uniform(ranges.lambda_min, ranges.lambda_max);
    r.lambda2 = rng.uniform(ranges.lambda_min, ranges.lambda_max);
    r.w_perlin = rng.uniform(ranges.w_perlin_min, ranges.w_perlin_max);
    r.w_white1 = rng.uniform(ranges.w_white1_min, ranges.w_white1_max);
    r.s1 = ranges.s1;
    r.w_white2_scale = rng.uniform(ranges.w_white2_scale_min, ranges.w_white2_scale_max);
    r.s2 = rng.uniform(ranges.s2_min, ranges.s2_max);
    r.seed_perlin1 = derive_seed(seed, 1);
    r.seed_perlin2 = derive_seed(seed, 2);
    r.seed_white = derive_seed(seed, 3);
    return r;
  }

  if (library == nullptr || library->empty()) {
    throw ConfigError("real background mode needs a non-empty background library");
  }
  const auto& ids = library->ids();
  const auto n = static_cast<std::int64_t>(ids.size());
  RealBackgroundRecipe r;
  r.seed = seed;
  const auto ia = rng.uniform_int(0, n - 1);
  auto ib = ia;
  if (n > 1) {
    ib = rng.uniform_int(0, n - 2);
    if (ib >= ia) ++ib;
  }
  r.patch_a = ids[static_cast<std::size_t>(ia)];
  r.patch_b = ids[static_cast<std::size_t>(ib)];
  r.opacity = rng.uniform();
  r.view_a = sample_view(rng, library->patch(r.patch_a), r.patch_a, rows, cols);
  r.view_b = sample_view(rng, library->patch(r.patch_b), r.patch_b, rows, cols);
  return r;
}

ScalarGrid make_background(BackgroundRecipe& recipe, const BackgroundLibrary* library,
                           std::size_t rows, std::size_t cols) {
  if (auto* s = std::get_if<SyntheticBackgroundRecipe>(&recipe)) {
    return synth_background_reseeding(*s, rows, cols);
  }
  const auto& real = std::get<RealBackgroundRecipe>(recipe);
  if (auto missing = missing_patches(recipe, library); !missing.empty()) {
    std::string names;
    for (const auto& m : missing) names += (names.empty() ? "" : ", ") + m;
    throw DependencyError("background library lacks patches: " + names, missing);
  }
  return real_background(real, *library, rows, cols);
}

std::vector<std::string> missing_patches(const BackgroundRecipe& recipe,
                                         const BackgroundLibrary* library) {
  std::vector<std::string> missing;
  const auto* real = std::get_if<RealBackgroundRecipe>(&recipe);
  if (!real) return missing;
  for (const auto* id : {&real->patch_a, &real->patch_b}) {
    if ((!library || !library->contains(*id)) &&
        std::find(missing.begin(), missing.end(), *id) == missing.end()) {
      missing.push_back(*id);
    }
  }
  return missing;
}

void to_json(json& j, const SyntheticBackgroundRecipe& r) {
  j = json{{"type", "synthetic"},
           {"lambda1", r.lambda1},
           {"lambda2", r.lambda2},
           {"w_perlin", r.w_perlin},
           {"w_white1", r.w_white1},
           {"s1", r.s1},
           {"w_white2_scale", r.w_white2_scale},
           {"s2", r.s2},
           {"seed_perlin1", r.seed_perlin1},
           {"seed_perlin2", r.seed_perlin2},
           {"seed_white", r.seed_white},
           {"reseeds", r.reseeds}};
}

void from_json(const json& j, SyntheticBackgroundRecipe& r) {
  j.at("lambda1").get_to(r.lambda1);
  j.at("lambda2").get_to(r.lambda2);
  j.at("w_perlin").get_to(r.w_perlin);
  j.at("w_white1").get_to(r.w_white1);
  j.at("s1").get_to(r.s1);
  j.at("w_white2_scale").get_to(r.w_white2_scale);
  j.at("s2").get_to(r.s2);
  j.at("seed_perlin1").get_to(r.seed_perlin1);
  j.at("seed_perlin2").get_to(r.seed_perlin2);
  j.at("seed_white").get_to(r.seed_white);
  r.reseeds = j.value("reseeds", 0);
}

void to_json(json& j, const PatchView& v) {
  j = json{{"row_offset", v.row_offset},
           {"col_offset", v.col_offset},
           {"flip_h", v.flip_h},
           {"flip_v", v.flip_v}};
}

void from_json(const json& j, PatchView& v) {
  j.at("row_offset").get_to(v.row_offset);
  j.at("col_offset").get_to(v.col_offset);
  j.at("flip_h").get_to(v.flip_h);
  j.at("flip_v").get_to(v.flip_v);
}

void to_json(json& j, const RealBackgroundRecipe& r) {
  j = json{{"type", "real"},       {"patch_a", r.patch_a}, {"patch_b", r.patch_b},
           {"opacity", r.opacity}, {"view_a", r.view_a},   {"view_b", r.view_b},
           {"seed", r.seed}};
}

void from_json(const json& j, RealBackgroundRecipe& r) {
  j.at("patch_a").get_to(r.patch_a);
  j.at("patch_b").get_to(r.patch_b);
  j.at("opacity").get_to(r.opacity);
  j.at("view_a").get_to(r.view_a);
  j.at("view_b").get_to(r.view_b);
  j.at("seed").get_to(r.seed);
}

void to_json(json& j, const SyntheticRanges& r) {
  j = json{{"lambda", {r.lambda_min, r.lambda_max}},
           {"w_perlin", {r.w_perlin_min, r.w_perlin_max}},
           {"w_white1", {r.w_white1_min, r.w_white1_max}},
           {"s1", r.s1},
           {"w_white2_scale", {r.w_white2_scale_min, r.w_white2_scale_max}},
           {"s2", {r.s2_min, r.s2_max}}};
}

void from_json(const json& j, SyntheticRanges& r) {
  auto range = [&](const char* key, double& lo, double& hi) {
    if (!j.contains(key)) return;
    lo = j[key].at(0).get<double>();
    hi = j[key].at(1).get<double>();
    if (lo > hi) throw ConfigError(std::string("background range ") + key + " is reversed");
  };
  range("lambda", r.lambda_min, r.lambda_max);
  range("w_perlin", r.w_perlin_min, r.w_perlin_max);
  range("w_white1", r.w_white1_min, r.w_white1_max);
  r.s1 = j.value("s1", r.s1);
  range("w_white2_scale", r.w_white2_scale_min, r.w_white2_scale_max);
  range("s2", r.s2_min, r.s2_max);
}

json recipe_to_json(const BackgroundRecipe& r) {
  return std::visit([](const auto& v) { return json(v); }, r);
}

BackgroundRecipe recipe_from_json(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "synthetic") return j.get<SyntheticBackgroundRecipe>();
  if (type == "real") return j.get<RealBackgroundRecipe>();
  throw SchemaError("unknown background recipe type '" + type + "'");
}

}  // namespace dislogen::background
