#include "dislogen/raster.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "dislogen/morphology.hpp"
#include "dislogen/noise.hpp"
#include "dislogen/png_io.hpp"
#include "support/temp_dir.hpp"

namespace dislogen::raster {
namespace {

using microstructure::DislocationCurve;
using microstructure::FeatureDistributions;
using microstructure::MicrostructureSpec;

std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FeatureDistributions fixed_counts(int pileups, int per_pileup) {
  auto d = FeatureDistributions::m2();
  d.number_of_pileups = microstructure::DiscreteDistribution::uniform(pileups, pileups);
  d.dislocations_per_pileup = microstructure::DiscreteDistribution::uniform(per_pileup, per_pileup);
  d.slip_width = microstructure::ContinuousDistribution::uniform(100, 200);
  return d;
}

MicrostructureSpec straight_scene(double thickness) {
  MicrostructureSpec spec;
  spec.dims = {128, 128};
  microstructure::Pileup p;
  p.trace.alpha = 0.0;
  p.trace.delta_d = 80.0;
  p.trace.anchor = {40.0, 20.0};
  DislocationCurve c({{40.0, 20.0}, {40.0, 60.0}, {40.0, 100.0}});
  c.thickness = thickness;
  c.gray_value = 0.1;
  p.dislocations.push_back(c);
  spec.pileups.push_back(p);
  return spec;
}

TEST(Render, FourteenDislocationScene) {
  GeneratorConfig cfg;
  const auto bundle = generate_scene(cfg, fixed_counts(2, 7), 14);
  ASSERT_EQ(bundle.instance_masks.size(), 14u);
  BinaryGrid all(512, 512, 0);
  for (const auto& m : bundle.instance_masks) {
    EXPECT_GT(count_foreground(m), 0u);
    for (std::size_t i = 0; i < m.size(); ++i) all.values()[i] |= m.values()[i];
  }
  EXPECT_EQ(all, bundle.combined_mask);
}

TEST(Render, EmptySceneLeavesBackground) {
  MicrostructureSpec spec;
  spec.dims = {32, 40};
  const auto bg = noise::clip01(noise::white_noise(3, 32, 40, 0.0, 1.0));
  const auto bundle = render(spec, bg, Style{});
  EXPECT_EQ(bundle.image, bg);
  EXPECT_TRUE(bundle.instance_masks.empty());
  EXPECT_EQ(count_foreground(bundle.combined_mask), 0u);
}

TEST(Render, StraightStrokeArea) {
  const auto spec = straight_scene(3.0);
  const auto bundle = render(spec, ScalarGrid(128, 128, 0.8), Style{});
  const double area = static_cast<double>(count_foreground(bundle.instance_masks[0]));
  const double expected = 3.0 * curve_length(spec.pileups[0].dislocations[0]);
  EXPECT_NEAR(area / expected, 1.0, 0.2);
}

TEST(Render, DimensionMismatch) {
  EXPECT_THROW(render(straight_scene(2.0), ScalarGrid(64, 128, 0.5), Style{}), DimensionError);
}

TEST(Render, MaskPropertiesAcrossScenes) {
  GeneratorConfig cfg;
  const auto dist = FeatureDistributions::m2();
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto bundle = generate_scene(cfg, dist, seed);
    const auto spec = bundle.record.at("microstructure").get<MicrostructureSpec>();
    const auto recipe = background::recipe_from_json(bundle.record.at("background"));
    auto r = recipe;
    const auto base = draw_slip_traces(spec, background::make_background(r, nullptr, 512, 512));
    ASSERT_LE(bundle.instance_masks.size(), 20u);
    ASSERT_EQ(bundle.instance_masks.size(), spec.dislocation_count());
    for (const auto& m : bundle.instance_masks) {
      ASSERT_TRUE(m.same_shape(bundle.image));
      EXPECT_EQ(morphology::component_count(m, 8), 1u) << "seed " << seed;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (!m.values()[i]) continue;
        if (base.values()[i] > 0.0) {
          ASSERT_LT(bundle.image.values()[i], base.values()[i]) << "seed " << seed;
        } else {
          ASSERT_EQ(bundle.image.values()[i], 0.0);
        }
      }
    }
  }
}

TEST(Style, DrawsWithinRanges) {
  const ScalarGrid bg(512, 512, 0.7);
  auto spec = microstructure::sample_microstructure(FeatureDistributions::m2(), 5);
  Style style;
  apply_style(spec, bg, style, 11);
  for (const auto& p : spec.pileups) {
    EXPECT_LE(std::abs(p.trace_contrast), 0.05);
    for (const auto& c : p.dislocations) {
      EXPECT_GE(c.thickness, 1.0);
      EXPECT_LE(c.thickness, 4.0);
      EXPECT_EQ(c.thickness, std::round(c.thickness));
      EXPECT_GE(c.gray_value, 0.2 - 1e-12);
      EXPECT_LE(c.gray_value, 0.6 + 1e-12);
    }
  }
  auto again = microstructure::sample_microstructure(FeatureDistributions::m2(), 5);
  apply_style(again, bg, style, 11);
  EXPECT_EQ(again, spec);
}

TEST(Style, TracesOnlyInImage) {
  auto spec = straight_scene(2.0);
  const ScalarGrid bg(128, 128, 0.5);
  const auto plain = render(spec, bg, Style{});
  spec.pileups[0].trace_contrast = 0.05;
  const auto traced = render(spec, bg, Style{});
  EXPECT_NE(plain.image, traced.image);
  EXPECT_EQ(plain.instance_masks, traced.instance_masks);
  EXPECT_EQ(plain.combined_mask, traced.combined_mask);
  // Trace 2 runs along y = 100, away from the stroke.
  EXPECT_NEAR(traced.image(100, 10), 0.55, 1e-12);
}

TEST(Style, EdgeSofteningKeepsMasks) {
  const auto spec = straight_scene(3.0);
  const ScalarGrid bg(128, 128, 0.6);
  Style soft;
  soft.edge_softening = 1.0;
  const auto hard = render(spec, bg, Style{});
  const auto smooth = render(spec, bg, soft);
  EXPECT_NE(hard.image, smooth.image);
  EXPECT_EQ(hard.instance_masks, smooth.instance_masks);
}

TEST(Emit, FileSetAndQuantization) {
  testing::TempDir dir;
  const auto bundle = generate_scene(GeneratorConfig{}, fixed_counts(1, 9), 3);
  ASSERT_EQ(bundle.instance_masks.size(), 9u);
  const auto files = emit(bundle, dir.path(), 7);
  std::size_t count = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path())) {
    (void)e;
    ++count;
  }
  EXPECT_EQ(count, 12u);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "img_7.png"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "mask_7_00.png"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "mask_7_08.png"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "mask_7_all.png"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "params_7.json"));

  const auto img = png::dequantize(png::read_gray8(files.image));
  for (std::size_t i = 0; i < img.size(); ++i) {
    EXPECT_EQ(img.values()[i], std::round(255.0 * bundle.image.values()[i]) / 255.0);
  }
  const auto m = png::read_gray8(files.masks[4]);
  for (std::size_t i = 0; i < m.size(); ++i) {
    EXPECT_EQ(m.values()[i], bundle.instance_masks[4].values()[i] ? 255 : 0);
  }
}

TEST(Emit, UnwritableDirectory) {
  testing::TempDir dir;
  const auto blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  const auto bundle = render(straight_scene(1.0), ScalarGrid(128, 128, 0.5), Style{});
  EXPECT_THROW(emit(bundle, blocker / "sub", 0), IoError);
}

TEST(Replay, BitwiseRoundTrip) {
  testing::TempDir dir;
  for (std::uint64_t seed = 20; seed < 25; ++seed) {
    const auto bundle = generate_scene(GeneratorConfig{}, seed);
    const auto a = emit(bundle, dir.path() / "a", seed);
    const auto record = nlohmann::json::parse(file_bytes(a.params));
    const auto again = replay(record);
    EXPECT_EQ(again.image, bundle.image);
    EXPECT_EQ(again.instance_masks, bundle.instance_masks);
    EXPECT_EQ(again.combined_mask, bundle.combined_mask);
    const auto b = emit(again, dir.path() / "b", seed);
    const auto fa = a.all(), fb = b.all();
    ASSERT_EQ(fa.size(), fb.size());
    for (std::size_t i = 0; i < fa.size(); ++i) EXPECT_EQ(file_bytes(fa[i]), file_bytes(fb[i])) << fa[i];
  }
}

TEST(Replay, TamperedSeedChangesImage) {
  const auto bundle = generate_scene(GeneratorConfig{}, 4);
  auto record = bundle.record;
  record["background"]["seed_perlin1"] = record["background"]["seed_perlin1"].get<std::uint64_t>() + 1;
  EXPECT_NE(replay(record).image, bundle.image);
}

TEST(Replay, SchemaAndDependencyErrors) {
  auto record = generate_scene(GeneratorConfig{}, 4).record;
  record["schema"] = "dislogen.scene/99";
  EXPECT_THROW(replay(record), SchemaError);

  background::BackgroundLibrary lib;
  lib.add("p1", ScalarGrid(600, 600, 0.3));
  lib.add("p2", ScalarGrid(600, 600, 0.7));
  GeneratorConfig cfg;
  cfg.background_mode = background::Mode::real;
  cfg.background_library = "unused";
  const auto real = generate_scene(cfg, 8, &lib);
  EXPECT_EQ(replay(real.record, &lib).image, real.image);
  background::BackgroundLibrary other;
  other.add("p3", ScalarGrid(600, 600, 0.3));
  try {
    replay(real.record, &other);
    FAIL();
  } catch (const DependencyError& e) {
    EXPECT_EQ(e.missing(), (std::vector<std::string>{"p1", "p2"}));
    EXPECT_NE(std::string(e.what()).find("p1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("p2"), std::string::npos);
  }
}

TEST(Config, JsonRoundTripAndValidation) {
  GeneratorConfig cfg;
  cfg.distribution = "M1";
  cfg.dims = {256, 300};
  cfg.style.edge_softening = 0.5;
  cfg.ranges.lambda_max = 50.0;
  const nlohmann::json j = cfg;
  const auto back = j.get<GeneratorConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  cfg.background_mode = background::Mode::real;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.background_library = "lib";
  cfg.style.thickness_min = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

}  // namespace
}  // namespace dislogen::raster
