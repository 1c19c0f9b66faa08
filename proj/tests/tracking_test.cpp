#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "dislogen/errors.hpp"
#include "dislogen/png_io.hpp"
#include "dislogen/stats.hpp"
#include "dislogen/tracking.hpp"
#include "support/pair_sequence.hpp"
#include "support/temp_dir.hpp"

using namespace dislogen;
using tracking::PairId;

namespace {

using Frames = std::vector<std::pair<std::size_t, std::vector<ScalarGrid>>>;

Frames separating_sequence(int n_frames, double start, double step) {
  Frames frames;
  for (int f = 0; f < n_frames; ++f) frames.emplace_back(f, dislogen::testing::render_pair(start + step * f));
  return frames;
}

ScalarGrid bar(std::size_t size, std::size_t row, std::size_t c0, std::size_t c1) {
  ScalarGrid g(size, size);
  for (std::size_t r = row; r < row + 3; ++r)
    for (std::size_t c = c0; c < c1; ++c) g(r, c) = 1.0;
  return g;
}

}  // namespace

TEST(ParsePairs, AcceptsListsAndRejectsJunk) {
  EXPECT_EQ(tracking::parse_pairs("0-1"), (std::vector<PairId>{{0, 1}}));
  EXPECT_EQ(tracking::parse_pairs("0-1, 3 - 2"), (std::vector<PairId>{{0, 1}, {3, 2}}));
  EXPECT_THROW(tracking::parse_pairs(""), ConfigError);
  EXPECT_THROW(tracking::parse_pairs("0-"), ConfigError);
  EXPECT_THROW(tracking::parse_pairs("0-1,"), ConfigError);
  EXPECT_THROW(tracking::parse_pairs("2-2"), ConfigError);
  EXPECT_EQ((PairId{4, 7}.label()), "4-7");
}

TEST(Track, RecoversSeparationRamp) {
  const auto rows = tracking::track(separating_sequence(20, 10.0, 1.0), {{0, 1}});
  ASSERT_EQ(rows.size(), 20u);
  for (std::size_t f = 0; f < rows.size(); ++f) {
    ASSERT_TRUE(rows[f].distance) << "frame " << f;
    EXPECT_NEAR(*rows[f].distance, 10.0 + f, 0.5) << "frame " << f;
    EXPECT_EQ(rows[f].frame, f);
    EXPECT_EQ(rows[f].pair, "0-1");
  }
}

TEST(Track, StaticSceneGivesConstantDistance) {
  const auto rows = tracking::track(separating_sequence(5, 15.0, 0.0), {{0, 1}});
  std::vector<double> d;
  for (const auto& r : rows) d.push_back(r.distance.value());
  const double m = stats::mean(d);
  double var = 0;
  for (double x : d) var += (x - m) * (x - m);
  EXPECT_LT(std::sqrt(var / d.size()), 0.1);
}

TEST(Track, AbsentIdIsConfigError) {
  EXPECT_THROW(tracking::track(separating_sequence(2, 10.0, 1.0), {{0, 5}}), ConfigError);
}

TEST(Track, IdentityFollowsCentroidNotMaskOrder) {
  // The masks swap file order in the second frame; distances stay signed to the pair.
  auto frames = separating_sequence(2, 12.0, 2.0);
  std::swap(frames[1].second[0], frames[1].second[1]);
  const auto rows = tracking::track(frames, {{0, 1}});
  EXPECT_NEAR(*rows[1].distance, 14.0, 0.5);
}

TEST(Track, LostMemberYieldsGapAndStaysLost) {
  const std::size_t n = 128;
  Frames frames;
  frames.emplace_back(0, std::vector<ScalarGrid>{bar(n, 20, 10, 90), bar(n, 40, 10, 90)});
  // second bar jumps 60 px, beyond the gate
  frames.emplace_back(1, std::vector<ScalarGrid>{bar(n, 21, 10, 90), bar(n, 100, 10, 90)});
  frames.emplace_back(2, std::vector<ScalarGrid>{bar(n, 22, 10, 90), bar(n, 42, 10, 90)});
  const auto rows = tracking::track(frames, {{0, 1}});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(*rows[0].distance, 20.0, 1e-9);
  EXPECT_FALSE(rows[1].distance);
  EXPECT_FALSE(rows[2].distance);

  tracking::TrackOptions wide;
  wide.gate = 80;
  const auto rows_wide = tracking::track(frames, {{0, 1}}, wide);
  EXPECT_NEAR(*rows_wide[1].distance, 79.0, 1e-9);
}

TEST(Track, DuplicateMasksDoNotSpawnObjects) {
  const std::size_t n = 128;
  Frames frames;
  frames.emplace_back(0, std::vector<ScalarGrid>{bar(n, 20, 10, 90), bar(n, 20, 10, 90), bar(n, 50, 10, 90)});
  const auto objects = tracking::frame_objects(frames[0].second);
  ASSERT_EQ(objects.size(), 2u);
  EXPECT_EQ(objects[0].mask_id, 0u);
  EXPECT_EQ(objects[1].mask_id, 2u);
  EXPECT_THROW(tracking::track(frames, {{1, 2}}), ConfigError);
  EXPECT_NEAR(*tracking::track(frames, {{0, 2}})[0].distance, 30.0, 1e-9);
}

TEST(Track, DirectoryRoundTripAndCsv) {
  dislogen::testing::TempDir tmp;
  const auto frames = separating_sequence(3, 10.0, 3.0);
  for (const auto& [f, masks] : frames) {
    for (std::size_t k = 0; k < masks.size(); ++k) {
      char name[64];
      std::snprintf(name, sizeof name, "mask_%zu_%02zu.png", f + 10, k);
      png::write_gray8(tmp.path() / name, png::quantize(masks[k]));
    }
  }
  EXPECT_EQ(tracking::frame_indices(tmp.path()), (std::vector<std::size_t>{10, 11, 12}));
  auto rows = tracking::track_directory(tmp.path(), {{0, 1}});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].frame, 12u);
  EXPECT_NEAR(*rows[2].distance, 16.0, 0.5);

  rows[1].distance.reset();
  const auto csv = tmp.path() / "out.csv";
  tracking::write_csv(csv, rows);
  std::ifstream in(csv);
  std::string header, r0, r1;
  std::getline(in, header);
  std::getline(in, r0);
  std::getline(in, r1);
  EXPECT_EQ(header, "frame,pair_id,distance_px,gap");
  EXPECT_EQ(r0.rfind("10,0-1,", 0), 0u);
  EXPECT_EQ(r0.substr(r0.size() - 2), ",0");
  EXPECT_EQ(r1, "11,0-1,,1");
}

TEST(Track, EmptyDirectoryIsIoError) {
  dislogen::testing::TempDir tmp;
  EXPECT_THROW(tracking::frame_indices(tmp.path()), IoError);
  EXPECT_THROW(tracking::frame_indices(tmp.path() / "missing"), IoError);
}
