#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dislogen/geometry.hpp"
#include "dislogen/grid.hpp"
#include "dislogen/skeleton.hpp"

namespace dislogen::tracking {

inline constexpr std::size_t kCurvePoints = 50;
inline constexpr double kDefaultGate = 30.0;  // px, max centroid jump between frames

struct PairId {
  std::size_t a = 0;
  std::size_t b = 0;
  std::string label() const;
  friend bool operator==(const PairId&, const PairId&) = default;
};

// "a-b" items separated by commas, ids being mask numbers in the first frame.
std::vector<PairId> parse_pairs(const std::string& spec);

// One segmented object in one frame.
struct FrameObject {
  std::size_t mask_id = 0;
  Point centroid;
  std::optional<skeleton::Polyline> curve;  // nothing when the skeleton is not one open path
};

// Binarizes, drops duplicates and extracts a resampled centerline per mask.
std::vector<FrameObject> frame_objects(const std::vector<ScalarGrid>& masks,
                                       const skeleton::SkeletonOptions& options = {});

struct TrackRow {
  std::size_t frame = 0;
  std::string pair;
  std::optional<double> distance;  // nothing for a gap
};

struct TrackOptions {
  double gate = kDefaultGate;
  skeleton::SkeletonOptions skeleton;
};

// Frames are given in order; object identities are carried forward by nearest
// centroid. A pair whose member is lost or untraceable yields a gap row.
std::vector<TrackRow> track(const std::vector<std::pair<std::size_t, std::vector<ScalarGrid>>>& frames,
                            const std::vector<PairId>& pairs, const TrackOptions& options = {});

// Frame indices with mask_{frame}_00.png in `dir`, sorted.
std::vector<std::size_t> frame_indices(const std::filesystem::path& dir);

std::vector<TrackRow> track_directory(const std::filesystem::path& dir, const std::vector<PairId>& pairs,
                                      const TrackOptions& options = {});

// Columns frame,pair_id,distance_px,gap.
void write_csv(const std::filesystem::path& path, const std::vector<TrackRow>& rows);

}  // namespace dislogen::tracking
