#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "dislogen/grid.hpp"
#include "dislogen/skeleton.hpp"

namespace dislogen::eval {

inline constexpr double kDiceEpsilon = 1e-7;
inline constexpr double kDuplicateThreshold = 0.5;
inline constexpr double kBinarizeThreshold = 0.5;
inline constexpr std::size_t kDefaultMaskCount = 20;

// 1 - (2*sum(a*b) + eps) / (sum(a) + sum(b) + eps)
double dice_loss(const ScalarGrid& a, const ScalarGrid& b);
double dice_loss(const BinaryGrid& a, const BinaryGrid& b);

struct Assignment {
  std::size_t gt = 0;
  std::size_t pred = 0;
  double dice_loss = 0.0;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct MatchReport {
  std::vector<Assignment> assignments;         // in GT order
  std::vector<std::size_t> unmatched_gt;       // GT masks left over when M > N
  std::vector<std::size_t> unmatched_predictions;
  double loss = 0.0;                           // mean over all M, unmatched GT count 1
  std::vector<double> metric_scores;           // per GT index
  double mean_metric = 0.0;
  std::vector<std::vector<std::size_t>> duplicate_groups;
};

// For each GT mask in order, the remaining prediction with the lowest Dice
// loss is assigned and removed; ties go to the lower prediction index.
MatchReport greedy_match(const std::vector<ScalarGrid>& gt, const std::vector<ScalarGrid>& pred);

// Minimum-total-loss assignment (Hungarian method). For comparison only; the
// greedy matcher defines the reported loss.
MatchReport optimal_match(const std::vector<ScalarGrid>& gt, const std::vector<ScalarGrid>& pred);

struct MetricOptions {
  skeleton::SkeletonOptions skeleton;
};

// Length of the traced skeleton, or nothing when the mask is empty or does
// not reduce to a single open path.
std::optional<double> traced_length(const BinaryGrid& mask, const MetricOptions& options = {});

// GT length: traced when possible, else the total skeleton graph length.
double reference_length(const BinaryGrid& gt_mask, const MetricOptions& options = {});

// max(0, 1 - |L_pred - L_gt| / L_gt). The prediction is binarized at 0.5;
// empty or untraceable predictions score 0.
double length_metric(const BinaryGrid& gt_mask, const ScalarGrid& pred_mask,
                     const MetricOptions& options = {});
double length_metric_from_lengths(double gt_length, std::optional<double> pred_length);

struct DuplicateResult {
  std::vector<std::vector<std::size_t>> groups;  // each sorted, size >= 2
  std::vector<std::size_t> retained;             // one per group
  std::vector<std::size_t> kept;                 // all predictions surviving the filter
};

// Groups non-empty binarized predictions whose pairwise Dice loss is below
// 0.5 (transitively). Each group keeps the member with the lowest assigned
// loss in `report`, else the largest area, else the lowest index.
DuplicateResult duplicate_filter(const std::vector<ScalarGrid>& pred, const MatchReport& report);

// Greedy match, per-GT length metric and duplicate groups for one image.
MatchReport score_image(const std::vector<BinaryGrid>& gt, const std::vector<ScalarGrid>& pred,
                        const MetricOptions& options = {});

struct ImageScore {
  std::size_t index = 0;
  MatchReport report;
};

struct DatasetReport {
  std::vector<ImageScore> images;
  double mean_metric = 0.0;
  double median_metric = 0.0;
  double mean_loss = 0.0;
  // GT dislocation count -> per-image mean metric of images with that count.
  std::map<std::size_t, std::vector<double>> metric_by_count;
};

DatasetReport aggregate(std::vector<ImageScore> images);

// mask_{index}_{k:02}.png for k = 0, 1, ... until the first missing file.
std::vector<std::filesystem::path> mask_files(const std::filesystem::path& dir, std::size_t index);
std::vector<BinaryGrid> load_gt_masks(const std::filesystem::path& dir, std::size_t index);

// Predictions as probabilities: mask_{index}_{k:02}.png files, or one
// pred_{index}.png holding the masks stacked vertically, each `rows` tall.
// Throws IoError naming the index when neither exists.
std::vector<ScalarGrid> load_predictions(const std::filesystem::path& dir, std::size_t index,
                                         std::size_t rows);

// Indices of params_{index}.json records in a bundle directory, sorted.
std::vector<std::size_t> bundle_indices(const std::filesystem::path& dir);

DatasetReport score_dataset(const std::filesystem::path& gt_dir, const std::filesystem::path& pred_dir,
                            const MetricOptions& options = {});

nlohmann::json to_json(const MatchReport& r);
nlohmann::json to_json(const DatasetReport& r);

// report.json, images.csv, by_count.csv and plot.json in `out_dir`.
void write_report(const DatasetReport& r, const std::filesystem::path& out_dir);

}  // namespace dislogen::eval
