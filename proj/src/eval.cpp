#include "dislogen/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <regex>
#include <tuple>

#include "dislogen/errors.hpp"
#include "dislogen/png_io.hpp"

namespace dislogen::eval {

using nlohmann::json;

double dice_loss(const ScalarGrid& a, const ScalarGrid& b) {
  require_same_shape(a, b, "dice_loss");
  double inter = 0.0, sa = 0.0, sb = 0.0;
  const auto va = a.values(), vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    inter += va[i] * vb[i];
    sa += va[i];
    sb += vb[i];
  }
  return 1.0 - (2.0 * inter + kDiceEpsilon) / (sa + sb + kDiceEpsilon);
}

double dice_loss(const BinaryGrid& a, const BinaryGrid& b) {
  require_same_shape(a, b, "dice_loss");
  std::size_t inter = 0, sa = 0, sb = 0;
  const auto va = a.values(), vb = b.values();
  for (std::size_t i = 0; i < va.size(); ++i) {
    const bool x = va[i] != 0, y = vb[i] != 0;
    inter += x && y;
    sa += x;
    sb += y;
  }
  return 1.0 - (2.0 * static_cast<double>(inter) + kDiceEpsilon) /
                   (static_cast<double>(sa + sb) + kDiceEpsilon);
}

namespace {

void finish_loss(MatchReport& r, std::size_t m, std::size_t n, const std::vector<bool>& used) {
  double total = static_cast<double>(r.unmatched_gt.size());
  for (const auto& a : r.assignments) total += a.dice_loss;
  r.loss = total / static_cast<double>(m);
  for (std::size_t j = 0; j < n; ++j)
    if (!used[j]) r.unmatched_predictions.push_back(j);
}

void require_gt(const std::vector<ScalarGrid>& gt) {
  if (gt.empty()) throw ParameterError("ground-truth mask set is empty");
}

}  // namespace

MatchReport greedy_match(const std::vector<ScalarGrid>& gt, const std::vector<ScalarGrid>& pred) {
  require_gt(gt);
  MatchReport r;
  std::vector<bool> used(pred.size(), false);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    std::size_t best = pred.size();
    double best_loss = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (used[j]) continue;
      const double l = dice_loss(gt[i], pred[j]);
      if (l < best_loss) best_loss = l, best = j;
    }
    if (best == pred.size()) {
      r.unmatched_gt.push_back(i);
      continue;
    }
    used[best] = true;
    r.assignments.push_back({i, best, best_loss});
  }
  finish_loss(r, gt.size(), pred.size(), used);
  return r;
}

MatchReport optimal_match(const std::vector<ScalarGrid>& gt, const std::vector<ScalarGrid>& pred) {
  require_gt(gt);
  const std::size_t m = gt.size(), n = pred.size();
  MatchReport r;
  std::vector<bool> used(n, false);
  const std::size_t rows = std::min(m, n);  // GT beyond N stay unmatched
  if (rows > 0) {
    // Potentials-based Hungarian method, 1-based, rows <= columns.
    std::vector<std::vector<double>> cost(rows + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 1; i <= rows; ++i)
      for (std::size_t j = 1; j <= n; ++j) cost[i][j] = dice_loss(gt[i - 1], pred[j - 1]);
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(rows + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= rows; ++i) {
      p[0] = i;
      std::size_t j0 = 0;
      std::vector<double> minv(n + 1, inf);
      std::vector<bool> done(n + 1, false);
      do {
        done[j0] = true;
        const std::size_t i0 = p[j0];
        double delta = inf;
        std::size_t j1 = 0;
        for (std::size_t j = 1; j <= n; ++j) {
          if (done[j]) continue;
          const double cur = cost[i0][j] - u[i0] - v[j];
          if (cur < minv[j]) minv[j] = cur, way[j] = j0;
          if (minv[j] < delta) delta = minv[j], j1 = j;
        }
        for (std::size_t j = 0; j <= n; ++j) {
          if (done[j]) {
            u[p[j]] += delta;
            v[j] -= delta;
          } else {
            minv[j] -= delta;
          }
        }
        j0 = j1;
      } while (p[j0] != 0);
      do {
        const std::size_t j1 = way[j0];
        p[j0] = p[j1];
        j0 = j1;
      } while (j0 != 0);
    }
    for (std::size_t j = 1; j <= n; ++j) {
      if (p[j] == 0) continue;
      used[j - 1] = true;
      r.assignments.push_back({p[j] - 1, j - 1, cost[p[j]][j]});
    }
    std::sort(r.assignments.begin(), r.assignments.end(),
              [](const Assignment& a, const Assignment& b) { return a.gt < b.gt; });
  }
  for (std::size_t i = rows; i < m; ++i) r.unmatched_gt.push_back(i);
  finish_loss(r, m, n, used);
  return r;
}

std::optional<double> traced_length(const BinaryGrid& mask, const MetricOptions& options) {
  if (count_foreground(mask) == 0) return std::nullopt;
  try {
    return skeleton::trace_path(skeleton::mask_skeleton(mask, options.skeleton)).length();
  } catch (const TopologyError&) {
    return std::nullopt;
  }
}

double reference_length(const BinaryGrid& gt_mask, const MetricOptions& options) {
  if (count_foreground(gt_mask) == 0) throw DegenerateInputError("ground-truth mask is empty");
  const auto sk = skeleton::mask_skeleton(gt_mask, options.skeleton);
  try {
    return skeleton::trace_path(sk).length();
  } catch (const TopologyError&) {
    return skeleton::graph_length(sk);
  }
}

double length_metric_from_lengths(double gt_length, std::optional<double> pred_length) {
  if (!pred_length) return 0.0;
  if (gt_length <= 0.0) return *pred_length == 0.0 ? 1.0 : 0.0;
  return std::max(0.0, 1.0 - std::abs(*pred_length - gt_length) / gt_length);
}

double length_metric(const BinaryGrid& gt_mask, const ScalarGrid& pred_mask, const MetricOptions& options) {
  require_same_shape(gt_mask, pred_mask, "length_metric");
  const double lg = reference_length(gt_mask, options);
  return length_metric_from_lengths(lg, traced_length(binarize(pred_mask, kBinarizeThreshold), options));
}

DuplicateResult duplicate_filter(const std::vector<ScalarGrid>& pred, const MatchReport& report) {
  const std::size_t n = pred.size();
  std::vector<BinaryGrid> bin;
  std::vector<std::size_t> area(n);
  bin.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    bin.push_back(binarize(pred[i], kBinarizeThreshold));
    area[i] = count_foreground(bin[i]);
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (!area[i]) continue;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!area[j]) continue;
      if (dice_loss(bin[i], bin[j]) < kDuplicateThreshold) parent[find(i)] = find(j);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> by_root;
  for (std::size_t i = 0; i < n; ++i) by_root[find(i)].push_back(i);

  std::vector<std::optional<double>> assigned(n);
  for (const auto& a : report.assignments)
    if (a.pred < n) assigned[a.pred] = a.dice_loss;

  DuplicateResult out;
  std::vector<bool> keep(n, true);
  std::vector<std::pair<std::vector<std::size_t>, std::size_t>> found;
  // Matched beats unmatched, then lower assigned loss, then larger area.
  const auto rank = [&](std::size_t i) {
    return std::make_tuple(assigned[i] ? 0 : 1, assigned[i].value_or(0.0), -static_cast<double>(area[i]), i);
  };
  for (const auto& [root, members] : by_root) {
    if (members.size() < 2) continue;
    const std::size_t best = *std::min_element(members.begin(), members.end(),
                                               [&](std::size_t x, std::size_t y) { return rank(x) < rank(y); });
    for (std::size_t m : members) keep[m] = m == best;
    found.push_back({members, best});
  }
  std::sort(found.begin(), found.end());
  for (auto& [members, best] : found) {
    out.groups.push_back(members);
    out.retained.push_back(best);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (keep[i]) out.kept.push_back(i);
  return out;
}

MatchReport score_image(const std::vector<BinaryGrid>& gt, const std::vector<ScalarGrid>& pred,
                        const MetricOptions& options) {
  std::vector<ScalarGrid> gt_scalar;
  gt_scalar.reserve(gt.size());
  for (const auto& g : gt) gt_scalar.push_back(to_scalar(g));
  MatchReport r = greedy_match(gt_scalar, pred);
  r.metric_scores.assign(gt.size(), 0.0);
  for (const auto& a : r.assignments) {
    r.metric_scores[a.gt] = length_metric(gt[a.gt], pred[a.pred], options);
  }
  r.mean_metric = std::accumulate(r.metric_scores.begin(), r.metric_scores.end(), 0.0) /
                  static_cast<double>(gt.size());
  r.duplicate_groups = duplicate_filter(pred, r).groups;
  return r;
}

DatasetReport aggregate(std::vector<ImageScore> images) {
  DatasetReport out;
  out.images = std::move(images);
  if (out.images.empty()) return out;
  std::vector<double> metrics;
  double loss = 0.0;
  for (const auto& im : out.images) {
    metrics.push_back(im.report.mean_metric);
    loss += im.report.loss;
    out.metric_by_count[im.report.metric_scores.size()].push_back(im.report.mean_metric);
  }
  const double n = static_cast<double>(metrics.size());
  out.mean_metric = std::accumulate(metrics.begin(), metrics.end(), 0.0) / n;
  out.mean_loss = loss / n;
  std::sort(metrics.begin(), metrics.end());
  const std::size_t h = metrics.size() / 2;
  out.median_metric = metrics.size() % 2 ? metrics[h] : 0.5 * (metrics[h - 1] + metrics[h]);
  return out;
}

namespace {

std::filesystem::path mask_path(const std::filesystem::path& dir, std::size_t index, std::size_t k) {
  char name[64];
  std::snprintf(name, sizeof name, "mask_%zu_%02zu.png", index, k);
  return dir / name;
}

}  // namespace

std::vector<std::filesystem::path> mask_files(const std::filesystem::path& dir, std::size_t index) {
  std::vector<std::filesystem::path> out;
  for (std::size_t k = 0;; ++k) {
    auto p = mask_path(dir, index, k);
    if (!std::filesystem::exists(p)) break;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<BinaryGrid> load_gt_masks(const std::filesystem::path& dir, std::size_t index) {
  std::vector<BinaryGrid> out;
  for (const auto& p : mask_files(dir, index)) out.push_back(binarize(png::dequantize(png::read_gray8(p))));
  return out;
}

std::vector<ScalarGrid> load_predictions(const std::filesystem::path& dir, std::size_t index,
                                         std::size_t rows) {
  std::vector<ScalarGrid> out;
  const auto files = mask_files(dir, index);
  if (!files.empty()) {
    for (const auto& p : files) out.push_back(png::dequantize(png::read_gray8(p)));
    return out;
  }
  const auto stacked = dir / ("pred_" + std::to_string(index) + ".png");
  if (!std::filesystem::exists(stacked)) {
    throw IoError("no predictions for image " + std::to_string(index), (dir / ("mask_" + std::to_string(index) + "_00.png")).string());
  }
  const auto all = png::dequantize(png::read_gray8(stacked));
  if (rows == 0 || all.rows() % rows != 0) {
    throw IoError("stacked prediction height is not a multiple of " + std::to_string(rows), stacked.string());
  }
  for (std::size_t t = 0; t < all.rows() / rows; ++t) {
    ScalarGrid tile(rows, all.cols());
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < all.cols(); ++c) tile(r, c) = all(t * rows + r, c);
    out.push_back(std::move(tile));
  }
  return out;
}

std::vector<std::size_t> bundle_indices(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory", dir.string());
  static const std::regex pattern(R"(params_(\d+)\.json)");
  std::vector<std::size_t> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = e.path().filename().string();
    if (std::regex_match(name, m, pattern)) out.push_back(std::stoul(m[1].str()));
  }
  std::sort(out.begin(), out.end());
  return out;
}

DatasetReport score_dataset(const std::filesystem::path& gt_dir, const std::filesystem::path& pred_dir,
                            const MetricOptions& options) {
  const auto indices = bundle_indices(gt_dir);
  if (indices.empty()) throw IoError("no params_*.json records in ground-truth directory", gt_dir.string());
  if (!std::filesystem::is_directory(pred_dir)) throw IoError("not a directory", pred_dir.string());
  std::vector<std::size_t> missing;
  for (std::size_t i : indices) {
    if (mask_files(pred_dir, i).empty() &&
        !std::filesystem::exists(pred_dir / ("pred_" + std::to_string(i) + ".png"))) {
      missing.push_back(i);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i : missing) list += (list.empty() ? "" : ",") + std::to_string(i);
    throw IoError("missing predictions for image indices " + list, pred_dir.string());
  }
  std::vector<ImageScore> scores;
  for (std::size_t i : indices) {
    const auto gt = load_gt_masks(gt_dir, i);
    if (gt.empty()) throw IoError("no ground-truth masks for image " + std::to_string(i), gt_dir.string());
    const auto pred = load_predictions(pred_dir, i, gt.front().rows());
    for (const auto& p : pred) require_same_shape(p, gt.front(), ("prediction for image " + std::to_string(i)).c_str());
    scores.push_back({i, score_image(gt, pred, options)});
  }
  return aggregate(std::move(scores));
}

json to_json(const MatchReport& r) {
  json assignments = json::array();
  for (const auto& a : r.assignments) assignments.push_back({{"gt", a.gt}, {"pred", a.pred}, {"dice_loss", a.dice_loss}});
  return json{{"assignments", assignments},
              {"loss", r.loss},
              {"metric_scores", r.metric_scores},
              {"mean_metric", r.mean_metric},
              {"unmatched_gt", r.unmatched_gt},
              {"unmatched_predictions", r.unmatched_predictions},
              {"duplicate_groups", r.duplicate_groups}};
}

json to_json(const DatasetReport& r) {
  json images = json::array();
  for (const auto& im : r.images) {
    json j = to_json(im.report);
    j["index"] = im.index;
    j["gt_count"] = im.report.metric_scores.size();
    images.push_back(std::move(j));
  }
  json bins = json::object();
  for (const auto& [count, scores] : r.metric_by_count) bins[std::to_string(count)] = scores;
  return json{{"image_count", r.images.size()},
              {"mean_metric", r.mean_metric},
              {"median_metric", r.median_metric},
              {"mean_loss", r.mean_loss},
              {"metric_by_count", bins},
              {"images", images}};
}

void write_report(const DatasetReport& r, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create report directory: " + ec.message(), out_dir.string());
  const auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
    if (!out) throw IoError("cannot write report file", p.string());
  };
  write(out_dir / "report.json", to_json(r).dump(2) + "\n");

  std::string csv = "index,gt_count,loss,mean_metric,unmatched_gt,duplicate_groups\n";
  for (const auto& im : r.images) {
    char line[256];
    std::snprintf(line, sizeof line, "%zu,%zu,%.10g,%.10g,%zu,%zu\n", im.index,
                  im.report.metric_scores.size(), im.report.loss, im.report.mean_metric,
                  im.report.unmatched_gt.size(), im.report.duplicate_groups.size());
    csv += line;
  }
  write(out_dir / "images.csv", csv);

  std::string bins = "gt_count,images,mean_metric,median_metric\n";
  for (const auto& [count, scores] : r.metric_by_count) {
    auto s = scores;
    std::sort(s.begin(), s.end());
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
    const std::size_t h = s.size() / 2;
    const double median = s.size() % 2 ? s[h] : 0.5 * (s[h - 1] + s[h]);
    char line[128];
    std::snprintf(line, sizeof line, "%zu,%zu,%.10g,%.10g\n", count, s.size(), mean, median);
    bins += line;
  }
  write(out_dir / "by_count.csv", bins);

  const json plot{{"title", "Length metric by number of dislocations"},
                  {"data", "by_count.csv"},
                  {"x", {{"column", "gt_count"}, {"label", "dislocations in image"}}},
                  {"y", {{"column", "mean_metric"}, {"label", "mean length metric"}, {"range", {0, 1}}}},
                  {"kind", "bar"}};
  write(out_dir / "plot.json", plot.dump(2) + "\n");
}

}  // namespace dislogen::eval
