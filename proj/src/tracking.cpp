#include "dislogen/tracking.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <regex>
#include <set>

#include "dislogen/errors.hpp"
#include "dislogen/eval.hpp"
#include "dislogen/png_io.hpp"

namespace dislogen::tracking {

std::string PairId::label() const { return std::to_string(a) + "-" + std::to_string(b); }

std::vector<PairId> parse_pairs(const std::string& spec) {
  static const std::regex item(R"(\s*(\d+)\s*-\s*(\d+)\s*)");
  std::vector<PairId> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto end = std::min(spec.find(',', start), spec.size());
    const std::string part = spec.substr(start, end - start);
    std::smatch m;
    if (!std::regex_match(part, m, item)) throw ConfigError("bad pair spec '" + part + "', expected a-b");
    PairId p{std::stoul(m[1]), std::stoul(m[2])};
    if (p.a == p.b) throw ConfigError("pair " + p.label() + " pairs a mask with itself");
    out.push_back(p);
    start = end + 1;
  }
  return out;
}

std::vector<FrameObject> frame_objects(const std::vector<ScalarGrid>& masks,
                                       const skeleton::SkeletonOptions& options) {
  const auto dup = eval::duplicate_filter(masks, eval::MatchReport{});
  std::vector<FrameObject> out;
  for (std::size_t k : dup.kept) {
    const auto& m = masks[k];
    BinaryGrid bin(m.rows(), m.cols());
    double sx = 0, sy = 0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c)
        if (m(r, c) >= eval::kBinarizeThreshold) {
          bin(r, c) = 1;
          sx += c;
          sy += r;
          ++n;
        }
    if (n == 0) continue;
    FrameObject o{k, Point{sx / n, sy / n}, std::nullopt};
    try {
      o.curve = skeleton::trace_and_resample(skeleton::mask_skeleton(bin, options), kCurvePoints);
    } catch (const Error&) {
      // untraceable: kept for identity, reported as a gap
    }
    out.push_back(std::move(o));
  }
  return out;
}

std::vector<TrackRow> track(const std::vector<std::pair<std::size_t, std::vector<ScalarGrid>>>& frames,
                            const std::vector<PairId>& pairs, const TrackOptions& options) {
  if (frames.empty()) throw ParameterError("no frames to track");
  if (pairs.empty()) throw ParameterError("no pairs to track");

  std::set<std::size_t> ids;
  for (const auto& p : pairs) ids.insert({p.a, p.b});

  std::map<std::size_t, Point> last;  // track id -> last centroid
  std::vector<TrackRow> rows;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto objects = frame_objects(frames[f].second, options.skeleton);
    std::map<std::size_t, const FrameObject*> found;
    if (f == 0) {
      for (const auto& o : objects)
        if (ids.count(o.mask_id)) found[o.mask_id] = &o;
      for (std::size_t id : ids) {
        if (!found.count(id)) {
          throw ConfigError("mask " + std::to_string(id) + " not present in first frame " +
                            std::to_string(frames[0].first));
        }
      }
    } else {
      std::vector<bool> taken(objects.size(), false);
      for (std::size_t id : ids) {
        if (!last.count(id)) continue;
        double best = options.gate;
        std::optional<std::size_t> pick;
        for (std::size_t i = 0; i < objects.size(); ++i) {
          if (taken[i]) continue;
          const double d = distance(objects[i].centroid, last[id]);
          if (d <= best) {
            if (pick && d == best) continue;
            best = d;
            pick = i;
          }
        }
        if (pick) {
          taken[*pick] = true;
          found[id] = &objects[*pick];
        }
      }
    }
    // A lost track stays lost; re-acquiring by proximity could swap identities.
    last.clear();
    for (const auto& [id, o] : found) last[id] = o->centroid;

    for (const auto& p : pairs) {
      TrackRow row{frames[f].first, p.label(), std::nullopt};
      const auto ia = found.find(p.a), ib = found.find(p.b);
      if (ia != found.end() && ib != found.end() && ia->second->curve && ib->second->curve) {
        row.distance = skeleton::mean_pair_distance(*ia->second->curve, *ib->second->curve);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<std::size_t> frame_indices(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory", dir.string());
  static const std::regex name(R"(mask_(\d+)_00\.png)");
  std::vector<std::size_t> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    std::smatch m;
    const auto fname = e.path().filename().string();
    if (std::regex_match(fname, m, name)) out.push_back(std::stoul(m[1]));
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw IoError("no mask_<frame>_00.png files found", dir.string());
  return out;
}

std::vector<TrackRow> track_directory(const std::filesystem::path& dir, const std::vector<PairId>& pairs,
                                      const TrackOptions& options) {
  std::vector<std::pair<std::size_t, std::vector<ScalarGrid>>> frames;
  for (std::size_t f : frame_indices(dir)) {
    std::vector<ScalarGrid> masks;
    for (const auto& p : eval::mask_files(dir, f)) masks.push_back(png::dequantize(png::read_gray8(p)));
    frames.emplace_back(f, std::move(masks));
  }
  return track(frames, pairs, options);
}

void write_csv(const std::filesystem::path& path, const std::vector<TrackRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write", path.string());
  out << "frame,pair_id,distance_px,gap\n";
  for (const auto& r : rows) {
    out << r.frame << ',' << r.pair << ',';
    if (r.distance) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", *r.distance);
      out << buf << ",0\n";
    } else {
      out << ",1\n";
    }
  }
  if (!out) throw IoError("cannot write", path.string());
}

}  // namespace dislogen::tracking
