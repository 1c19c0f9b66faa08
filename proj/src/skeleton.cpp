#include "dislogen/skeleton.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <queue>
#include <unordered_map>

#include "dislogen/errors.hpp"
#include "dislogen/morphology.hpp"

namespace dislogen::skeleton {

namespace {

// Neighbor k of a pixel sits at (r + kDr[k], c + kDc[k]); bit k of a
// neighborhood code is that neighbor's value.
constexpr int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
constexpr int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

using Block = std::array<std::array<bool, 3>, 3>;

Block block_from_code(unsigned code, bool center) {
  Block b{};
  b[1][1] = center;
  for (int k = 0; k < 8; ++k) b[1 + kDr[k]][1 + kDc[k]] = (code >> k) & 1u;
  return b;
}

// 8-connectivity Euler number of the four 2x2 windows that hold the center,
// by bit-quad counting (the factor 1/4 is dropped).
int quad_euler(const Block& b) {
  int q1 = 0, q3 = 0, qd = 0;
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      const int s = b[r][c] + b[r][c + 1] + b[r + 1][c] + b[r + 1][c + 1];
      if (s == 1) ++q1;
      if (s == 3) ++q3;
      if (s == 2 && b[r][c] == b[r + 1][c + 1]) ++qd;
    }
  }
  return q1 - q3 - 2 * qd;
}

// Neighbors form exactly one 8-connected set inside the 3x3 block.
bool neighbors_connected(unsigned code) {
  if (code == 0) return false;
  const Block b = block_from_code(code, false);
  bool seen[3][3] = {};
  int start_r = -1, start_c = -1, total = 0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (b[r][c]) {
        ++total;
        if (start_r < 0) start_r = r, start_c = c;
      }
  int reached = 0;
  std::vector<std::pair<int, int>> stack{{start_r, start_c}};
  seen[start_r][start_c] = true;
  while (!stack.empty()) {
    const auto [r, c] = stack.back();
    stack.pop_back();
    ++reached;
    for (int rr = std::max(0, r - 1); rr <= std::min(2, r + 1); ++rr)
      for (int cc = std::max(0, c - 1); cc <= std::min(2, c + 1); ++cc)
        if (b[rr][cc] && !seen[rr][cc]) {
          seen[rr][cc] = true;
          stack.push_back({rr, cc});
        }
  }
  return reached == total;
}

struct Tables {
  std::array<bool, 256> euler_invariant{};
  std::array<bool, 256> simple{};
  Tables() {
    for (unsigned code = 0; code < 256; ++code) {
      euler_invariant[code] = quad_euler(block_from_code(code, true)) == quad_euler(block_from_code(code, false));
      simple[code] = neighbors_connected(code);
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

// Pixel graph with m-adjacency: a diagonal pair is linked only when neither
// shared 4-neighbor is foreground, so staircases form simple paths.
struct PixelGraph {
  std::vector<PixelCoord> nodes;
  std::vector<std::vector<std::pair<std::size_t, double>>> adj;

  explicit PixelGraph(const BinaryGrid& g) {
    Grid<long> index(g.rows(), g.cols(), -1);
    for (std::size_t r = 0; r < g.rows(); ++r)
      for (std::size_t c = 0; c < g.cols(); ++c)
        if (g(r, c)) {
          index(r, c) = static_cast<long>(nodes.size());
          nodes.push_back({static_cast<int>(r), static_cast<int>(c)});
        }
    adj.resize(nodes.size());
    const auto fg = [&](long r, long c) {
      return r >= 0 && c >= 0 && r < static_cast<long>(g.rows()) && c < static_cast<long>(g.cols()) &&
             g(r, c) != 0;
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const long r = static_cast<long>(nodes[i].row), c = static_cast<long>(nodes[i].col);
      for (int k = 0; k < 8; ++k) {
        const long rr = r + kDr[k], cc = c + kDc[k];
        if (!fg(rr, cc)) continue;
        const bool diagonal = kDr[k] != 0 && kDc[k] != 0;
        if (diagonal && (fg(r, cc) || fg(rr, c))) continue;
        adj[i].push_back({static_cast<std::size_t>(index(rr, cc)), diagonal ? std::numbers::sqrt2 : 1.0});
      }
    }
  }

  std::size_t degree(std::size_t i) const { return adj[i].size(); }

  std::vector<double> distances_from(std::size_t source) const {
    std::vector<double> dist(nodes.size(), std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    dist[source] = 0.0;
    queue.push({0.0, source});
    while (!queue.empty()) {
      const auto [d, u] = queue.top();
      queue.pop();
      if (d > dist[u]) continue;
      for (const auto& [v, w] : adj[u]) {
        if (d + w < dist[v]) {
          dist[v] = d + w;
          queue.push({dist[v], v});
        }
      }
    }
    return dist;
  }

  // Exact on trees (double sweep), a lower bound otherwise. Max over components.
  double longest_path() const {
    std::vector<bool> done(nodes.size(), false);
    double best = 0.0;
    for (std::size_t s = 0; s < nodes.size(); ++s) {
      if (done[s]) continue;
      const auto d0 = distances_from(s);
      std::size_t far = s;
      for (std::size_t i = 0; i < d0.size(); ++i) {
        if (std::isfinite(d0[i])) {
          done[i] = true;
          if (d0[i] > d0[far]) far = i;
        }
      }
      const auto d1 = distances_from(far);
      for (double v : d1)
        if (std::isfinite(v)) best = std::max(best, v);
    }
    return best;
  }
};

Point to_point(PixelCoord p) { return {static_cast<double>(p.col), static_cast<double>(p.row)}; }

}  // namespace

double Polyline::length() const {
  double len = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) len += distance(points[i - 1], points[i]);
  return len;
}

double polyline_length(const Polyline& p) { return p.length(); }

BinaryGrid skeletonize(const BinaryGrid& mask) {
  std::size_t r_min = mask.rows(), r_max = 0, c_min = mask.cols(), c_max = 0;
  for (std::size_t r = 0; r < mask.rows(); ++r)
    for (std::size_t c = 0; c < mask.cols(); ++c)
      if (mask(r, c)) {
        r_min = std::min(r_min, r);
        r_max = std::max(r_max, r);
        c_min = std::min(c_min, c);
        c_max = std::max(c_max, c);
      }
  BinaryGrid out(mask.rows(), mask.cols(), 0);
  if (r_min > r_max) return out;

  // Work on the bounding box with a one-pixel background frame.
  const std::size_t h = r_max - r_min + 1, w = c_max - c_min + 1;
  BinaryGrid g(h + 2, w + 2, 0);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) g(r + 1, c + 1) = mask(r + r_min, c + c_min) ? 1 : 0;

  const auto& t = tables();
  const auto code_at = [&](std::size_t r, std::size_t c) {
    unsigned code = 0;
    for (int k = 0; k < 8; ++k) code |= static_cast<unsigned>(g(r + kDr[k], c + kDc[k]) != 0) << k;
    return code;
  };
  constexpr int kBorders[4][2] = {{-1, 0}, {1, 0}, {0, 1}, {0, -1}};
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  int unchanged = 0;
  while (unchanged < 4) {
    unchanged = 0;
    for (const auto& border : kBorders) {
      candidates.clear();
      for (std::size_t r = 1; r <= h; ++r) {
        for (std::size_t c = 1; c <= w; ++c) {
          if (!g(r, c) || g(r + border[0], c + border[1])) continue;
          const unsigned code = code_at(r, c);
          if (std::popcount(code) == 1) continue;  // end point
          if (!t.euler_invariant[code] || !t.simple[code]) continue;
          candidates.push_back({r, c});
        }
      }
      bool changed = false;
      for (const auto& [r, c] : candidates) {
        if (t.simple[code_at(r, c)]) {
          g(r, c) = 0;
          changed = true;
        }
      }
      if (!changed) ++unchanged;
    }
  }
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) out(r + r_min, c + c_min) = g(r + 1, c + 1);
  return out;
}

BinaryGrid postprocess_mask(const BinaryGrid& mask) {
  return morphology::close3x3(morphology::largest_component(mask));
}

BinaryGrid prune_spurs(const BinaryGrid& skel, double fraction) {
  if (!(fraction >= 0.0)) throw ParameterError("prune fraction must be >= 0");
  BinaryGrid out = skel;
  for (;;) {
    const PixelGraph graph(out);
    bool has_branch = false;
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) has_branch |= graph.degree(i) >= 3;
    if (!has_branch) break;
    const double limit = fraction * graph.longest_path();

    std::vector<std::size_t> remove;
    for (std::size_t e = 0; e < graph.nodes.size(); ++e) {
      if (graph.degree(e) != 1) continue;
      std::vector<std::size_t> arm{e};
      double len = 0.0;
      std::size_t prev = e, cur = e;
      bool reaches_branch = false;
      for (;;) {
        std::size_t next = cur;
        double w = 0.0;
        for (const auto& [v, wv] : graph.adj[cur])
          if (v != prev) next = v, w = wv;
        if (next == cur) break;  // ran into another end point
        len += w;
        prev = cur;
        cur = next;
        if (graph.degree(cur) >= 3) {
          reaches_branch = true;
          break;
        }
        arm.push_back(cur);
      }
      if (reaches_branch && len < limit) remove.insert(remove.end(), arm.begin(), arm.end());
    }
    if (remove.empty()) break;
    for (std::size_t i : remove) out(graph.nodes[i].row, graph.nodes[i].col) = 0;
  }
  return out;
}

Polyline trace_path(const BinaryGrid& skel) {
  const PixelGraph graph(skel);
  if (graph.nodes.empty()) throw DegenerateInputError("cannot trace an empty skeleton");
  if (graph.nodes.size() == 1) return Polyline{{to_point(graph.nodes[0])}};

  const auto comps = morphology::label_components(skel, 8);
  if (comps.count() > 1) {
    std::vector<PixelCoord> firsts;
    std::vector<bool> seen(comps.count() + 1, false);
    for (const auto& n : graph.nodes) {
      const int l = comps.labels(n.row, n.col);
      if (!seen[l]) firsts.push_back(n), seen[l] = true;
    }
    throw TopologyError("skeleton has " + std::to_string(comps.count()) + " components", firsts);
  }
  std::vector<PixelCoord> branches;
  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    if (graph.degree(i) >= 3) branches.push_back(graph.nodes[i]);
    if (graph.degree(i) == 1) ends.push_back(i);
  }
  if (!branches.empty()) throw TopologyError("skeleton is branched", branches);
  if (ends.size() != 2) throw TopologyError("skeleton is a closed loop", {graph.nodes.front()});

  Polyline out;
  std::size_t prev = ends[0], cur = ends[0];
  out.points.push_back(to_point(graph.nodes[cur]));
  while (cur != ends[1]) {
    std::size_t next = cur;
    for (const auto& [v, w] : graph.adj[cur])
      if (v != prev) next = v;
    prev = cur;
    cur = next;
    out.points.push_back(to_point(graph.nodes[cur]));
  }
  return out;
}

Polyline resample(const Polyline& p, std::size_t n_points) {
  if (n_points < 2) throw ParameterError("resampling needs at least 2 points");
  if (p.points.empty()) throw DegenerateInputError("cannot resample an empty polyline");
  std::vector<double> cum(p.points.size(), 0.0);
  for (std::size_t i = 1; i < p.points.size(); ++i) cum[i] = cum[i - 1] + distance(p.points[i - 1], p.points[i]);
  const double total = cum.back();
  Polyline out;
  out.points.reserve(n_points);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n_points; ++k) {
    if (k == 0) {
      out.points.push_back(p.points.front());
      continue;
    }
    if (k + 1 == n_points) {
      out.points.push_back(p.points.back());
      continue;
    }
    const double s = total * static_cast<double>(k) / static_cast<double>(n_points - 1);
    while (seg + 2 < cum.size() && cum[seg + 1] < s) ++seg;
    const double span = cum[seg + 1] - cum[seg];
    const double f = span > 0.0 ? (s - cum[seg]) / span : 0.0;
    out.points.push_back(p.points[seg] + f * (p.points[seg + 1] - p.points[seg]));
  }
  return out;
}

Polyline trace_and_resample(const BinaryGrid& skel, std::size_t n_points) {
  return resample(trace_path(skel), n_points);
}

double graph_length(const BinaryGrid& skel) {
  const PixelGraph graph(skel);
  double total = 0.0;
  for (const auto& edges : graph.adj)
    for (const auto& e : edges) total += e.second;
  return 0.5 * total;
}

BinaryGrid mask_skeleton(const BinaryGrid& mask, const SkeletonOptions& options) {
  return prune_spurs(skeletonize(postprocess_mask(mask)), options.prune_fraction);
}

double mean_pair_distance(const Polyline& a, const Polyline& b) {
  if (a.points.size() != b.points.size()) {
    throw ParameterError("polylines have " + std::to_string(a.points.size()) + " and " +
                         std::to_string(b.points.size()) + " points");
  }
  if (a.points.empty()) throw DegenerateInputError("empty polylines");
  const auto directed = [](const Polyline& from, const Polyline& to) {
    double sum = 0.0;
    for (const Point& p : from.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const Point& q : to.points) best = std::min(best, distance(p, q));
      sum += best;
    }
    return sum / static_cast<double>(from.points.size());
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

void write_csv(const std::filesystem::path& path, const Polyline& p) {
  std::ofstream out(path);
  out.precision(17);
  out << "x,y\n";
  for (const Point& q : p.points) out << q.x << ',' << q.y << '\n';
  if (!out) throw IoError("cannot write polyline CSV", path.string());
}

}  // namespace dislogen::skeleton
