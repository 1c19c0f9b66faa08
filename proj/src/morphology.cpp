#include "dislogen/morphology.hpp"

#include <algorithm>

#include "dislogen/errors.hpp"

namespace dislogen::morphology {

namespace {

constexpr int kDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
constexpr int kDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

bool is_diagonal(int k) { return kDr[k] != 0 && kDc[k] != 0; }

}  // namespace

Components label_components(const BinaryGrid& g, int connectivity) {
  if (connectivity != 4 && connectivity != 8) throw ParameterError("connectivity must be 4 or 8");
  Components out{Grid<int>(g.rows(), g.cols(), 0), {}};
  const auto rows = static_cast<long>(g.rows());
  const auto cols = static_cast<long>(g.cols());
  std::vector<std::pair<long, long>> stack;
  for (long r0 = 0; r0 < rows; ++r0) {
    for (long c0 = 0; c0 < cols; ++c0) {
      if (!g(r0, c0) || out.labels(r0, c0)) continue;
      const int label = static_cast<int>(out.sizes.size()) + 1;
      std::size_t size = 0;
      out.labels(r0, c0) = label;
      stack.push_back({r0, c0});
      while (!stack.empty()) {
        const auto [r, c] = stack.back();
        stack.pop_back();
        ++size;
        for (int k = 0; k < 8; ++k) {
          if (connectivity == 4 && is_diagonal(k)) continue;
          const long rr = r + kDr[k], cc = c + kDc[k];
          if (rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
          if (!g(rr, cc) || out.labels(rr, cc)) continue;
          out.labels(rr, cc) = label;
          stack.push_back({rr, cc});
        }
      }
      out.sizes.push_back(size);
    }
  }
  return out;
}

std::size_t component_count(const BinaryGrid& g, int connectivity) {
  return label_components(g, connectivity).count();
}

BinaryGrid largest_component(const BinaryGrid& g) {
  const auto comps = label_components(g, 8);
  BinaryGrid out(g.rows(), g.cols(), 0);
  if (comps.count() == 0) return out;
  const int keep = static_cast<int>(std::max_element(comps.sizes.begin(), comps.sizes.end()) -
                                    comps.sizes.begin()) + 1;
  auto labels = comps.labels.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = labels[i] == keep ? 1 : 0;
  return out;
}

namespace {

BinaryGrid filter3x3(const BinaryGrid& g, bool dilate) {
  const auto rows = static_cast<long>(g.rows());
  const auto cols = static_cast<long>(g.cols());
  BinaryGrid out(g.rows(), g.cols(), 0);
  for (long r = 0; r < rows; ++r) {
    for (long c = 0; c < cols; ++c) {
      bool hit = !dilate;
      for (long dr = -1; dr <= 1; ++dr) {
        for (long dc = -1; dc <= 1; ++dc) {
          const long rr = r + dr, cc = c + dc;
          const bool inside = rr >= 0 && cc >= 0 && rr < rows && cc < cols;
          const bool v = inside ? g(rr, cc) != 0 : !dilate;
          if (dilate && v) hit = true;
          if (!dilate && !v) hit = false;
        }
      }
      out(r, c) = hit ? 1 : 0;
    }
  }
  return out;
}

}  // namespace

BinaryGrid dilate3x3(const BinaryGrid& g) { return filter3x3(g, true); }
BinaryGrid erode3x3(const BinaryGrid& g) { return filter3x3(g, false); }
BinaryGrid close3x3(const BinaryGrid& g) { return erode3x3(dilate3x3(g)); }

int neighbor_count(const BinaryGrid& g, std::size_t r, std::size_t c) {
  int n = 0;
  for (int k = 0; k < 8; ++k) {
    const long rr = static_cast<long>(r) + kDr[k], cc = static_cast<long>(c) + kDc[k];
    if (rr < 0 || cc < 0 || rr >= static_cast<long>(g.rows()) || cc >= static_cast<long>(g.cols())) continue;
    n += g(rr, cc) ? 1 : 0;
  }
  return n;
}

}  // namespace dislogen::morphology
