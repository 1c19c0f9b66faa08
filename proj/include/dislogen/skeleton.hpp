#pragma once

#include <filesystem>
#include <vector>

#include "dislogen/geometry.hpp"
#include "dislogen/grid.hpp"

namespace dislogen::skeleton {

// Ordered points in pixel units (x = column, y = row).
struct Polyline {
  std::vector<Point> points;
  double length() const;
};

double polyline_length(const Polyline& p);

// Lee thinning restricted to 2D. Output is a subset of the input, one pixel
// wide, with the connectivity of every input component preserved.
BinaryGrid skeletonize(const BinaryGrid& mask);

// Keeps the largest 8-connected component and closes 1-px gaps.
BinaryGrid postprocess_mask(const BinaryGrid& mask);

// Removes end branches shorter than `fraction` of the longest path,
// repeating until none is left.
BinaryGrid prune_spurs(const BinaryGrid& skel, double fraction = 0.1);

// Endpoint-to-endpoint pixel path of a skeleton that is a single open curve.
// Throws TopologyError on branches (carrying the branch pixels), cycles or
// several components. The first endpoint is the one found first in
// row-major order.
Polyline trace_path(const BinaryGrid& skel);

// Points at equal arc-length steps along `p`, endpoints included.
Polyline resample(const Polyline& p, std::size_t n_points);

Polyline trace_and_resample(const BinaryGrid& skel, std::size_t n_points);

// Sum of all edge lengths of the skeleton's pixel graph, diagonal steps sqrt(2).
double graph_length(const BinaryGrid& skel);

struct SkeletonOptions {
  double prune_fraction = 0.1;
};

// Binary mask -> post-processed, thinned and pruned skeleton.
BinaryGrid mask_skeleton(const BinaryGrid& mask, const SkeletonOptions& options = {});

// Symmetrized mean nearest-point distance. Both polylines need the same count.
double mean_pair_distance(const Polyline& a, const Polyline& b);

// Columns x,y with a header line.
void write_csv(const std::filesystem::path& path, const Polyline& p);

}  // namespace dislogen::skeleton
