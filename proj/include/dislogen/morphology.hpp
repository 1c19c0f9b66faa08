#pragma once

#include <cstddef>
#include <vector>

#include "dislogen/grid.hpp"

namespace dislogen::morphology {

struct Components {
  Grid<int> labels;  // 0 = background, components numbered from 1
  std::vector<std::size_t> sizes;  // sizes[k-1] is the pixel count of label k
  std::size_t count() const { return sizes.size(); }
};

// connectivity is 4 or 8.
Components label_components(const BinaryGrid& g, int connectivity = 8);
std::size_t component_count(const BinaryGrid& g, int connectivity = 8);

// Largest 8-connected component; ties go to the one found first in row-major order.
BinaryGrid largest_component(const BinaryGrid& g);

BinaryGrid dilate3x3(const BinaryGrid& g);
// Pixels outside the grid count as foreground.
BinaryGrid erode3x3(const BinaryGrid& g);
// Dilation then erosion; never removes foreground.
BinaryGrid close3x3(const BinaryGrid& g);

// Number of foreground pixels among the 8 neighbors of (r, c).
int neighbor_count(const BinaryGrid& g, std::size_t r, std::size_t c);

}  // namespace dislogen::morphology
