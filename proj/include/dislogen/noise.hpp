#pragma once

#include <cstdint>
#include <vector>

#include "dislogen/grid.hpp"

namespace dislogen::noise {

struct PerlinParams {
  double wavelength = 64.0;  // dominant wavelength in pixels
  std::uint64_t seed = 0;
};

struct GaussianParams {
  double sigma = 1.0;  // pixels
};

// Classic 2D gradient-lattice Perlin noise with quintic fade, sampled at pixel
// centers on a lattice of spacing wavelength/2. Gradients are
// unit vectors drawn per lattice node, so values stay within [-1, 1].
ScalarGrid perlin(const PerlinParams& params, std::size_t rows, std::size_t cols);

// Independent uniform samples on [low, high).
ScalarGrid white_noise(std::uint64_t seed, std::size_t rows, std::size_t cols, double low,
                       double high);

// Normalized 1D kernel of radius ceil(3*sigma), indexed from -radius.
std::vector<double> gaussian_kernel(double sigma);

// Separable Gaussian convolution with half-sample symmetric (reflect) borders.
ScalarGrid gaussian_filter(const ScalarGrid& g, const GaussianParams& params);

// Affine rescale to [0, 1]. Throws DegenerateInputError on a constant grid.
ScalarGrid normalize01(const ScalarGrid& g);

ScalarGrid clip01(const ScalarGrid& g);

// Population standard deviation (divides by the pixel count).
double stddev(const ScalarGrid& g);

}  // namespace dislogen::noise
