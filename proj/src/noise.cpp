#include "dislogen/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dislogen/rng.hpp"

namespace dislogen::noise {
namespace {

inline double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

inline double lerp(double a, double b, double t) { return a + t * (b - a); }

// Maps an out-of-range index back into [0, n) by mirroring about the edges,
// repeating the edge sample (d c b a | a b c d | d c b a).
inline std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

ScalarGrid perlin(const PerlinParams& params, std::size_t rows, std::size_t cols) {
  if (!(params.wavelength >= 2.0)) {
    throw ParameterError("perlin wavelength must be >= 2 pixels");
  }
  if (rows == 0 || cols == 0) throw ParameterError("perlin grid must be non-empty");

  // Gradient noise changes sign roughly once per lattice cell, so a cell of
  // half the wavelength puts the spectral peak near 1/wavelength.
  const double inv = 2.0 / params.wavelength;
  const std::size_t nodes_y = static_cast<std::size_t>(std::floor((rows - 0.5) * inv)) + 2;
  const std::size_t nodes_x = static_cast<std::size_t>(std::floor((cols - 0.5) * inv)) + 2;

  std::vector<double> gx(nodes_y * nodes_x);
  std::vector<double> gy(nodes_y * nodes_x);
  Rng rng(params.seed);
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    gx[i] = std::cos(angle);
    gy[i] = std::sin(angle);
  }

  // Per-column lattice cell and fade weights are shared by every row.
  std::vector<std::size_t> cell_x(cols);
  std::vector<double> frac_x(cols), fade_x(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const double x = (static_cast<double>(c) + 0.5) * inv;
    cell_x[c] = static_cast<std::size_t>(std::floor(x));
    frac_x[c] = x - static_cast<double>(cell_x[c]);
    fade_x[c] = fade(frac_x[c]);
  }

  ScalarGrid out(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const double y = (static_cast<double>(r) + 0.5) * inv;
    const std::size_t y0 = static_cast<std::size_t>(std::floor(y));
    const double fy = y - static_cast<double>(y0);
    const double v = fade(fy);
    const std::size_t row0 = y0 * nodes_x;
    const std::size_t row1 = (y0 + 1) * nodes_x;
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t x0 = cell_x[c];
      const double fx = frac_x[c];
      const double n00 = gx[row0 + x0] * fx + gy[row0 + x0] * fy;
      const double n10 = gx[row0 + x0 + 1] * (fx - 1.0) + gy[row0 + x0 + 1] * fy;
      const double n01 = gx[row1 + x0] * fx + gy[row1 + x0] * (fy - 1.0);
      const double n11 = gx[row1 + x0 + 1] * (fx - 1.0) + gy[row1 + x0 + 1] * (fy - 1.0);
      const double u = fade_x[c];
      out(r, c) = lerp(lerp(n00, n10, u), lerp(n01, n11, u), v);
    }
  }
  return out;
}

ScalarGrid white_noise(std::uint64_t seed, std::size_t rows, std::size_t cols, double low,
                       double high) {
  if (!(low < high)) throw ParameterError("white_noise requires low < high");
  ScalarGrid out(rows, cols);
  Rng rng(seed);
  for (auto& v : out.values()) v = rng.uniform(low, high);
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian sigma must be > 0");
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
    const double w = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
    k[i + radius] = w;
    sum += w;
  }
  for (auto& w : k) w /= sum;
  return k;
}

ScalarGrid gaussian_filter(const ScalarGrid& g, const GaussianParams& params) {
  const auto kernel = gaussian_kernel(params.sigma);
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  const auto rows = static_cast<std::ptrdiff_t>(g.rows());
  const auto cols = static_cast<std::ptrdiff_t>(g.cols());

  // Horizontal pass over a reflect-padded row buffer.
  ScalarGrid tmp(g.rows(), g.cols());
  std::vector<double> line(cols + 2 * radius);
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    for (std::ptrdiff_t i = -radius; i < cols + radius; ++i) {
      line[i + radius] = g(r, reflect_index(i, cols));
    }
    for (std::ptrdiff_t c = 0; c < cols; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < kernel.size(); ++k) acc += kernel[k] * line[c + k];
      tmp(r, c) = acc;
    }
  }

  // Vertical pass: accumulate whole rows so the inner loop is contiguous.
  ScalarGrid out(g.rows(), g.cols(), 0.0);
  for (std::ptrdiff_t r = 0; r < rows; ++r) {
    double* dst = &out(r, 0);
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
      const double w = kernel[k + radius];
      const double* src = &tmp(reflect_index(r + k, rows), 0);
      for (std::ptrdiff_t c = 0; c < cols; ++c) dst[c] += w * src[c];
    }
  }
  return out;
}

ScalarGrid normalize01(const ScalarGrid& g) {
  if (g.empty()) throw DegenerateInputError("normalize01 on empty grid");
  const auto [mn, mx] = std::minmax_element(g.values().begin(), g.values().end());
  const double lo = *mn;
  const double hi = *mx;
  if (!(hi > lo)) throw DegenerateInputError("normalize01 on constant grid");
  const double range = hi - lo;
  ScalarGrid out(g.rows(), g.cols());
  auto src = g.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - lo) / range;
  return out;
}

ScalarGrid clip01(const ScalarGrid& g) {
  ScalarGrid out(g.rows(), g.cols());
  auto src = g.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::clamp(src[i], 0.0, 1.0);
  return out;
}

double stddev(const ScalarGrid& g) {
  if (g.size() < 2) throw ParameterError("stddev needs at least 2 pixels");
  // Welford's single pass; the tests check it against a two-pass sum.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double v : g.values()) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  return std::sqrt(m2 / static_cast<double>(n));
}

}  // namespace dislogen::noise
