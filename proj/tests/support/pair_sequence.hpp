#pragma once

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "dislogen/background.hpp"
#include "dislogen/raster.hpp"

namespace dislogen::testing {

// Two straight parallel dislocations, `length` px long, inclined at `angle_deg`
// and `separation` px apart along their common normal, rendered by the scene
// renderer on a seeded synthetic background. Returns the instance masks as
// probabilities.
inline std::vector<ScalarGrid> render_pair(double separation, double angle_deg = 30.0,
                                           double length = 80.0, double thickness = 2.0,
                                           std::size_t size = 192, std::uint64_t bg_seed = 5) {
  using microstructure::DislocationCurve;
  const double a = angle_deg * std::numbers::pi / 180.0;
  const Point u{std::cos(a), std::sin(a)};
  const Point n{-u.y, u.x};
  const Point center{size / 2.0, size / 2.0};

  microstructure::Pileup pileup;
  pileup.trace.alpha = angle_deg + 90.0;
  pileup.trace.delta_d = length;
  for (int k = 0; k < 2; ++k) {
    const Point mid = center + (k == 0 ? -0.5 : 0.5) * separation * n;
    std::vector<Point> pts;
    for (int i = 0; i <= 4; ++i) pts.push_back(mid + (length * (i / 4.0 - 0.5)) * u);
    DislocationCurve c(pts);
    c.id = k;
    c.thickness = thickness;
    c.gray_value = 0.1;
    pileup.dislocations.push_back(std::move(c));
  }
  pileup.requested_dislocations = 2;
  pileup.offsets = {separation};

  microstructure::MicrostructureSpec spec;
  spec.dims = {size, size};
  spec.pileups.push_back(std::move(pileup));
  spec.distribution_id = "pair";

  auto recipe = background::sample_background_recipe(bg_seed, background::Mode::synthetic, nullptr, size,
                                                      size, background::SyntheticRanges{});
  const ScalarGrid bg = background::make_background(recipe, nullptr, size, size);
  const auto bundle = raster::render(spec, bg, raster::Style{});

  std::vector<ScalarGrid> masks;
  for (const auto& m : bundle.instance_masks) {
    ScalarGrid g(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
      for (std::size_t c = 0; c < m.cols(); ++c) g(r, c) = m(r, c) ? 1.0 : 0.0;
    masks.push_back(std::move(g));
  }
  return masks;
}

}  // namespace dislogen::testing
