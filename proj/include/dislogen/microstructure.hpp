#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "json.hpp"

#include "dislogen/distributions.hpp"
#include "dislogen/geometry.hpp"

namespace dislogen::microstructure {

struct ImageDims {
  std::size_t rows = 512;
  std::size_t cols = 512;
  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

// Two parallel straight traces bounding a glide band. Trace 1 passes through
// `anchor`; trace 2 is offset by `delta_d` along the band normal.
struct SlipTracePair {
  double alpha = 0.0;    // inclination, degrees from the +x axis
  double delta_d = 0.0;  // slip width, pixels
  Point anchor;          // start of the first dislocation on trace 1
  double p0 = 0.0;       // anchor position along the in-image part of trace 1, in [0,1]

  Point direction() const;  // unit vector along the traces
  Point normal() const;     // unit vector from trace 1 towards trace 2
  // Signed distance of p from trace 1 (0) or trace 2 (1), along normal().
  double offset_from_trace(Point p, int trace) const;

  friend bool operator==(const SlipTracePair&, const SlipTracePair&) = default;
};

struct DislocationCurve {
  std::vector<Point> support_points;
  double gray_value = 0.0;  // assigned when styling against a background
  double thickness = 1.0;   // pixels
  int id = 0;
  std::uint64_t jitter_seed = 0;

  DislocationCurve() = default;
  explicit DislocationCurve(std::vector<Point> points);

  const CubicSpline2D& spline() const { return spline_; }
  void set_support_points(std::vector<Point> points);

  friend bool operator==(const DislocationCurve& a, const DislocationCurve& b) {
    return a.support_points == b.support_points && a.gray_value == b.gray_value &&
           a.thickness == b.thickness && a.id == b.id && a.jitter_seed == b.jitter_seed;
  }

 private:
  CubicSpline2D spline_;
};

struct Pileup {
  SlipTracePair trace;
  std::vector<DislocationCurve> dislocations;
  std::vector<double> offsets;  // spacing between consecutive dislocations along the traces
  Shape shape;                  // shape template actually used (after any flattening)
  double trace_contrast = 0.0;  // slip-trace line contrast in the image; 0 = not drawn
  std::uint64_t seed = 0;
  int placement_attempts = 0;
  // Count drawn from the distribution; larger than dislocations.size() when
  // the scene-wide cap truncated this pileup.
  int requested_dislocations = 0;

  friend bool operator==(const Pileup&, const Pileup&) = default;
};

struct MicrostructureSpec {
  std::vector<Pileup> pileups;
  ImageDims dims;
  std::uint64_t seed = 0;
  std::string distribution_id;

  std::size_t dislocation_count() const;
  friend bool operator==(const MicrostructureSpec&, const MicrostructureSpec&) = default;
};

// Draws a full scene. Sampled features (pileup count, dislocations per
// pileup, slip width, slip direction, spacings) are kept as drawn; only the
// placement, shape curvature and jitter are retried, up to 100 times per
// pileup, until every curve fits inside the image. The total number of
// dislocations is capped at `dist.max_dislocations` by truncating the last pileup.
MicrostructureSpec sample_microstructure(const FeatureDistributions& dist, std::uint64_t seed,
                                         ImageDims dims = {});

// Maps `shape` into the band so that its first point sits at trace.anchor and
// its last point on trace 2, then jitters interior support points uniformly
// within +-jitter (endpoints stay on the traces).
DislocationCurve build_dislocation(const SlipTracePair& trace, const Shape& shape,
                                   std::uint64_t jitter_seed, double jitter = 1.0);

// Translates every support point by `offset` along the traces, then jitters
// interior points. Throws BoundsError when `dims` is given and the shifted
// curve leaves the image.
DislocationCurve shift_along_traces(const DislocationCurve& c, const SlipTracePair& trace,
                                    double offset, std::uint64_t jitter_seed, double jitter = 1.0,
                                    std::optional<ImageDims> dims = std::nullopt);

// Uniform square jitter of half-width `jitter` on every support point except
// the two endpoints.
std::vector<Point> jitter_points(std::vector<Point> points, std::uint64_t seed, double jitter);

Point spline_eval(const DislocationCurve& c, double t);
double curve_length(const DislocationCurve& c);

// Dense polyline along the curve with at least `per_pixel` points per pixel of
// arc length.
std::vector<Point> sample_curve(const DislocationCurve& c, double per_pixel = 4.0);

// True when every sampled point lies in [margin, cols-1-margin] x [margin, rows-1-margin].
bool curve_inside(const DislocationCurve& c, ImageDims dims, double margin = 0.0);

void to_json(nlohmann::json& j, const SlipTracePair& t);
void from_json(const nlohmann::json& j, SlipTracePair& t);
void to_json(nlohmann::json& j, const DislocationCurve& c);
void from_json(const nlohmann::json& j, DislocationCurve& c);
void to_json(nlohmann::json& j, const Pileup& p);
void from_json(const nlohmann::json& j, Pileup& p);
void to_json(nlohmann::json& j, const MicrostructureSpec& s);
void from_json(const nlohmann::json& j, MicrostructureSpec& s);

}  // namespace dislogen::microstructure
