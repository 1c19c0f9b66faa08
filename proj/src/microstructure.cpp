#include "dislogen/microstructure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dislogen/errors.hpp"

namespace dislogen::microstructure {

using nlohmann::json;

namespace {

constexpr int kMaxPlacementAttempts = 100;
// Curves keep this far from the border so the thickest stroke (4 px) stays
// fully inside the image.
constexpr double kBorderMargin = 3.0;

// Shape with its lateral deviation from the first point scaled by `factor`.
Shape flattened(const Shape& s, double factor) {
  Shape out = s;
  const double u0 = s.points.front().x;
  for (auto& p : out.points) p.x = u0 + factor * (p.x - u0);
  return out;
}

struct Box {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();
  void add(Point p) {
    min_x = std::min(min_x, p.x);
    min_y = std::min(min_y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
};

// Parameter interval of the line anchor + s*dir inside [0,cols-1]x[0,rows-1].
std::pair<double, double> clip_line(Point anchor, Point dir, ImageDims dims) {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  const double bounds[2][2] = {{0.0, static_cast<double>(dims.cols) - 1.0},
                               {0.0, static_cast<double>(dims.rows) - 1.0}};
  const double origin[2] = {anchor.x, anchor.y};
  const double d[2] = {dir.x, dir.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (std::abs(d[axis]) < 1e-15) continue;
    double s0 = (bounds[axis][0] - origin[axis]) / d[axis];
    double s1 = (bounds[axis][1] - origin[axis]) / d[axis];
    if (s0 > s1) std::swap(s0, s1);
    lo = std::max(lo, s0);
    hi = std::min(hi, s1);
  }
  return {lo, hi};
}

}  // namespace

Point SlipTracePair::direction() const {
  const double a = alpha * std::numbers::pi / 180.0;
  return {std::cos(a), std::sin(a)};
}

Point SlipTracePair::normal() const {
  const Point d = direction();
  return {-d.y, d.x};
}

double SlipTracePair::offset_from_trace(Point p, int trace) const {
  return dot(p - anchor, normal()) - (trace == 0 ? 0.0 : delta_d);
}

DislocationCurve::DislocationCurve(std::vector<Point> points) {
  set_support_points(std::move(points));
}

void DislocationCurve::set_support_points(std::vector<Point> points) {
  spline_ = CubicSpline2D(points);
  support_points = std::move(points);
}

std::size_t MicrostructureSpec::dislocation_count() const {
  std::size_t n = 0;
  for (const auto& p : pileups) n += p.dislocations.size();
  return n;
}

std::vector<Point> jitter_points(std::vector<Point> points, std::uint64_t seed, double jitter) {
  if (jitter <= 0.0 || points.size() < 3) return points;
  Rng rng(seed);
  for (std::size_t i = 1; i + 1 < points.size(); ++i) {
    points[i].x += rng.uniform(-jitter, jitter);
    points[i].y += rng.uniform(-jitter, jitter);
  }
  return points;
}

DislocationCurve build_dislocation(const SlipTracePair& trace, const Shape& shape,
                                   std::uint64_t jitter_seed, double jitter) {
  if (!(trace.delta_d > 0.0)) throw ParameterError("degenerate slip trace pair (delta_d <= 0)");
  if (shape.points.size() < 3) throw ParameterError("dislocation shape needs at least 3 points");
  const Point dir = trace.direction();
  const Point nrm = trace.normal();
  const double u0 = shape.points.front().x;
  const std::size_t last = shape.points.size() - 1;

  std::vector<Point> pts;
  pts.reserve(shape.points.size());
  for (std::size_t k = 0; k <= last; ++k) {
    const double u = shape.points[k].x - u0;
    const double v = k == 0 ? 0.0 : (k == last ? 1.0 : shape.points[k].y);
    pts.push_back(trace.anchor + trace.delta_d * (u * dir + v * nrm));
  }
  DislocationCurve c(jitter_points(std::move(pts), jitter_seed, jitter));
  c.jitter_seed = jitter_seed;
  return c;
}

DislocationCurve shift_along_traces(const DislocationCurve& c, const SlipTracePair& trace,
                                    double offset, std::uint64_t jitter_seed, double jitter,
                                    std::optional<ImageDims> dims) {
  if (!(offset > 0.0)) throw ParameterError("shift offset must be > 0");
  const Point step = offset * trace.direction();
  std::vector<Point> pts = c.support_points;
  for (auto& p : pts) p += step;
  DislocationCurve out = c;
  out.set_support_points(jitter_points(std::move(pts), jitter_seed, jitter));
  out.jitter_seed = jitter_seed;
  if (dims && !curve_inside(out, *dims)) {
    throw BoundsError("shifted dislocation leaves the image");
  }
  return out;
}

Point spline_eval(const DislocationCurve& c, double t) { return c.spline().eval(t); }

double curve_length(const DislocationCurve& c) { return c.spline().length(); }

std::vector<Point> sample_curve(const DislocationCurve& c, double per_pixel) {
  const double len = curve_length(c);
  const auto n = static_cast<std::size_t>(std::ceil(per_pixel * len)) + 1;
  return c.spline().sample(std::max<std::size_t>(n, 2));
}

bool curve_inside(const DislocationCurve& c, ImageDims dims, double margin) {
  const double max_x = static_cast<double>(dims.cols) - 1.0 - margin;
  const double max_y = static_cast<double>(dims.rows) - 1.0 - margin;
  for (const Point& p : sample_curve(c, 1.0)) {
    if (p.x < margin || p.y < margin || p.x > max_x || p.y > max_y) return false;
  }
  return true;
}

namespace {

Pileup place_pileup(const FeatureDistributions& dist, ImageDims dims, std::uint64_t pileup_seed,
                    double alpha, double delta_d, int count, std::vector<double> offsets,
                    int first_id) {
  Pileup pileup;
  pileup.seed = pileup_seed;
  pileup.offsets = std::move(offsets);
  pileup.trace.alpha = alpha;
  pileup.trace.delta_d = delta_d;

  double jitter = dist.jitter;
  if (!pileup.offsets.empty()) {
    jitter = std::min(jitter, 0.2 * *std::min_element(pileup.offsets.begin(), pileup.offsets.end()));
  }
  const double margin = kBorderMargin + 2.0 * jitter;
  std::vector<double> cumulative(count, 0.0);
  for (int i = 1; i < count; ++i) cumulative[i] = cumulative[i - 1] + pileup.offsets[i - 1];

  Rng rng(derive_seed(pileup_seed, 2));
  const Point dir = pileup.trace.direction();
  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    Shape shape;
    if (!dist.support_point_library.empty() && rng.bernoulli(dist.library_fraction)) {
      const auto pick = rng.uniform_int(0, static_cast<std::int64_t>(dist.support_point_library.size()) - 1);
      shape = dist.support_point_library[static_cast<std::size_t>(pick)];
    } else {
      shape = random_parametric_shape(rng);
    }
    // Later attempts straighten the shape so wide bands still fit.
    shape = flattened(shape, std::max(0.0, 1.0 - attempt / 50.0));

    SlipTracePair local = pileup.trace;
    local.anchor = {0.0, 0.0};
    const DislocationCurve base = build_dislocation(local, shape, 0, 0.0);
    Box box;
    const Point last_shift = cumulative.back() * dir;
    for (const Point& p : sample_curve(base, 1.0)) {
      box.add(p);
      box.add(p + last_shift);
    }
    const double x_lo = margin - box.min_x;
    const double x_hi = static_cast<double>(dims.cols) - 1.0 - margin - box.max_x;
    const double y_lo = margin - box.min_y;
    const double y_hi = static_cast<double>(dims.rows) - 1.0 - margin - box.max_y;
    const Point anchor{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
    if (x_lo > x_hi || y_lo > y_hi) continue;

    pileup.trace.anchor = {x_lo + anchor.x * (x_hi - x_lo), y_lo + anchor.y * (y_hi - y_lo)};
    const DislocationCurve unjittered = build_dislocation(pileup.trace, shape, 0, 0.0);

    std::vector<DislocationCurve> curves;
    bool inside = true;
    for (int i = 0; i < count && inside; ++i) {
      const std::uint64_t jseed = derive_seed(pileup_seed, 1000 + static_cast<std::uint64_t>(i));
      DislocationCurve c = i == 0 ? build_dislocation(pileup.trace, shape, jseed, jitter)
                                  : shift_along_traces(unjittered, pileup.trace, cumulative[i],
                                                       jseed, jitter);
      c.id = first_id + i;
      inside = curve_inside(c, dims, kBorderMargin);
      curves.push_back(std::move(c));
    }
    if (!inside) continue;

    const auto [s_lo, s_hi] = clip_line(pileup.trace.anchor, dir, dims);
    pileup.trace.p0 = s_hi > s_lo ? (0.0 - s_lo) / (s_hi - s_lo) : 0.0;
    pileup.shape = shape;
    pileup.dislocations = std::move(curves);
    pileup.placement_attempts = attempt + 1;
    return pileup;
  }
  throw SamplingError("cannot place a pileup of " + std::to_string(count) +
                      " dislocations with slip width " + std::to_string(delta_d) +
                      " px, direction " + std::to_string(alpha) + " deg and total spacing " +
                      std::to_string(cumulative.back()) + " px inside a " +
                      std::to_string(dims.rows) + "x" + std::to_string(dims.cols) +
                      " image after " + std::to_string(kMaxPlacementAttempts) + " attempts");
}

}  // namespace

MicrostructureSpec sample_microstructure(const FeatureDistributions& dist, std::uint64_t seed,
                                         ImageDims dims) {
  dist.validate();
  if (dims.rows < 2 * kBorderMargin + 2 || dims.cols < 2 * kBorderMargin + 2) {
    throw ParameterError("image too small for microstructure sampling");
  }
  MicrostructureSpec spec;
  spec.dims = dims;
  spec.seed = seed;
  spec.distribution_id = dist.id;

  Rng scene_rng(derive_seed(seed, 0));
  const int pileups = dist.number_of_pileups.sample(scene_rng);
  int remaining = dist.max_dislocations;
  int next_id = 0;
  for (int p = 0; p < pileups && remaining > 0; ++p) {
    const std::uint64_t pileup_seed = derive_seed(seed, 100 + static_cast<std::uint64_t>(p));
    Rng features(derive_seed(pileup_seed, 1));
    const double alpha = dist.slip_direction.sample(features);
    const double delta_d = dist.slip_width.sample(features);
    const int requested = dist.dislocations_per_pileup.sample(features);
    const int count = std::min(requested, remaining);
    std::vector<double> offsets;
    for (int i = 1; i < count; ++i) offsets.push_back(dist.nearest_spacing.sample(features));

    spec.pileups.push_back(
        place_pileup(dist, dims, pileup_seed, alpha, delta_d, count, std::move(offsets), next_id));
    spec.pileups.back().requested_dislocations = requested;
    next_id += count;
    remaining -= count;
  }
  return spec;
}

void to_json(json& j, const SlipTracePair& t) {
  j = json{{"alpha", t.alpha}, {"delta_d", t.delta_d}, {"anchor", t.anchor}, {"p0", t.p0}};
}

void from_json(const json& j, SlipTracePair& t) {
  j.at("alpha").get_to(t.alpha);
  j.at("delta_d").get_to(t.delta_d);
  j.at("anchor").get_to(t.anchor);
  j.at("p0").get_to(t.p0);
}

void to_json(json& j, const DislocationCurve& c) {
  j = json{{"id", c.id},
           {"support_points", c.support_points},
           {"gray_value", c.gray_value},
           {"thickness", c.thickness},
           {"jitter_seed", c.jitter_seed},
           {"length", curve_length(c)}};
}

void from_json(const json& j, DislocationCurve& c) {
  c.set_support_points(j.at("support_points").get<std::vector<Point>>());
  j.at("id").get_to(c.id);
  j.at("gray_value").get_to(c.gray_value);
  j.at("thickness").get_to(c.thickness);
  c.jitter_seed = j.value("jitter_seed", std::uint64_t{0});
}

void to_json(json& j, const Pileup& p) {
  j = json{{"trace", p.trace},
           {"offsets", p.offsets},
           {"shape", p.shape},
           {"trace_contrast", p.trace_contrast},
           {"seed", p.seed},
           {"placement_attempts", p.placement_attempts},
           {"requested_dislocations", p.requested_dislocations},
           {"dislocations", p.dislocations}};
}

void from_json(const json& j, Pileup& p) {
  j.at("trace").get_to(p.trace);
  j.at("offsets").get_to(p.offsets);
  j.at("shape").get_to(p.shape);
  j.at("trace_contrast").get_to(p.trace_contrast);
  j.at("seed").get_to(p.seed);
  p.placement_attempts = j.value("placement_attempts", 0);
  j.at("dislocations").get_to(p.dislocations);
  p.requested_dislocations = j.value("requested_dislocations", static_cast<int>(p.dislocations.size()));
}

void to_json(json& j, const MicrostructureSpec& s) {
  j = json{{"dims", {{"rows", s.dims.rows}, {"cols", s.dims.cols}}},
           {"seed", s.seed},
           {"distribution_id", s.distribution_id},
           {"pileups", s.pileups}};
}

void from_json(const json& j, MicrostructureSpec& s) {
  j.at("dims").at("rows").get_to(s.dims.rows);
  j.at("dims").at("cols").get_to(s.dims.cols);
  j.at("seed").get_to(s.seed);
  j.at("distribution_id").get_to(s.distribution_id);
  j.at("pileups").get_to(s.pileups);
}

}  // namespace dislogen::microstructure
