// Acceptance suite: one PASS/FAIL line per criterion. Optional arguments pick
// criteria by number, e.g. `acceptance 4 5`.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "dislogen/background.hpp"
#include "dislogen/dataset.hpp"
#include "dislogen/dataset_stats.hpp"
#include "dislogen/eval.hpp"
#include "dislogen/microstructure.hpp"
#include "dislogen/noise.hpp"
#include "dislogen/raster.hpp"
#include "dislogen/rng.hpp"
#include "dislogen/tracking.hpp"
#include "../support/pair_sequence.hpp"
#include "../support/spectrum.hpp"
#include "../support/temp_dir.hpp"

using namespace dislogen;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- 1

Outcome reproducibility() {
  constexpr int kBundles = 100, kReal = 20;
  constexpr double kLimit = 120.0;
  dislogen::testing::TempDir tmp;

  // Patch library for the real-background share, written and reloaded as PNG.
  background::BackgroundLibrary patches;
  for (int i = 0; i < 6; ++i) {
    background::SyntheticBackgroundRecipe r;
    r.seed_perlin1 = 100 + i;
    r.seed_perlin2 = 200 + i;
    r.seed_white = 300 + i;
    patches.add("patch" + std::to_string(i), background::synth_background(r, 600, 600));
  }
  patches.save(tmp.path() / "lib");
  const auto lib = background::BackgroundLibrary::load(tmp.path() / "lib");

  raster::GeneratorConfig synthetic;
  raster::GeneratorConfig real = synthetic;
  real.background_mode = background::Mode::real;
  real.background_library = (tmp.path() / "lib").string();

  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 pick(20240611);
  int identical = 0;
  std::string first_diff;
  for (int i = 0; i < kBundles; ++i) {
    const std::uint64_t seed = pick();
    const auto& config = i < kBundles - kReal ? synthetic : real;
    const auto bundle = raster::generate_scene(config, seed, &lib);
    const auto a = raster::emit(bundle, tmp.path() / "gen", i);
    const json record = json::parse(slurp(a.params));
    const auto b = raster::emit(raster::replay(record, &lib), tmp.path() / "rep", i);
    bool same = a.all().size() == b.all().size();
    for (std::size_t f = 0; same && f < a.all().size(); ++f) same = slurp(a.all()[f]) == slurp(b.all()[f]);
    if (same) ++identical;
    else if (first_diff.empty()) first_diff = fmt(" first mismatch: bundle %d", i);
  }
  const double secs = seconds_since(t0);
  return {identical == kBundles && secs < kLimit,
          fmt("%d/%d bundles bitwise identical after replay (%d real-background), %.1f s (limit %.0f s)%s",
              identical, kBundles, kReal, secs, kLimit, first_diff.c_str())};
}

// ---- 2

Outcome pipeline_fidelity() {
  constexpr int kRecipes = 25;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  int exact = 0;
  for (int i = 0; i < kRecipes; ++i) {
    background::SyntheticBackgroundRecipe r;
    r.lambda1 = 20 + 80 * u(rng);
    r.lambda2 = 5 + 20 * u(rng);
    r.w_perlin = 0.1 + 0.4 * u(rng);
    r.w_white1 = 0;
    r.w_white2_scale = 0;
    r.s1 = 0;
    r.s2 = 0;
    r.seed_perlin1 = rng();
    r.seed_perlin2 = rng();
    r.seed_white = rng();
    const std::size_t rows = 64 + rng() % 192, cols = 64 + rng() % 192;
    const auto g = background::synth_background(r, rows, cols);
    const auto p1 = noise::perlin({r.lambda1, r.seed_perlin1}, rows, cols);
    const auto p2 = noise::perlin({r.lambda2, r.seed_perlin2}, rows, cols);
    ScalarGrid p3(rows, cols);
    for (std::size_t k = 0; k < p3.size(); ++k) p3.values()[k] = p1.values()[k] + r.w_perlin * p2.values()[k];
    if (g == noise::clip01(noise::normalize01(p3))) ++exact;
  }
  return {exact == kRecipes, fmt("%d/%d noise-free recipes equal clip01(normalize01(P1 + w*P2)) exactly", exact, kRecipes)};
}

// ---- 3

Outcome perlin_wavelength() {
  int ok = 0, total = 0;
  double worst = 1.0;
  for (double lambda : {16.0, 32.0, 64.0}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const double f = dislogen::testing::peak_frequency(noise::perlin({lambda, seed}, 512, 512));
      const double ratio = f * lambda;  // 1 when the peak sits at 1/lambda
      worst = std::max(worst, std::max(ratio, 1.0 / ratio));
      ok += ratio >= 0.5 && ratio <= 2.0;
      ++total;
    }
  }
  return {ok == total, fmt("%d/%d spectra peak within a factor 2 of 1/lambda (worst factor %.2f)", ok, total, worst)};
}

// ---- 4

// Step-by-step greedy reference written from the algorithm description.
std::vector<eval::Assignment> oracle_greedy(const std::vector<ScalarGrid>& gt, const std::vector<ScalarGrid>& pred) {
  std::vector<bool> used(pred.size(), false);
  std::vector<eval::Assignment> out;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    long best = -1;
    double best_loss = 0;
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (used[j]) continue;
      double inter = 0, sa = 0, sb = 0;
      for (std::size_t k = 0; k < gt[i].size(); ++k) {
        inter += gt[i].values()[k] * pred[j].values()[k];
        sa += gt[i].values()[k];
        sb += pred[j].values()[k];
      }
      const double loss = 1.0 - (2.0 * inter + 1e-7) / (sa + sb + 1e-7);
      if (best < 0 || loss < best_loss) {
        best = static_cast<long>(j);
        best_loss = loss;
      }
    }
    if (best < 0) break;
    used[best] = true;
    out.push_back({i, static_cast<std::size_t>(best), best_loss});
  }
  return out;
}

microstructure::DislocationCurve segment(Point a, Point b, double thickness) {
  microstructure::DislocationCurve c({a, 0.5 * (a + b), b});
  c.thickness = thickness;
  return c;
}

// A short stroke in a 16x16 grid whose skeleton traces to one open path.
BinaryGrid random_stroke(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pos(1.5, 14.5);
  for (;;) {
    const Point a{pos(rng), pos(rng)}, b{pos(rng), pos(rng)};
    if (distance(a, b) < 6) continue;
    const auto m = raster::stroke_mask(segment(a, b, 1.0 + (rng() % 2)), 16, 16);
    if (eval::traced_length(m)) return m;
  }
}

Outcome matching_oracle() {
  constexpr int kInstances = 200;
  std::mt19937_64 rng(11);
  int agree = 0, perm_ok = 0;
  double worst_loss = 0, worst_metric_dev = 0;
  for (int t = 0; t < kInstances; ++t) {
    const std::size_t m = 1 + rng() % 4, n = 1 + rng() % 6;
    // Soft masks quantized to quarters so every sum is exact.
    std::vector<ScalarGrid> gt, pred;
    for (std::size_t i = 0; i < m; ++i) gt.push_back(to_scalar(random_stroke(rng)));
    for (std::size_t j = 0; j < n; ++j) {
      ScalarGrid p = to_scalar(random_stroke(rng));
      for (double& v : p.values()) v = v > 0 ? 0.25 * (1 + rng() % 4) : (rng() % 8 == 0 ? 0.25 : 0.0);
      pred.push_back(std::move(p));
    }
    const auto report = eval::greedy_match(gt, pred);
    bool same = report.assignments == oracle_greedy(gt, pred);
    std::vector<std::size_t> unmatched_gt;
    for (std::size_t i = n; i < m; ++i) unmatched_gt.push_back(i);
    same = same && report.unmatched_gt == unmatched_gt;
    agree += same;

    // Perfect permutation of binary GT.
    std::vector<BinaryGrid> gt_bin;
    for (std::size_t i = 0; i < m; ++i) gt_bin.push_back(random_stroke(rng));
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ScalarGrid> permuted;
    for (std::size_t i = 0; i < m; ++i) permuted.push_back(to_scalar(gt_bin[perm[i]]));
    const auto scored = eval::score_image(gt_bin, permuted);
    bool ok = scored.loss < 1e-6;
    for (double s : scored.metric_scores) {
      worst_metric_dev = std::max(worst_metric_dev, std::abs(s - 1.0));
      ok = ok && std::abs(s - 1.0) <= 1e-6;
    }
    worst_loss = std::max(worst_loss, scored.loss);
    perm_ok += ok;
  }
  return {agree == kInstances && perm_ok == kInstances,
          fmt("greedy equals reference on %d/%d instances; permutations %d/%d with loss < 1e-6 and metric 1 +- 1e-6 "
              "(worst loss %.2e, worst metric deviation %.2e)",
              agree, kInstances, perm_ok, kInstances, worst_loss, worst_metric_dev)};
}

// ---- 5

Outcome length_metric() {
  constexpr double kTol = 0.05;
  int ok = 0, total = 0;
  double worst = 0;
  std::string worst_case;
  for (double angle : {0.0, 30.0, 45.0, 90.0}) {
    const double a = angle * std::acos(-1.0) / 180.0;
    const Point u{std::cos(a), std::sin(a)};
    const Point start{20.5, 20.5};
    for (int thickness = 1; thickness <= 5; ++thickness) {
      const auto bar = [&](double length) {
        return raster::stroke_mask(segment(start, start + length * u, thickness), 260, 260);
      };
      const auto gt = bar(100);
      for (double factor : {0.5, 1.0, 2.0}) {
        const double expected = std::max(0.0, 1.0 - std::abs(factor - 1.0));
        const double got = eval::length_metric(gt, to_scalar(bar(100 * factor)));
        const double dev = std::abs(got - expected);
        if (dev > worst) {
          worst = dev;
          worst_case = fmt("angle %.0f thickness %d factor %.1f", angle, thickness, factor);
        }
        ok += dev <= kTol;
        ++total;
      }
    }
  }
  return {ok == total, fmt("%d/%d half/full/double bars within %.2f of 1 - |dL|/L (worst %.4f at %s)", ok, total, kTol,
                           worst, worst_case.c_str())};
}

// ---- 6

Outcome scale_conformance() {
  constexpr double kLimit = 1800.0;
  int over = 0;
  std::size_t max_seen = 0;
  for (const auto* id : {"M1", "M2"}) {
    const auto dist = microstructure::FeatureDistributions::resolve(id);
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
      const auto n = microstructure::sample_microstructure(dist, seed, {}).dislocation_count();
      max_seen = std::max(max_seen, n);
      over += n > 20;
    }
  }

  dislogen::testing::TempDir tmp;
  dataset::DatasetConfig config;
  config.train = 4000;
  config.test = 1000;
  config.seed = 1;
  config.workers = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  const auto summary = dataset::generate_dataset(config, tmp.path());
  const double secs = seconds_since(t0);

  std::size_t bundles = 0, files_ok = 0, max_bundle = 0;
  for (const auto* split : {&summary.train, &summary.test}) {
    for (const auto& b : *split) {
      ++bundles;
      max_bundle = std::max(max_bundle, b.dislocations);
      over += b.dislocations > 20;
      const auto dir = tmp.path() / (split == &summary.train ? "train" : "test");
      bool all = b.files.size() == b.dislocations + 3;
      for (const auto& f : b.files) all = all && fs::exists(dir / f);
      files_ok += all;
    }
  }
  const bool pass = over == 0 && summary.train.size() == 4000 && summary.test.size() == 1000 &&
                    files_ok == bundles && fs::exists(tmp.path() / "manifest.json") && secs < kLimit;
  return {pass, fmt("max %zu dislocations in 20000 sampled scenes, max %zu in dataset; %zu/%zu train, %zu/%zu test "
                    "bundles complete at 512x512 in %.0f s with %u worker(s) (limit %.0f s)",
                    max_seen, max_bundle, summary.train.size(), config.train, summary.test.size(), config.test,
                    secs, config.workers, kLimit)};
}

// ---- 7

ScalarGrid block(std::size_t size, std::size_t r0, std::size_t c0, std::size_t h, std::size_t w) {
  ScalarGrid g(size, size);
  for (std::size_t r = r0; r < r0 + h; ++r)
    for (std::size_t c = c0; c < c0 + w; ++c) g(r, c) = 1.0;
  return g;
}

Outcome duplicate_filter() {
  std::mt19937_64 rng(3);
  int ok = 0, exact = 0;
  constexpr int kCases = 50;
  for (int t = 0; t < kCases; ++t) {
    const double target = t % 2 == 0 ? 0.4 : 0.6;
    // Two h x L bars shifted along their length; overlap fraction 1 - target.
    const std::size_t len = 10 * (2 + rng() % 8), h = 1 + rng() % 5;
    const std::size_t shift = static_cast<std::size_t>(std::lround(target * len));
    const std::size_t r0 = rng() % 40, c0 = rng() % 20;
    auto a = block(200, r0, c0, h, len), b = block(200, r0, c0 + shift, h, len);
    if (rng() % 2) {  // vertical variant
      a = block(200, c0, r0, len, h);
      b = block(200, c0 + shift, r0, len, h);
    }
    const double loss = eval::dice_loss(a, b);
    exact += std::abs(loss - target) < 1e-6;
    const auto result = eval::duplicate_filter({a, b}, eval::MatchReport{});
    const bool merged = result.groups.size() == 1 && result.kept.size() == 1;
    const bool separate = result.groups.empty() && result.kept.size() == 2;
    ok += target < 0.5 ? merged : separate;
  }
  return {ok == kCases && exact == kCases,
          fmt("%d/%d constructed pairs classified correctly (loss 0.4 merged, 0.6 separate); %d/%d at the intended loss",
              ok, kCases, exact, kCases)};
}

// ---- 8

Outcome tracking_ramp() {
  constexpr double kTol = 0.5;
  int ok = 0, total = 0;
  double worst = 0;
  for (double angle : {0.0, 30.0, 60.0, 90.0}) {
    std::vector<std::pair<std::size_t, std::vector<ScalarGrid>>> frames;
    for (int f = 0; f < 20; ++f) frames.emplace_back(f, dislogen::testing::render_pair(10.0 + f, angle));
    const auto rows = tracking::track(frames, {{0, 1}});
    for (std::size_t f = 0; f < rows.size(); ++f) {
      const double dev = rows[f].distance ? std::abs(*rows[f].distance - (10.0 + f)) : 1e9;
      worst = std::max(worst, dev);
      ok += dev <= kTol;
      ++total;
    }
  }
  return {ok == total && total == 80,
          fmt("%d/%d frames within %.1f px of the 10..29 px ramp over 4 orientations (worst %.3f px)", ok, total, kTol,
              worst)};
}

// ---- 9

Outcome distribution_fidelity() {
  constexpr std::size_t kScenes = 10000;
  constexpr double kAlpha = 0.01;
  constexpr std::uint64_t kGlobalSeed = 2024;
  const auto m2 = microstructure::FeatureDistributions::m2();
  // Same seed path as dataset generation, without rendering.
  stats::FeatureSamples samples;
  for (std::size_t i = 0; i < kScenes; ++i) {
    const auto seed = derive_seed(dataset::image_seed(kGlobalSeed, dataset::Split::train, i), 2);
    const auto spec = microstructure::sample_microstructure(m2, seed, {});
    samples.add_record(json{{"distribution", m2.id}, {"microstructure", spec}});
  }
  const auto report = stats::summarize(samples, &m2);
  int passed = 0, tested = 0;
  std::string detail;
  for (const auto& f : report.features) {
    if (!f.test) continue;
    ++tested;
    passed += f.test->p_value > kAlpha;
    detail += fmt(" %s p=%.3g;", f.name.c_str(), f.test->p_value);
  }
  return {tested == 5 && passed == 5, fmt("%d/%d features with p > %.2f over %zu M2 scenes:%s", passed, tested, kAlpha,
                                          kScenes, detail.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"reproducibility", reproducibility},
      {"pipeline-fidelity", pipeline_fidelity},
      {"perlin-wavelength", perlin_wavelength},
      {"matching-oracle", matching_oracle},
      {"length-metric", length_metric},
      {"scale-conformance", scale_conformance},
      {"duplicate-filter", duplicate_filter},
      {"tracking", tracking_ramp},
      {"distribution-fidelity", distribution_fidelity},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!wanted.empty() && !wanted.count(number)) continue;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", number, criteria[i].first, o.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
