#include "dislogen/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <limits>
#include <map>
#include <numeric>

#include "dislogen/errors.hpp"

namespace dislogen::stats {
namespace {

ChiSquareResult finish(const std::vector<double>& observed, const std::vector<double>& expected) {
  ChiSquareResult r;
  int used = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (expected[i] <= 0.0) {
      if (observed[i] > 0.0) {
        r.statistic = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        r.dof = std::max(1, used);
        return r;
      }
      continue;
    }
    const double d = observed[i] - expected[i];
    r.statistic += d * d / expected[i];
    ++used;
  }
  r.dof = used - 1;
  if (r.dof < 1) {
    r.p_value = 1.0;
    return r;
  }
  boost::math::chi_squared_distribution<double> chi(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(chi, r.statistic));
  return r;
}

}  // namespace

ChiSquareResult chi_square_discrete(const std::vector<int>& samples,
                                    const microstructure::DiscreteDistribution& dist) {
  if (samples.empty()) throw ParameterError("chi-square test needs samples");
  std::map<int, double> observed;
  for (int v : dist.values) observed[v] = 0.0;
  for (int s : samples) observed[s] += 1.0;
  std::vector<double> obs, exp;
  const double n = static_cast<double>(samples.size());
  for (const auto& [value, count] : observed) {
    obs.push_back(count);
    exp.push_back(n * dist.probability(value));
  }
  return finish(obs, exp);
}

ChiSquareResult chi_square_continuous(const std::vector<double>& samples,
                                      const microstructure::ContinuousDistribution& dist,
                                      int sub_bins) {
  if (samples.empty()) throw ParameterError("chi-square test needs samples");
  if (sub_bins < 1) throw ParameterError("sub_bins must be >= 1");
  std::vector<double> edges;
  for (std::size_t b = 0; b + 1 < dist.edges.size(); ++b) {
    for (int k = 0; k < sub_bins; ++k) {
      edges.push_back(dist.edges[b] + (dist.edges[b + 1] - dist.edges[b]) * k / sub_bins);
    }
  }
  edges.push_back(dist.edges.back());

  const Histogram h = histogram(samples, edges);
  const double n = static_cast<double>(samples.size());
  std::vector<double> obs(h.counts.begin(), h.counts.end());
  // Samples outside the support make the fit impossible.
  const double inside = std::accumulate(obs.begin(), obs.end(), 0.0);
  std::vector<double> exp;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    exp.push_back(n * (dist.cdf(edges[i + 1]) - dist.cdf(edges[i])));
  }
  if (inside < n) {
    obs.push_back(n - inside);
    exp.push_back(0.0);
  }
  return finish(obs, exp);
}

Histogram histogram(const std::vector<double>& samples, std::vector<double> edges) {
  if (edges.size() < 2) throw ParameterError("histogram needs at least two edges");
  Histogram h;
  h.counts.assign(edges.size() - 1, 0);
  for (double s : samples) {
    if (s < edges.front() || s > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), s);
    std::size_t bin = static_cast<std::size_t>(it - edges.begin());
    bin = bin == 0 ? 0 : bin - 1;
    if (bin >= h.counts.size()) bin = h.counts.size() - 1;
    ++h.counts[bin];
  }
  h.edges = std::move(edges);
  return h;
}

std::vector<double> linear_edges(double lo, double hi, std::size_t bins) {
  std::vector<double> e(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + (hi - lo) * static_cast<double>(i) / bins;
  return e;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + mid));
}

}  // namespace dislogen::stats
