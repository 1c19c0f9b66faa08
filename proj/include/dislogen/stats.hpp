#pragma once

#include <vector>

#include "dislogen/distributions.hpp"

namespace dislogen::stats {

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

// Pearson goodness-of-fit against a discrete law. Categories with zero
// probability must not occur in `samples` (they would give p = 0).
ChiSquareResult chi_square_discrete(const std::vector<int>& samples,
                                    const microstructure::DiscreteDistribution& dist);

// Pearson goodness-of-fit against a piecewise-uniform law; every bin is split
// into `sub_bins` equal-width cells so uniform laws are tested for flatness.
ChiSquareResult chi_square_continuous(const std::vector<double>& samples,
                                      const microstructure::ContinuousDistribution& dist,
                                      int sub_bins = 10);

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
};

// Values outside [edges.front(), edges.back()] are dropped; the last bin is closed.
Histogram histogram(const std::vector<double>& samples, std::vector<double> edges);
std::vector<double> linear_edges(double lo, double hi, std::size_t bins);

double mean(const std::vector<double>& v);
double median(std::vector<double> v);

}  // namespace dislogen::stats
