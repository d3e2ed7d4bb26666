#pragma once

#include <cstdint>
#include <vector>

namespace cwalk::stats {

struct ChiSquare {
  double statistic = 0.0;
  size_t dof = 0;
  double p_value = 1.0;
};

// Upper tail of the chi-square distribution: P(X >= statistic).
double chi_square_survival(double statistic, size_t dof);

// Test of homogeneity across rows of an R x C count table. Columns whose
// total is zero carry no information and are dropped from the dof count.
ChiSquare chi_square_homogeneity(const std::vector<std::vector<uint64_t>>& table);

// Goodness of fit of observed counts against given cell probabilities.
ChiSquare chi_square_goodness(const std::vector<uint64_t>& counts,
                              const std::vector<double>& probs);

// Standard deviation of the empirical frequency of an event with
// probability p over n independent trials.
double binomial_sigma(double p, uint64_t n);

// (observed frequency - p) in units of binomial_sigma.
double z_score(uint64_t successes, uint64_t n, double p);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace cwalk::stats
