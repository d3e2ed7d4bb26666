#include "cwalk/stats.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "cwalk/errors.hpp"

namespace cwalk::stats {

double chi_square_survival(double statistic, size_t dof) {
  if (dof == 0) return 1.0;
  if (!(statistic > 0.0)) return 1.0;
  if (std::isinf(statistic)) return 0.0;
  return boost::math::gamma_q(double(dof) / 2.0, statistic / 2.0);
}

ChiSquare chi_square_homogeneity(const std::vector<std::vector<uint64_t>>& table) {
  if (table.size() < 2) throw ValidationError("homogeneity test needs at least two rows");
  const size_t cols = table.front().size();
  for (const auto& row : table) {
    if (row.size() != cols) throw ValidationError("ragged count table");
  }
  std::vector<double> col_total(cols, 0.0);
  std::vector<double> row_total(table.size(), 0.0);
  double grand = 0.0;
  for (size_t r = 0; r < table.size(); ++r) {
    for (size_t c = 0; c < cols; ++c) {
      row_total[r] += double(table[r][c]);
      col_total[c] += double(table[r][c]);
      grand += double(table[r][c]);
    }
  }
  if (grand == 0.0) throw ValidationError("empty count table");
  ChiSquare out;
  size_t live_cols = 0;
  for (size_t c = 0; c < cols; ++c) {
    if (col_total[c] == 0.0) continue;
    ++live_cols;
    for (size_t r = 0; r < table.size(); ++r) {
      const double expected = row_total[r] * col_total[c] / grand;
      if (expected == 0.0) continue;
      const double diff = double(table[r][c]) - expected;
      out.statistic += diff * diff / expected;
    }
  }
  if (live_cols < 2) throw ValidationError("count table needs at least two informative columns");
  out.dof = (table.size() - 1) * (live_cols - 1);
  out.p_value = chi_square_survival(out.statistic, out.dof);
  return out;
}

ChiSquare chi_square_goodness(const std::vector<uint64_t>& counts,
                              const std::vector<double>& probs) {
  if (counts.size() != probs.size() || counts.empty()) {
    throw ValidationError("counts and probabilities must have equal nonzero length");
  }
  uint64_t n = 0;
  for (uint64_t c : counts) n += c;
  if (n == 0) throw ValidationError("no observations");
  ChiSquare out;
  size_t live = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (!(probs[i] >= 0.0)) throw ValidationError("cell probability must be non-negative");
    if (probs[i] == 0.0) {
      if (counts[i] > 0) {
        out.statistic = std::numeric_limits<double>::infinity();
        ++live;
      }
      continue;
    }
    ++live;
    const double expected = double(n) * probs[i];
    const double diff = double(counts[i]) - expected;
    out.statistic += diff * diff / expected;
  }
  out.dof = live > 0 ? live - 1 : 0;
  out.p_value = chi_square_survival(out.statistic, out.dof);
  return out;
}

double binomial_sigma(double p, uint64_t n) {
  if (n == 0) throw ValidationError("sigma undefined for zero trials");
  return std::sqrt(p * (1.0 - p) / double(n));
}

double z_score(uint64_t successes, uint64_t n, double p) {
  const double sigma = binomial_sigma(p, n);
  const double freq = double(successes) / double(n);
  if (sigma == 0.0) {
    return freq == p ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (freq - p) / sigma;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ValidationError("distributions differ in length");
  double sum = 0.0;
  for (size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

}  // namespace cwalk::stats
