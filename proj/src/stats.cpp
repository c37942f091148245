#include "partlasso/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace partlasso::stats {

double normal_quantile(double probability) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw std::invalid_argument("normal_quantile: probability must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::normal_distribution<double>(), probability);
}

double normal_cdf(double x) {
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

double chi_square_quantile(double probability, double dof) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw std::invalid_argument("chi_square_quantile: probability must lie in (0, 1)");
  }
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), probability);
}

double ks_statistic_normal(std::vector<double> sample) {
  if (sample.empty()) throw std::invalid_argument("ks_statistic_normal: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = normal_cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_pvalue(double statistic, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double t = (sn + 0.12 + 0.11 / sn) * statistic;
  if (t < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace partlasso::stats
