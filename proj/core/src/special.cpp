#include "harqerr/special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace harqerr {

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double log_q_function(double x) {
  if (x < 30.0) return std::log(q_function(x));
  const double r = 1.0 / (x * x);
  const double series = 1.0 - r * (1.0 - r * (3.0 - r * (15.0 - r * 105.0)));
  return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (std::numbers::inv_sqrtpi / std::numbers::sqrt2);
}

namespace {

void check_shape(int k, double x) {
  if (k < 1) throw std::domain_error("incomplete gamma: shape must be >= 1");
  if (!(x >= 0.0)) throw std::domain_error("incomplete gamma: argument must be >= 0");
}

// e^{-x} x^j / j! for j = 0 evaluated in log space when x is large.
double poisson_term(int j, double x) {
  if (x == 0.0) return j == 0 ? 1.0 : 0.0;
  return std::exp(j * std::log(x) - x - std::lgamma(j + 1.0));
}

}  // namespace

double gamma_q_int(int k, double x) {
  check_shape(k, x);
  if (x < k) return 1.0 - gamma_p_int(k, x);
  double term = poisson_term(0, x);
  double sum = term;
  for (int j = 1; j < k; ++j) {
    term *= x / j;
    sum += term;
  }
  if (term == 0.0 && x > 0.0) {
    // e^{-x} underflowed; fall back to per-term logs.
    sum = 0.0;
    for (int j = 0; j < k; ++j) sum += poisson_term(j, x);
  }
  return std::min(sum, 1.0);
}

double gamma_p_int(int k, double x) {
  check_shape(k, x);
  if (x >= k) return 1.0 - gamma_q_int(k, x);
  // Tail of the Poisson series, sum_{j>=k} e^{-x} x^j / j!; terms decrease
  // geometrically once j > x.
  double term = poisson_term(k, x);
  double sum = 0.0;
  for (int j = k; term > 0.0; ++j) {
    sum += term;
    if (term < sum * 1e-18) break;
    term *= x / (j + 1);
  }
  return std::min(sum, 1.0);
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

}  // namespace harqerr
