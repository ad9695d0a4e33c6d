#pragma once

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>

#include "copmix/errors.hpp"

namespace copmix::special {

inline double student_t_pdf(double nu, double x) {
  const double lg = boost::math::lgamma(0.5 * (nu + 1.0)) - boost::math::lgamma(0.5 * nu);
  return std::exp(lg) / std::sqrt(nu * M_PI) * std::pow(1.0 + x * x / nu, -0.5 * (nu + 1.0));
}

inline double student_t_cdf(double nu, double x) {
  if (x == 0.0) return 0.5;
  // tail mass via the regularized incomplete beta function
  const double z = nu / (nu + x * x);
  const double tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, z);
  return x > 0.0 ? 1.0 - tail : tail;
}

// Quantile through the inverse regularized incomplete beta, polished with one
// Newton step on the CDF (target residual 1e-10).
inline double student_t_quantile(double nu, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    throw OutOfRangeParameter("p", "[0,1]", p);
  }
  if (p == 0.5) return 0.0;
  const double tail = p < 0.5 ? p : 1.0 - p;
  const double z = boost::math::ibeta_inv(0.5 * nu, 0.5, 2.0 * tail);
  double x = std::sqrt(nu * (1.0 - z) / z);
  if (p < 0.5) x = -x;
  const double pdf = student_t_pdf(nu, x);
  if (pdf > 0.0) {
    const double residual = student_t_cdf(nu, x) - p;
    x -= residual / pdf;
  }
  return x;
}

// Density of the bivariate t with unit scales, correlation rho, nu d.o.f.
inline double bivariate_t_pdf(double rho, double nu, double x, double y) {
  const double one_m_r2 = 1.0 - rho * rho;
  const double q = (x * x - 2.0 * rho * x * y + y * y) / (nu * one_m_r2);
  const double lg = boost::math::lgamma(0.5 * nu + 1.0) - boost::math::lgamma(0.5 * nu);
  return std::exp(lg) / (nu * M_PI * std::sqrt(one_m_r2)) * std::pow(1.0 + q, -0.5 * nu - 1.0);
}

// P(Y <= y | X = x) for the bivariate t: a rescaled t with nu+1 d.o.f.
inline double bivariate_t_conditional(double rho, double nu, double x, double y) {
  const double scale = std::sqrt((1.0 - rho * rho) * (nu + x * x) / (nu + 1.0));
  return student_t_cdf(nu + 1.0, (y - rho * x) / scale);
}

}  // namespace copmix::special
