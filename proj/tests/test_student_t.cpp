#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "copmix/quadrature.hpp"
#include "copmix/student_t.hpp"

using namespace copmix::special;

TEST_CASE("t quantile matches reference tables") {
  // Frozen from an independent implementation (scipy.stats.t.ppf).
  CHECK_THAT(student_t_quantile(3.0, 0.95),
             Catch::Matchers::WithinAbs(2.3533634348018264, 1e-10));
  CHECK_THAT(student_t_quantile(3.0, 0.99),
             Catch::Matchers::WithinAbs(4.540702858471383, 1e-10));
  CHECK_THAT(student_t_quantile(5.0, 0.975),
             Catch::Matchers::WithinAbs(2.570581835636314, 1e-10));
  CHECK_THAT(student_t_quantile(10.0, 0.95),
             Catch::Matchers::WithinAbs(1.8124611228107335, 1e-10));
  CHECK_THAT(student_t_quantile(2.5, 0.9),
             Catch::Matchers::WithinAbs(1.730250928807177, 1e-10));
  CHECK_THAT(student_t_quantile(7.0, 0.25),
             Catch::Matchers::WithinAbs(-0.7111417780816957, 1e-10));
  CHECK(student_t_quantile(3.0, 0.5) == 0.0);
}

TEST_CASE("t cdf/quantile round trip") {
  for (double nu : {2.5, 3.0, 4.0, 7.5, 30.0})
    for (double p : {1e-6, 0.01, 0.2, 0.5, 0.77, 0.999, 1 - 1e-9}) {
      const double x = student_t_quantile(nu, p);
      CHECK_THAT(student_t_cdf(nu, x), Catch::Matchers::WithinAbs(p, 1e-12));
    }
}

TEST_CASE("t pdf is the derivative of the cdf") {
  for (double nu : {3.0, 6.0})
    for (double x : {-2.0, -0.3, 0.0, 1.1, 4.0}) {
      const double h = 1e-5;
      const double fd = (student_t_cdf(nu, x + h) - student_t_cdf(nu, x - h)) / (2 * h);
      CHECK_THAT(student_t_pdf(nu, x), Catch::Matchers::WithinAbs(fd, 1e-7));
    }
}

TEST_CASE("bivariate t conditional matches the quadrature of the density") {
  // Independent route: integrate f(x,t)/f(x) over t in (-inf, y] by
  // substituting t = y - s/(1-s) to a bounded interval.
  const double rho = 0.5, nu = 3.0;
  for (double x : {-1.0, 0.4})
    for (double y : {-0.5, 0.8, 2.0}) {
      const auto integrand = [&](double s) {
        const double t = y - s / (1.0 - s);
        const double jac = 1.0 / ((1.0 - s) * (1.0 - s));
        return bivariate_t_pdf(rho, nu, x, t) * jac;
      };
      const auto q = copmix::detail::adaptive_gl(integrand, 0.0, 1.0 - 1e-9, 1e-12);
      const double expected = q.value / student_t_pdf(nu, x);
      CHECK_THAT(bivariate_t_conditional(rho, nu, x, y),
                 Catch::Matchers::WithinAbs(expected, 1e-8));
    }
}
